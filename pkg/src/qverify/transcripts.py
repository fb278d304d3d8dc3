"""Loader for the printed closed forms shipped in ``qverify/data``.

Each data line is ``key | numerator factors | denominator factors | polynomial``
with factors separated by ``*`` at parenthesis depth 0 and ``^`` for powers.
Keeping the denominators factored lets a pole be reported by name.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import sympy

from .errors import PoleError
from .taupoly import TauPoly

__all__ = ["PrintedTerm", "load_table", "printed_taupoly", "printed_value", "TABLES"]

TABLES = ("I", "J1", "J2", "tau_quadratic")

_N, _TAU = sympy.symbols("N tau")


def _split_top(expr: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in expr:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "*" and depth == 0:
            # '**' never occurs because powers are written with '^'
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur).strip())
    return [x for x in out if x]


def _parse(expr: str):
    return sympy.sympify(expr.replace("^", "**"), locals={"N": _N, "tau": _TAU})


@dataclass(frozen=True)
class PrintedTerm:
    key: str
    numer: tuple
    denom: tuple
    poly: str

    def value(self, N: int):
        """Exact sympy value at dimension N (a polynomial in tau)."""
        num = sympy.Integer(1)
        for fac in self.numer:
            num *= _parse(fac).subs(_N, N)
        den = sympy.Integer(1)
        for fac in self.denom:
            v = _parse(fac).subs(_N, N)
            if v == 0:
                raise PoleError(f"printed term {self.key} has a pole at N={N}: factor {fac} vanishes")
            den *= v
        return sympy.expand(num * _parse(self.poly).subs(_N, N) / den)


@lru_cache(maxsize=None)
def load_table(name: str) -> tuple:
    if name not in TABLES:
        raise KeyError(f"unknown table {name!r}; choose from {TABLES}")
    text = resources.files("qverify.data").joinpath(f"{name}.txt").read_text()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, numer, denom, poly = (p.strip() for p in line.split("|"))
        rows.append(PrintedTerm(key, tuple(_split_top(numer)), tuple(_split_top(denom)), poly))
    return tuple(rows)


def _to_fraction(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def printed_taupoly(name: str, N: int) -> TauPoly:
    """A printed reduced-energy closed form at dimension N, in lambda' and tau."""
    terms = {}
    for row in load_table(name):
        poly = sympy.Poly(row.value(N), _TAU)
        coeffs = [Fraction(0)] * 3
        for (d,), c in poly.terms():
            coeffs[d] = _to_fraction(c)
        terms[int(row.key)] = tuple(coeffs)
    return TauPoly(terms, dim=N)


def printed_value(name: str, key: str, N: int) -> Fraction:
    """A single tau-free printed quantity such as A1 or Q0."""
    for row in load_table(name):
        if row.key == key:
            return _to_fraction(row.value(N))
    raise KeyError(f"{key!r} not in table {name!r}")
