"""Polynomials in lambda' whose coefficients are polynomials of degree <= 2 in tau."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import mpmath

from .scalars import ONE, SymScalar, as_fraction

__all__ = ["TauPoly", "TauCoeffs"]

TauCoeffs = tuple  # (q0, q1, q2)

_ZERO3 = (Fraction(0), Fraction(0), Fraction(0))


def _norm3(c) -> tuple:
    c = tuple(as_fraction(x) for x in c)
    if len(c) > 3:
        if any(c[3:]):
            raise ValueError("tau degree above 2 is not representable")
        c = c[:3]
    return c + (Fraction(0),) * (3 - len(c))


@dataclass(frozen=True)
class TauPoly:
    """sum_e lambda'^e (q0 + q1 tau + q2 tau^2), times a common ``unit``.

    ``unit`` is a SymScalar with coefficient 1 (a power of pi and/or of the
    sphere symbol) shared by every coefficient; polynomials with different
    units never add.
    """

    terms: Mapping[int, tuple] = field(default_factory=dict)
    unit: SymScalar = ONE
    dim: int | None = None

    def __post_init__(self):
        # the rational part of the unit is folded into the coefficients
        r = self.unit.coeff
        if r == 0:
            object.__setattr__(self, "unit", ONE)
            r = Fraction(0)
        elif r != 1:
            u = self.unit
            object.__setattr__(self, "unit", SymScalar(1, u.pi2, u.sphere_power, u.dim))
        clean = {}
        for e, c in dict(self.terms).items():
            c = tuple(x * r for x in _norm3(c))
            if any(c):
                clean[int(e)] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    # construction helpers
    @classmethod
    def zero(cls, unit: SymScalar = ONE, dim: int | None = None) -> "TauPoly":
        return cls({}, unit, dim)

    @classmethod
    def monomial(cls, exp: int, coeffs, unit: SymScalar = ONE, dim=None) -> "TauPoly":
        return cls({exp: coeffs}, unit, dim)

    # structure
    @property
    def exponents(self) -> list[int]:
        return list(self.terms)

    def coeff(self, exp: int) -> tuple:
        return self.terms.get(exp, _ZERO3)

    def tau_degree(self) -> int:
        deg = -1
        for c in self.terms.values():
            for d in range(3):
                if c[d]:
                    deg = max(deg, d)
        return deg

    def is_zero(self) -> bool:
        return not self.terms

    def tau_part(self, d: int) -> "TauPoly":
        """Keep only the tau^d slot."""
        return TauPoly({e: tuple(c[k] if k == d else 0 for k in range(3))
                        for e, c in self.terms.items()}, self.unit, self.dim)

    def _check_unit(self, other: "TauPoly") -> SymScalar:
        if self.is_zero():
            return other.unit
        if other.is_zero() or self.unit == other.unit:
            return self.unit
        raise ValueError(f"incompatible units {self.unit} and {other.unit}")

    # arithmetic
    def __add__(self, other: "TauPoly") -> "TauPoly":
        if not isinstance(other, TauPoly):
            return NotImplemented
        unit = self._check_unit(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            a = out.get(e, _ZERO3)
            out[e] = tuple(x + y for x, y in zip(a, c))
        return TauPoly(out, unit, self.dim or other.dim)

    def __neg__(self):
        return TauPoly({e: tuple(-x for x in c) for e, c in self.terms.items()}, self.unit, self.dim)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "TauPoly":
        """Multiply by a rational or by a SymScalar (changing the unit)."""
        if isinstance(c, SymScalar):
            return TauPoly(self.terms, self.unit * c, self.dim)
        c = as_fraction(c)
        return TauPoly({e: tuple(x * c for x in v) for e, v in self.terms.items()}, self.unit, self.dim)

    def divide(self, c: SymScalar) -> "TauPoly":
        return TauPoly(self.terms, self.unit / c, self.dim)

    def shift(self, k: int) -> "TauPoly":
        """Multiply by lambda'^k."""
        return TauPoly({e + k: c for e, c in self.terms.items()}, self.unit, self.dim)

    def d_lambda(self, order: int = 1) -> "TauPoly":
        out = self
        for _ in range(order):
            out = TauPoly({e - 1: tuple(x * e for x in c) for e, c in out.terms.items() if e},
                          out.unit, out.dim)
        return out

    def multiply_tau_linear(self, a, b) -> "TauPoly":
        """Multiply by (a + b tau); the product must stay of tau-degree <= 2."""
        a, b = as_fraction(a), as_fraction(b)
        out = {}
        for e, (q0, q1, q2) in self.terms.items():
            if q2 and b:
                raise ValueError("tau degree would exceed 2")
            out[e] = (a * q0, a * q1 + b * q0, a * q2 + b * q1)
        return TauPoly(out, self.unit, self.dim)

    # evaluation
    def at_lambda(self, lam) -> tuple:
        """Exact tau-coefficients (q0, q1, q2) at a rational lambda'."""
        lam = as_fraction(lam)
        acc = [Fraction(0)] * 3
        for e, c in self.terms.items():
            p = lam ** e
            for d in range(3):
                acc[d] += c[d] * p
        return tuple(acc)

    def evaluate(self, lam, tau) -> Fraction:
        """Exact value without the unit."""
        q = self.at_lambda(lam)
        tau = as_fraction(tau)
        return q[0] + q[1] * tau + q[2] * tau * tau

    def evaluate_mp(self, lam, tau, dps: int = 64):
        """High-precision value including the full unit; interval-friendly inputs allowed."""
        with mpmath.workdps(dps + 10):
            total = mpmath.mpf(0)
            for e, c in self.terms.items():
                coef = sum((mpmath.mpf(c[d].numerator) / c[d].denominator) * tau ** d
                           for d in range(3))
                total += coef * lam ** e
            return total * self.unit.to_mpf(dps)

    # comparison
    def __eq__(self, other):
        if not isinstance(other, TauPoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        try:
            diff = self - other
        except ValueError:
            return False
        return diff.is_zero()

    def __hash__(self):
        return hash((tuple(self.terms.items()), self.unit))

    def mismatches(self, other: "TauPoly") -> list[tuple[int, int, Fraction, Fraction]]:
        """(lambda-exp, tau-deg, self coeff, other coeff) where they differ."""
        self._check_unit(other)
        out = []
        for e in sorted(set(self.terms) | set(other.terms)):
            ca, cb = self.coeff(e), other.coeff(e)
            for d in range(3):
                if ca[d] != cb[d]:
                    out.append((e, d, ca[d], cb[d]))
        return out

    def items(self) -> Iterable:
        return self.terms.items()

    def __repr__(self):
        parts = []
        for e, c in self.terms.items():
            parts.append(f"L^{e}:({c[0]}, {c[1]}, {c[2]})")
        u = "" if self.unit == ONE else f" * {self.unit}"
        return "TauPoly{" + ", ".join(parts) + "}" + u
