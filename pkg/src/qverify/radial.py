"""Closed-form radial integrals int_0^inf r^a / (lam^2 + r^2)^b dr and friends."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import DivergenceError
from .scalars import ONE, SymScalar, as_fraction, gamma_ratio
from .taupoly import TauPoly

__all__ = [
    "radial_master",
    "RPoly",
    "FPoly",
    "DEFAULT_C1",
    "poly_radial_integral",
    "energy_constant",
]

# linear coefficient of f; the alternative printed value is -1200
DEFAULT_C1 = -12000


def radial_master(a: int, b, lam=1) -> SymScalar:
    """lam^{a+1-2b} Gamma((a+1)/2) Gamma(b-(a+1)/2) / (2 Gamma(b)), exact.

    ``lam`` must be rational; when the lambda exponent is not an integer
    only ``lam == 1`` is accepted.
    """
    b = as_fraction(b)
    if a <= -1:
        raise DivergenceError(f"radial integral diverges at r=0: need a > -1, got a={a}")
    h = Fraction(a + 1, 2)
    if b <= h:
        raise DivergenceError(
            f"radial integral diverges at infinity: need b > (a+1)/2, got a={a}, b={b}")
    val = gamma_ratio([h, b - h], [b]) / 2
    lam = as_fraction(lam)
    if lam != 1:
        e = a + 1 - 2 * b
        if e.denominator != 1:
            raise ValueError("non-integer lambda power needs lam == 1")
        val = val * (lam ** int(e))
    return val


class RPoly:
    """Polynomial in s = r^2 with coefficients polynomial in tau.

    Stored as {(s-degree, tau-degree): Fraction}.
    """

    __slots__ = ("c",)

    def __init__(self, coeffs: Mapping[tuple[int, int], object] | None = None):
        self.c = {}
        for k, v in (coeffs or {}).items():
            v = as_fraction(v)
            if v:
                self.c[(int(k[0]), int(k[1]))] = v

    @classmethod
    def const(cls, x) -> "RPoly":
        return cls({(0, 0): x})

    @classmethod
    def s(cls) -> "RPoly":
        return cls({(1, 0): 1})

    @classmethod
    def tau(cls) -> "RPoly":
        return cls({(0, 1): 1})

    def __add__(self, other):
        other = other if isinstance(other, RPoly) else RPoly.const(other)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out.get(k, 0) + v
        return RPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return RPoly({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, RPoly) else RPoly.const(-as_fraction(other)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RPoly):
            x = as_fraction(other)
            return RPoly({k: v * x for k, v in self.c.items()})
        out: dict = {}
        for (s1, t1), v1 in self.c.items():
            for (s2, t2), v2 in other.c.items():
                k = (s1 + s2, t1 + t2)
                out[k] = out.get(k, 0) + v1 * v2
        return RPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = RPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def d(self, order: int = 1) -> "RPoly":
        """Derivative in s."""
        out = self
        for _ in range(order):
            out = RPoly({(s - 1, t): v * s for (s, t), v in out.c.items() if s})
        return out

    def __eq__(self, other):
        return isinstance(other, RPoly) and self.c == other.c

    def degree(self) -> int:
        return max((s for s, _ in self.c), default=-1)

    def tau_degree(self) -> int:
        return max((t for _, t in self.c), default=-1)

    def set_tau(self, tau) -> "RPoly":
        """Substitute a rational value for tau."""
        tau = as_fraction(tau)
        out: dict = {}
        for (s, t), v in self.c.items():
            out[(s, 0)] = out.get((s, 0), 0) + v * tau ** t
        return RPoly(out)

    def __repr__(self):
        return f"RPoly({self.c})"


@dataclass(frozen=True)
class FPoly:
    """f(s) = tau + c1 s + c2 s^2 + c3 s^3 + c4 s^4 with tau formal."""

    c1: Fraction = Fraction(DEFAULT_C1)
    c2: Fraction = Fraction(2411)
    c3: Fraction = Fraction(-135)
    c4: Fraction = Fraction(1)
    tau_slot: bool = True

    def __post_init__(self):
        for name in ("c1", "c2", "c3", "c4"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.c4 != 1:
            raise ValueError("f must be monic of degree 4")

    def rpoly(self) -> RPoly:
        base = RPoly({(1, 0): self.c1, (2, 0): self.c2, (3, 0): self.c3, (4, 0): self.c4})
        return base + RPoly.tau() if self.tau_slot else base

    def coefficients(self, tau=0) -> tuple:
        """(c0, c1, c2, c3, c4) with tau substituted (exact or float)."""
        return (tau, self.c1, self.c2, self.c3, self.c4)

    def numeric(self, tau: float):
        """Float callable s -> (f, f', f'', f''', f'''') at fixed tau."""
        c = [float(tau), float(self.c1), float(self.c2), float(self.c3), float(self.c4)]

        def ev(s):
            f0 = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * c[4])))
            f1 = c[1] + s * (2 * c[2] + s * (3 * c[3] + s * 4 * c[4]))
            f2 = 2 * c[2] + s * (6 * c[3] + s * 12 * c[4])
            f3 = 6 * c[3] + s * 24 * c[4]
            f4 = 24 * c[4] + 0 * s
            return f0, f1, f2, f3, f4

        return ev


def poly_radial_integral(P: RPoly, k: int, m: int, N: int | None = None) -> TauPoly:
    """int_0^inf P(r^2) r^k / (lam^2 + r^2)^m dr as a TauPoly in lam.

    Every monomial must converge; the first divergent one raises with its
    degree in the message.
    """
    out = TauPoly.zero(dim=N)
    for (d, t), c in sorted(P.c.items()):
        a = k + 2 * d
        try:
            val = radial_master(a, m)
        except DivergenceError as exc:
            raise DivergenceError(f"monomial r^{2 * d} (tau^{t}) with k={k}, m={m}: {exc}") from exc
        coeffs = [0, 0, 0]
        if t > 2:
            raise ValueError("tau degree above 2")
        coeffs[t] = c
        out = out + TauPoly({a + 1 - 2 * m: coeffs}, val, N)
    return out


def energy_constant(N: int) -> SymScalar:
    """E = (N-4)/N |S^{N-1}| int_0^inf r^{N-1}/(1+r^2)^N dr, the sphere's Paneitz energy."""
    sphere = SymScalar(ONE.coeff, 0, 1, N)
    return sphere * radial_master(N - 1, N) * Fraction(N - 4, N)
