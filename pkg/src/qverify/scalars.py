"""Exact scalars: rationals times powers of pi and of the sphere area symbol.

A `SymScalar` is the monomial ``coeff * pi**(pi2/2) * |S^{N-1}|**sphere_power``.
Half-integer Gamma values carry the pi**(1/2) slot; all quantities that the
engine compares in the end close over integer powers of pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

import mpmath

from .errors import DimensionError, PoleError

Rational = Union[int, Fraction]

FLOAT_DIGITS = 64


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


@dataclass(frozen=True)
class SymScalar:
    """``coeff * pi**(pi2/2) * |S^{dim-1}|**sphere_power``.

    ``dim`` is only needed when the sphere symbol is present; plain numbers
    use ``dim=None`` and combine with anything.
    """

    coeff: Fraction
    pi2: int = 0
    sphere_power: int = 0
    dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeff", as_fraction(self.coeff))
        if self.coeff == 0:
            object.__setattr__(self, "pi2", 0)
            object.__setattr__(self, "sphere_power", 0)
        if self.sphere_power == 0:
            object.__setattr__(self, "dim", None)
        elif self.dim is None:
            raise DimensionError("sphere symbol requires a dimension")

    # constructors
    @classmethod
    def rational(cls, x: Rational) -> "SymScalar":
        return cls(as_fraction(x))

    @classmethod
    def pi(cls, power: int = 1) -> "SymScalar":
        return cls(Fraction(1), 2 * power)

    @classmethod
    def sphere(cls, N: int, power: int = 1) -> "SymScalar":
        return cls(Fraction(1), 0, power, N)

    # structure
    @property
    def pi_power(self) -> Fraction:
        return Fraction(self.pi2, 2)

    def is_zero(self) -> bool:
        return self.coeff == 0

    def is_normal(self) -> bool:
        """True when the pi exponent is an integer (public normal form)."""
        return self.pi2 % 2 == 0

    def same_kind(self, other: "SymScalar") -> bool:
        return (self.pi2, self.sphere_power, self.dim) == (other.pi2, other.sphere_power, other.dim)

    def sign(self) -> int:
        # pi and sphere area are positive
        return (self.coeff > 0) - (self.coeff < 0)

    def _dim_with(self, other: "SymScalar") -> int | None:
        if self.dim is not None and other.dim is not None and self.dim != other.dim:
            raise DimensionError(f"dimension mismatch {self.dim} vs {other.dim}")
        return self.dim if self.dim is not None else other.dim

    # arithmetic
    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return SymScalar(self.coeff * other, self.pi2, self.sphere_power, self.dim)
        if not isinstance(other, SymScalar):
            return NotImplemented
        dim = self._dim_with(other)
        sp = self.sphere_power + other.sphere_power
        return SymScalar(self.coeff * other.coeff, self.pi2 + other.pi2, sp, dim if sp else None)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("SymScalar division by zero")
            return SymScalar(self.coeff / other, self.pi2, self.sphere_power, self.dim)
        if not isinstance(other, SymScalar):
            return NotImplemented
        if other.coeff == 0:
            raise ZeroDivisionError("SymScalar division by zero")
        dim = self._dim_with(other)
        sp = self.sphere_power - other.sphere_power
        return SymScalar(self.coeff / other.coeff, self.pi2 - other.pi2, sp, dim if sp else None)

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return SymScalar.rational(other) / self
        return NotImplemented

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return SymScalar.rational(1) / (self ** (-k))
        sp = self.sphere_power * k
        return SymScalar(self.coeff ** k, self.pi2 * k, sp, self.dim if sp else None)

    def __neg__(self):
        return SymScalar(-self.coeff, self.pi2, self.sphere_power, self.dim)

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymScalar.rational(other)
        if not isinstance(other, SymScalar):
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if not self.same_kind(other):
            raise ValueError(f"cannot add unlike SymScalars {self} and {other}")
        return SymScalar(self.coeff + other.coeff, self.pi2, self.sphere_power, self.dim)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymScalar.rational(other)
        if not isinstance(other, SymScalar):
            return NotImplemented
        return (self.coeff, self.pi2, self.sphere_power, self.dim) == (
            other.coeff, other.pi2, other.sphere_power, other.dim)

    def __hash__(self):
        return hash((self.coeff, self.pi2, self.sphere_power, self.dim))

    # expansion and export
    def expand_sphere(self) -> "SymScalar":
        """Replace the sphere symbol by 2 pi^{N/2} / Gamma(N/2)."""
        if self.sphere_power == 0:
            return self
        area = sphere_area(self.dim)
        base = SymScalar(self.coeff, self.pi2)
        return base * area ** self.sphere_power

    def to_mpf(self, dps: int = FLOAT_DIGITS) -> mpmath.mpf:
        with mpmath.workdps(dps + 10):
            val = mpmath.mpf(self.coeff.numerator) / self.coeff.denominator
            if self.pi2:
                val *= mpmath.pi ** (mpmath.mpf(self.pi2) / 2)
            if self.sphere_power:
                e = self.expand_sphere()
                return e.to_mpf(dps)
            return +val

    def __float__(self):
        return float(self.to_mpf(20))

    def __repr__(self):
        parts = [str(self.coeff)]
        if self.pi2:
            parts.append(f"pi^{self.pi_power}")
        if self.sphere_power:
            parts.append(f"|S^{self.dim - 1}|^{self.sphere_power}")
        return "SymScalar(" + " * ".join(parts) + ")"


ONE = SymScalar(Fraction(1))
ZERO = SymScalar(Fraction(0))


def _half_lattice(x) -> Fraction:
    x = as_fraction(x)
    if (2 * x).denominator != 1:
        raise ValueError(f"Gamma argument {x} is off the half-integer lattice")
    return x


@lru_cache(maxsize=4096)
def gamma_exact(x: Fraction) -> SymScalar:
    """Gamma at a positive integer or half-integer, exactly."""
    x = _half_lattice(x)
    if x <= 0:
        raise PoleError(f"Gamma pole at {x}")
    if x.denominator == 1:
        return SymScalar(Fraction(math.factorial(int(x) - 1)))
    n = int(x - Fraction(1, 2))
    # Gamma(n + 1/2) = (2n)! / (4^n n!) sqrt(pi)
    return SymScalar(Fraction(math.factorial(2 * n), 4 ** n * math.factorial(n)), 1)


def gamma_ratio(numer: Iterable, denom: Iterable = ()) -> SymScalar:
    """prod Gamma(numer) / prod Gamma(denom) at half-integer points."""
    out = ONE
    for a in numer:
        out = out * gamma_exact(as_fraction(a))
    for b in denom:
        out = out / gamma_exact(as_fraction(b))
    return out


def sphere_area(N: int) -> SymScalar:
    """|S^{N-1}| = 2 pi^{N/2} / Gamma(N/2) in exact form."""
    if N < 1:
        raise DimensionError("sphere_area needs N >= 1")
    return SymScalar(Fraction(2), N) / gamma_exact(Fraction(N, 2))


def a_coeff(N: int) -> Fraction:
    return Fraction((N - 2) ** 2 + 4, 2 * (N - 1) * (N - 2))


def b_coeff(N: int) -> Fraction:
    return Fraction(-4, N - 2)


@dataclass(frozen=True)
class DimConstants:
    N: int
    a_N: Fraction
    b_N: Fraction
    gammaN_base: Fraction
    E: SymScalar

    def gamma_N_printed(self, dps: int = FLOAT_DIGITS) -> mpmath.mpf:
        """The printed normalisation base^{-(N-4)/8}."""
        with mpmath.workdps(dps + 10):
            base = mpmath.mpf(self.gammaN_base.numerator) / self.gammaN_base.denominator
            return +base ** (-mpmath.mpf(self.N - 4) / 8)

    def gamma_N(self, dps: int = FLOAT_DIGITS) -> mpmath.mpf:
        """Normalisation forced by the flat equation: gamma^{8/(N-4)} = 2N(N^2-4)."""
        return gamma_N_flat(self.N, dps)


def gamma_N_flat_power(N: int) -> Fraction:
    """gamma_N^{8/(N-4)} for the bubble of Delta^2 u = (N-4)/2 u^{(N+4)/(N-4)}."""
    return Fraction(2 * N * (N * N - 4))


def gamma_N_flat(N: int, dps: int = FLOAT_DIGITS) -> mpmath.mpf:
    with mpmath.workdps(dps + 10):
        return +mpmath.mpf(int(gamma_N_flat_power(N))) ** (mpmath.mpf(N - 4) / 8)


def dim_constants(N: int) -> DimConstants:
    if N < 5:
        raise DimensionError(f"dimension constants need N >= 5, got {N}")
    from .radial import energy_constant

    base = Fraction(N * (N - 4) ** 2 * (N - 2) * (N + 2), 2)
    return DimConstants(N, a_coeff(N), b_coeff(N), base, energy_constant(N))
