"""The bubble u0 = gamma (lam/(lam^2+|y-xi|^2))^{(N-4)/2} and its closed-form jets."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .errors import DimensionError, JetOrderError, ShapeError
from .scalars import FLOAT_DIGITS, dim_constants, gamma_N_flat

__all__ = [
    "BubbleParams",
    "BubbleJet",
    "FlatResidual",
    "bubble_gamma",
    "u0_value",
    "u0_jet",
    "u0_derivative",
    "bilaplacian",
    "flat_residual",
    "rescale",
    "ijkk_identity",
]

NORMALIZATIONS = ("flat", "printed", "unit")


@dataclass(frozen=True)
class BubbleParams:
    """Bubble data; ``scale`` says whether (lam, xi) live at x-scale or y = x/eps."""

    N: int
    lam: object = Fraction(1)
    xi: tuple = ()
    eps: object = Fraction(1)
    scale: str = "x"
    normalization: str = "flat"

    def __post_init__(self):
        if self.N < 5:
            raise DimensionError(f"bubble needs N >= 5, got {self.N}")
        xi = tuple(self.xi) if len(self.xi) else (Fraction(0),) * self.N
        if len(xi) != self.N:
            raise ShapeError(f"xi has length {len(xi)}, expected {self.N}")
        object.__setattr__(self, "xi", xi)
        if not self.lam > 0 or not self.eps > 0:
            raise ValueError("lam and eps must be positive")
        if self.scale not in ("x", "y"):
            raise ValueError("scale must be 'x' or 'y'")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")

    @property
    def a(self) -> Fraction:
        return Fraction(self.N - 4, 2)

    def in_config_set(self) -> bool:
        """|xi'| <= 1 and 1/2 < lam' < 3/2 (meaningful at y-scale)."""
        r2 = sum(x * x for x in self.xi)
        return r2 <= 1 and Fraction(1, 2) < self.lam < Fraction(3, 2)


def rescale(p: BubbleParams) -> BubbleParams:
    """Switch between x-scale (lam, xi) and y-scale (lam/eps, xi/eps)."""
    if p.scale == "x":
        return replace(p, lam=p.lam / p.eps, xi=tuple(x / p.eps for x in p.xi), scale="y")
    return replace(p, lam=p.lam * p.eps, xi=tuple(x * p.eps for x in p.xi), scale="x")


def bubble_gamma(N: int, normalization: str = "flat", dps: int = FLOAT_DIGITS):
    """gamma with gamma^{8/(N-4)} = 2N(N^2-4) ("flat"), the printed constant, or 1."""
    if normalization == "unit":
        return Fraction(1)
    if normalization == "flat":
        return gamma_N_flat(N, dps)
    if normalization == "printed":
        return dim_constants(N).gamma_N_printed(dps)
    raise ValueError(f"unknown normalization {normalization!r}")


def _exact_ok(p: BubbleParams, point) -> bool:
    rational = all(isinstance(v, (int, Fraction)) for v in (*point, *p.xi, p.lam))
    return rational and p.normalization == "unit" and p.a.denominator == 1


def _setup(point, p: BubbleParams, dps: int):
    """(z, D, c0, mode): c0 = gamma lam^a, so u0 = c0 D^{-a}."""
    if len(point) != p.N:
        raise ShapeError(f"point has length {len(point)}, expected {p.N}")
    if _exact_ok(p, point):
        z = [Fraction(y) - Fraction(x) for y, x in zip(point, p.xi)]
        D = Fraction(p.lam) ** 2 + sum(t * t for t in z)
        return z, D, Fraction(p.lam) ** int(p.a), "exact"
    mp = mpmath.mp
    z = [_mpf(y) - _mpf(x) for y, x in zip(point, p.xi)]
    lam = _mpf(p.lam)
    D = lam ** 2 + mpmath.fsum(t * t for t in z)
    g = bubble_gamma(p.N, p.normalization, dps)
    g = _mpf(g)
    return z, D, g * lam ** _mpf(p.a), "mp"


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _dpow(D, e, mode):
    """D^{-a-k} with e = a + k."""
    if mode == "exact":
        return Fraction(1) / D ** int(e)
    return D ** (-_mpf(e))


def _coeffs(p: BubbleParams, D, mode):
    """Scalar factors C_k = D^{-a-k} times the falling products of the jets."""
    a = p.a
    if mode == "mp":
        a = _mpf(a)
    P = [D and _dpow(D, p.a + k, mode) for k in range(5)]
    return a, P


def u0_value(point: Sequence, p: BubbleParams, dps: int = FLOAT_DIGITS):
    with mpmath.workdps(dps + 10):
        z, D, c0, mode = _setup(point, p, dps)
        return c0 * _dpow(D, p.a, mode)


def u0_derivative(point: Sequence, p: BubbleParams, idx: Sequence[int], dps: int = FLOAT_DIGITS):
    """A single partial derivative d_idx u0 (0-based indices, order <= 4)."""
    k = len(idx)
    if k > 4:
        raise JetOrderError(f"closed forms exist up to order 4, asked for {k}")
    with mpmath.workdps(dps + 10):
        z, D, c0, mode = _setup(point, p, dps)
        a, P = _coeffs(p, D, mode)
        return c0 * _entry(idx, z, a, P)


def _d(i, j):
    return 1 if i == j else 0


def _entry(idx, z, a, P):
    """Derivative of D^{-a} along idx from the closed recursions."""
    k = len(idx)
    if k == 0:
        return P[0]
    if k == 1:
        (i,) = idx
        return -2 * a * z[i] * P[1]
    if k == 2:
        i, j = idx
        return 4 * a * (a + 1) * z[i] * z[j] * P[2] - 2 * a * _d(i, j) * P[1]
    c3 = 8 * a * (a + 1) * (a + 2)
    if k == 3:
        i, j, s = idx
        return (-c3 * z[i] * z[j] * z[s] * P[3]
                + 4 * a * (a + 1) * (_d(i, j) * z[s] + _d(i, s) * z[j] + _d(j, s) * z[i]) * P[2])
    i, j, s, t = idx
    c4 = 16 * a * (a + 1) * (a + 2) * (a + 3)
    pairs = (_d(i, j) * z[s] * z[t] + _d(i, s) * z[j] * z[t] + _d(i, t) * z[j] * z[s]
             + _d(j, s) * z[i] * z[t] + _d(j, t) * z[i] * z[s] + _d(s, t) * z[i] * z[j])
    dd = _d(i, j) * _d(s, t) + _d(i, s) * _d(j, t) + _d(i, t) * _d(j, s)
    return (c4 * z[i] * z[j] * z[s] * z[t] * P[4] - c3 * pairs * P[3]
            + 4 * a * (a + 1) * dd * P[2])


@dataclass(frozen=True)
class BubbleJet:
    """u0 and its derivative tensors up to ``order`` (numpy arrays, object dtype when exact/mp)."""

    order: int
    value: object
    d1: np.ndarray | None = None
    d2: np.ndarray | None = None
    d3: np.ndarray | None = None
    d4: np.ndarray | None = None

    def tensor(self, k: int) -> np.ndarray:
        if k > self.order:
            raise JetOrderError(f"jet computed to order {self.order}, asked for {k}")
        return (self.value, self.d1, self.d2, self.d3, self.d4)[k]


def u0_jet(point: Sequence, p: BubbleParams, order: int = 4, dps: int = FLOAT_DIGITS,
           as_float: bool = False) -> BubbleJet:
    """All partial derivatives up to ``order`` from the closed forms.

    Exact Fractions when N is even, the normalization is "unit" and all inputs
    are rational; mpmath otherwise; ``as_float`` returns float64 arrays.
    """
    if not 0 <= order <= 4:
        raise JetOrderError(f"order must be in 0..4, got {order}")
    N = p.N
    with mpmath.workdps(dps + 10):
        z, D, c0, mode = _setup(point, p, dps)
        a, P = _coeffs(p, D, mode)
        if as_float:
            z = np.array([float(t) for t in z])
            a, P, c0 = float(a), [float(x) for x in P], float(c0)
            one = np.eye(N)
        else:
            z = np.array(z, dtype=object)
            one = np.eye(N, dtype=int).astype(object)
        out = [c0 * P[0]]
        if order >= 1:
            out.append(c0 * (-2 * a) * P[1] * z)
        if order >= 2:
            zz = np.multiply.outer(z, z)
            out.append(c0 * (4 * a * (a + 1) * P[2] * zz - 2 * a * P[1] * one))
        if order >= 3:
            zzz = np.multiply.outer(zz, z)
            dz = (np.einsum("ij,k->ijk", one, z) + np.einsum("ik,j->ijk", one, z)
                  + np.einsum("jk,i->ijk", one, z))
            c3 = 8 * a * (a + 1) * (a + 2)
            out.append(c0 * (-c3 * P[3] * zzz + 4 * a * (a + 1) * P[2] * dz))
        if order >= 4:
            zzzz = np.multiply.outer(zzz, z)
            pairs = sum(np.einsum(f"{s[0]}{s[1]},{s[2]},{s[3]}->ijkl", one, z, z)
                        for s in ("ijkl", "ikjl", "iljk", "jkil", "jlik", "klij"))
            dd = (np.einsum("ij,kl->ijkl", one, one) + np.einsum("ik,jl->ijkl", one, one)
                  + np.einsum("il,jk->ijkl", one, one))
            c4 = 16 * a * (a + 1) * (a + 2) * (a + 3)
            out.append(c0 * (c4 * P[4] * zzzz - c3 * P[3] * pairs + 4 * a * (a + 1) * P[2] * dd))
    return BubbleJet(order, *out)


def bilaplacian(point: Sequence, p: BubbleParams, dps: int = FLOAT_DIGITS):
    """Delta^2 u0 as the sum of the closed-form entries d_iijj u0."""
    with mpmath.workdps(dps + 10):
        z, D, c0, mode = _setup(point, p, dps)
        a, P = _coeffs(p, D, mode)
        total = 0
        for i in range(p.N):
            for j in range(p.N):
                total += _entry((i, i, j, j), z, a, P)
        return c0 * total


@dataclass(frozen=True)
class FlatResidual:
    bilaplacian: mpmath.mpf
    rhs: mpmath.mpf
    residual: mpmath.mpf
    relative: mpmath.mpf


def flat_residual(point: Sequence, p: BubbleParams, dps: int = FLOAT_DIGITS) -> FlatResidual:
    """Delta^2 u0 - (N-4)/2 u0^{(N+4)/(N-4)} and its size relative to the second term."""
    if p.normalization == "unit":
        raise ValueError("the flat equation fixes gamma; use 'flat' or 'printed'")
    with mpmath.workdps(dps + 10):
        lhs = _mpf(bilaplacian(point, p, dps))
        u = _mpf(u0_value(point, p, dps))
        rhs = mpmath.mpf(p.N - 4) / 2 * u ** (mpmath.mpf(p.N + 4) / (p.N - 4))
        res = lhs - rhs
        rel = abs(res) / abs(rhs)
    with mpmath.workdps(dps):
        return FlatResidual(+lhs, +rhs, +res, +rel)


def ijkk_identity(point: Sequence, p: BubbleParams, i: int, j: int, scale2=None,
                  dps: int = FLOAT_DIGITS) -> tuple:
    """Both sides of the auxiliary identity for u0 sum_k d_ijkk u0.

    ``scale2`` is the squared length in the last two denominators; the
    natural choice is lam^2 (the default).
    """
    N = p.N
    with mpmath.workdps(dps + 10):
        z, D, c0, mode = _setup(point, p, dps)
        a, P = _coeffs(p, D, mode)
        z = [_mpf(t) for t in z]
        a, D, c0, P = _mpf(a), _mpf(D), _mpf(c0), [_mpf(x) for x in P]
        u = c0 * P[0]
        d4 = sum(c0 * _entry((i, j, k, k), z, a, P) for k in range(N))
        lhs = u * d4
        # d_ijkk (u^2): u^2 is a bubble-type power with exponent 2a
        a2 = 2 * a
        P2 = [D ** (-(a2 + k)) for k in range(5)]
        d4u2 = sum(c0 ** 2 * _entry((i, j, k, k), z, a2, P2) for k in range(N))
        dij = c0 * _entry((i, j), z, a, P)
        dkk = sum(c0 * _entry((k, k), z, a, P) for k in range(N))
        s2 = _mpf(p.lam) ** 2 if scale2 is None else _mpf(scale2)
        r2 = mpmath.fsum(t * t for t in z)
        E = s2 + r2
        q = N * N - 4 * N + 8
        rhs = (mpmath.mpf(N) / ((N - 3) * q) * d4u2 + mpmath.mpf(N * N + 4 * N) / q * dij * dkk
               + mpmath.mpf(4 * (N - 4) ** 2 * (N - 2) * N) / q * u * u * r2 * _d(i, j) / E ** 3
               - mpmath.mpf(4 * (N - 4) ** 2 * (N * N - 2)) / q * u * u * _d(i, j) / E ** 2)
    with mpmath.workdps(dps):
        return +lhs, +rhs
