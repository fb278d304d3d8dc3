"""Pointwise curvature of g = e^h for the explicit perturbation h.

Exact jets of h come from the product rule on f(|x|^2/eps^2) H(x).  The
curvature quantities use jax autodiff in float64.  Differences from the
flat case, such as (P_g - Delta^2) u, are formed from k = e^{-h} - I
directly so that nothing of size O(1) cancels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache, partial
from itertools import combinations
from typing import Callable, Sequence

import jax
import jax.numpy as jnp
import numpy as np

from .errors import AccuracyError, JetOrderError, ShapeError
from .radial import FPoly
from .scalars import a_coeff, as_fraction, b_coeff
from .weyl import WeylForm

jax.config.update("jax_enable_x64", True)

__all__ = [
    "MetricField",
    "h_derivative",
    "h_jet",
    "MetricPoint",
    "metric_at",
    "metric_exact",
    "jet_norms",
    "CurvaturePoint",
    "curvature_at",
    "leading_terms",
    "paneitz_apply",
    "paneitz_difference",
    "bubble_function",
    "BubbleSum",
    "constant_function",
    "residual_at",
    "ResidualProfile",
    "residual_profile",
    "series_order",
]

SERIES_TOL = 1e-30


@dataclass(frozen=True)
class MetricField:
    """h = mu eps^8 f(|x|^2/eps^2) H(x) chi(|x|), chi = 1 on |x| <= rho and 0 for |x| >= 1.

    With ``scale='y'`` points are y = x/eps and h~(y) = h(eps y).
    """

    W: WeylForm
    mu: Fraction = Fraction(1, 1000)
    eps: Fraction = Fraction(1, 2)
    rho: Fraction = Fraction(1, 2)
    alpha: Fraction = Fraction(1)
    tau: Fraction = Fraction(0)
    f: FPoly = field(default_factory=FPoly)
    scale: str = "x"

    def __post_init__(self):
        for name in ("mu", "eps", "rho", "alpha", "tau"):
            v = getattr(self, name)
            object.__setattr__(self, name, Fraction(v) if isinstance(v, float) else as_fraction(v))
        if not (0 <= self.mu <= 1 and 0 < self.eps <= self.rho < 1):
            raise ValueError("need 0 <= mu <= 1 and 0 < eps <= rho < 1")
        if self.scale not in ("x", "y"):
            raise ValueError("scale must be 'x' or 'y'")

    @property
    def N(self) -> int:
        return self.W.dim

    def f_coeffs(self) -> tuple:
        return (self.tau, self.f.c1, self.f.c2, self.f.c3, self.f.c4)

    def in_exact_region(self, x) -> bool:
        r2 = sum(Fraction(v) ** 2 if not isinstance(v, float) else v * v for v in x)
        lim = self.rho / self.eps if self.scale == "y" else self.rho
        return r2 <= lim * lim

    def with_scale(self, scale: str) -> "MetricField":
        return replace(self, scale=scale)

    def params(self) -> dict:
        """Float parameters for the jax kernels; W is passed as its nonzero entries."""
        Wf = self.W.to_float()
        nz = np.nonzero(Wf)
        return {
            "Widx": tuple(jnp.asarray(a) for a in nz),
            "Wval": jnp.asarray(Wf[nz]),
            "c": jnp.asarray([float(c) for c in self.f_coeffs()]),
            "mu": float(self.mu),
            "eps": float(self.eps),
            "rho": float(self.rho),
            "yscale": 1.0 if self.scale == "y" else 0.0,
        }


# exact jets

def _f_derivs(field: MetricField, s) -> list:
    """F^{(k)}(s) for F(s) = mu eps^8 f(s/eps^2), k = 0..4."""
    c = field.f_coeffs()
    t = s / field.eps ** 2
    out = []
    for k in range(5):
        # k-th derivative of f at t
        val = sum(c[d] * math.perm(d, k) * t ** (d - k) for d in range(k, 5))
        out.append(field.mu * field.eps ** (8 - 2 * k) * val)
    return out


def _radial_entry(Fd: list, x, idx) -> object:
    """d_idx F(|x|^2) by the partial-pairing formula."""
    n = len(idx)
    total = 0

    def rec_single(free, val, npairs):
        nonlocal total
        if not free:
            total += Fd[n - npairs] * val
            return
        rec_inner(free, val, npairs)

    def rec_pair(free, val, npairs):
        nonlocal total
        if not free:
            total += Fd[n - npairs] * val
            return
        rec_inner(free, val, npairs)

    def rec_inner(free, val, npairs):
        first, rest = free[0], free[1:]
        rec_single(rest, val * 2 * x[idx[first]], npairs)
        for j, other in enumerate(rest):
            if idx[first] == idx[other]:
                rec_pair(rest[:j] + rest[j + 1:], val * 2, npairs + 1)

    if n == 0:
        return Fd[0]
    rec_inner(list(range(n)), 1, 0)
    return total


def _H_entry(Wn, x, idx) -> np.ndarray:
    """d_idx H(x) as an N x N matrix (object or float)."""
    k = len(idx)
    if k == 0:
        return np.einsum("ipjq,p,q->ij", Wn, x, x)
    if k == 1:
        a = idx[0]
        return np.einsum("ijq,q->ij", Wn[:, a, :, :], x) + np.einsum("ipj,p->ij", Wn[:, :, :, a], x)
    if k == 2:
        a, b = idx
        return Wn[:, a, :, b] + Wn[:, b, :, a]
    return np.zeros(Wn.shape[:1] * 2, dtype=Wn.dtype)


def h_derivative(field: MetricField, x: Sequence, idx: Sequence[int]) -> np.ndarray:
    """Exact d_idx h(x) (0-based indices, order <= 4) inside the region where chi = 1."""
    if len(idx) > 4:
        raise JetOrderError("h jets are provided up to order 4")
    N = field.N
    if len(x) != N:
        raise ShapeError(f"point has length {len(x)}, expected {N}")
    if not field.in_exact_region(x):
        raise ValueError("exact jets are only available where the cutoff equals 1")
    x = [as_fraction(v) for v in x]
    scale = 1
    if field.scale == "y":
        scale = field.eps ** len(idx)
        x = [v * field.eps for v in x]
    Wn = field.W.entries
    s = sum(v * v for v in x)
    Fd = _f_derivs(field, s)
    xo = np.array(x, dtype=object)
    out = np.zeros((N, N), dtype=object)
    n = len(idx)
    for r in range(n + 1):
        for sub in combinations(range(n), r):
            rest = [idx[i] for i in range(n) if i not in sub]
            if len(rest) > 2:
                continue
            phi = _radial_entry(Fd, x, [idx[i] for i in sub])
            if phi:
                out = out + phi * _H_entry(Wn, xo, rest)
    return out * scale


def h_jet(field: MetricField, x: Sequence, order: int = 2) -> dict:
    """{sorted multi-index: d h} for all multi-indices of order <= ``order``."""
    from itertools import combinations_with_replacement

    out = {}
    for k in range(order + 1):
        for idx in combinations_with_replacement(range(field.N), k):
            out[idx] = h_derivative(field, x, idx)
    return out


# jax kernels

def _blend(r2, rho):
    """C^4 step: 1 for r <= rho, 0 for r >= 1."""
    safe = jnp.where(r2 > 0, r2, 1.0)
    r = jnp.sqrt(safe)
    t = jnp.clip((r - rho) / (1 - rho), 0.0, 1.0)
    s9 = t ** 5 * (126 - 420 * t + 540 * t ** 2 - 315 * t ** 3 + 70 * t ** 4)
    return jnp.where(r2 <= rho * rho, 1.0, 1.0 - s9)


def _h(p, y):
    x = jnp.where(p["yscale"] > 0, p["eps"] * y, y)
    r2 = x @ x
    t = r2 / p["eps"] ** 2
    c = p["c"]
    fval = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])))
    i, q1, j, q2 = p["Widx"]
    N = x.shape[0]
    H = jnp.zeros((N, N)).at[i, j].add(p["Wval"] * x[q1] * x[q2])
    return p["mu"] * p["eps"] ** 8 * fval * H * _blend(r2, p["rho"])


def _em1(A, K: int):
    """e^A - I by the truncated series."""
    term, acc = A, A
    for k in range(2, K + 1):
        term = term @ A / k
        acc = acc + term
    return acc


def series_order(norm: float, tol: float = SERIES_TOL) -> int:
    """Smallest K whose dropped tail is below tol * |h| (relative to the first term)."""
    if norm > 1:
        raise AccuracyError(f"|h| = {norm:.3g} > 1: exponential series not certified")
    if norm == 0:
        return 4
    # tail after K terms <= 2 |h|^{K+1}/(K+1)! for |h| <= 1
    K = 1
    while 2 * norm ** K / math.factorial(K + 1) >= tol:
        K += 1
    # round up so nearby points share compiled kernels
    return 4 * math.ceil(K / 4)


def _kernels(K: int):
    def gm1(p, y):
        return _em1(_h(p, y), K)

    def km1(p, y):
        return _em1(-_h(p, y), K)

    def christoffel(p, y):
        ginv = jnp.eye(y.shape[0]) + km1(p, y)
        dg = jax.jacfwd(gm1, argnums=1)(p, y)       # [i, j, m] = d_m g_ij
        # t[m, k, l] = d_l g_mk + d_k g_ml - d_m g_kl
        t = dg + dg.transpose(0, 2, 1) - dg.transpose(2, 0, 1)
        return 0.5 * jnp.einsum("im,mkl->ikl", ginv, t)

    def ricci(p, y):
        G = christoffel(p, y)
        dG = jax.jacfwd(christoffel, argnums=1)(p, y)   # [m, i, j, n] = d_n Gamma^m_ij
        return jnp.einsum("mjim->ij", dG) - jnp.einsum("mjl,lmi->ij", G, G)

    def scalar(p, y):
        ginv = jnp.eye(y.shape[0]) + km1(p, y)
        return jnp.einsum("ij,ij->", ginv, ricci(p, y))

    def scalar_alt(p, y):
        # S = -d_i d_j g^{ij} + g^{ij} Gamma^m_jl Gamma^l_im when det g = 1
        def div(p, y):
            return jnp.einsum("ijj->i", jax.jacfwd(km1, argnums=1)(p, y))
        dd = jnp.trace(jax.jacfwd(div, argnums=1)(p, y))
        ginv = jnp.eye(y.shape[0]) + km1(p, y)
        G = christoffel(p, y)
        return -dd + jnp.einsum("ij,mjl,lim->", ginv, G, G)

    def lap_g(fn):
        def out(p, y):
            ginv = jnp.eye(y.shape[0]) + km1(p, y)
            V = lambda q, z: (jnp.eye(z.shape[0]) + km1(q, z)) @ jax.grad(fn, argnums=1)(q, z)
            return jnp.trace(jax.jacfwd(V, argnums=1)(p, y))
        return out

    def curvature(p, y):
        N = y.shape[0]
        g = jnp.eye(N) + gm1(p, y)
        ginv = jnp.eye(N) + km1(p, y)
        G = christoffel(p, y)
        Ric = ricci(p, y)
        S = jnp.einsum("ij,ij->", ginv, Ric)
        dS = lap_g(scalar)(p, y)
        ric2 = jnp.einsum("ia,jb,ij,ab->", ginv, ginv, Ric, Ric)
        c2 = (N ** 3 - 4 * N ** 2 + 16 * N - 16) / (8 * (N - 1) ** 2 * (N - 2) ** 2)
        Q = -dS / (2 * (N - 1)) + c2 * S ** 2 - 2 * ric2 / (N - 2) ** 2
        return {"g": g, "ginv": ginv, "Gamma": G, "Ric": Ric, "S": S, "S_alt": scalar_alt(p, y),
                "DeltaS": dS, "Q": Q, "h": _h(p, y)}

    def paneitz_diff(p, y, u, ab):
        """(P_g - Delta^2) u at y for det g = 1."""
        N = y.shape[0]
        aN, bN = ab

        def K_of(v):
            def kv(q, z):
                w = lambda q2, z2: km1(q2, z2) @ jax.grad(v, argnums=1)(q2, z2)
                return jnp.trace(jax.jacfwd(w, argnums=1)(q, z))
            return kv

        def lap(v):
            return lambda q, z: jnp.trace(jax.hessian(v, argnums=1)(q, z))

        uu = lambda q, z: u(z)
        Ku = K_of(uu)
        d1 = lap(Ku)(p, y)
        d2 = K_of(lap(uu))(p, y)
        d3 = K_of(Ku)(p, y)

        def flux(q, z):
            ginv = jnp.eye(N) + km1(q, z)
            g = jnp.eye(N) + gm1(q, z)
            Ric = ricci(q, z)
            S = jnp.einsum("ij,ij->", ginv, Ric)
            T = aN * S * g + bN * Ric
            return ginv @ T @ ginv @ jax.grad(uu, argnums=1)(q, z)

        divT = jnp.trace(jax.jacfwd(flux, argnums=1)(p, y))
        Q = curvature(p, y)["Q"]
        return d1 + d2 + d3 - divT + (N - 4) / 2 * Q * u(y)

    return {
        "gm1": jax.jit(gm1), "km1": jax.jit(km1), "h": jax.jit(_h),
        "curvature": jax.jit(curvature),
        "paneitz_diff": paneitz_diff,
    }


kernels = lru_cache(maxsize=32)(_kernels)


def _order_for(field: MetricField, y) -> int:
    hv = np.asarray(kernels(2)["h"](field.params(), jnp.asarray(y, dtype=float)))
    return series_order(float(np.linalg.norm(hv, 2)))


# public API

@dataclass(frozen=True)
class MetricPoint:
    g: np.ndarray
    ginv: np.ndarray
    det: float
    identity_error: float
    series_terms: int


def metric_at(field: MetricField, x: Sequence) -> MetricPoint:
    """g = e^h and g^{-1} = e^{-h} by the certified truncated series."""
    y = jnp.asarray([float(v) for v in x])
    K = _order_for(field, y)
    kk = kernels(K)
    p = field.params()
    g = np.eye(field.N) + np.asarray(kk["gm1"](p, y))
    gi = np.eye(field.N) + np.asarray(kk["km1"](p, y))
    err = float(np.abs(g @ gi - np.eye(field.N)).max())
    return MetricPoint(g, gi, float(np.linalg.det(g)), err, K)


def metric_exact(field: MetricField, x: Sequence, tol: float = SERIES_TOL) -> tuple:
    """(g, g^{-1}) as Fraction matrices by the truncated series, tail below ``tol`` in norm."""
    h = h_derivative(field, x, ())
    norm = math.sqrt(float(sum(v * v for v in h.flat)))
    if norm > 1:
        raise AccuracyError(f"|h| = {norm:.3g} > 1: exponential series not certified")
    N = field.N
    one = np.eye(N, dtype=int).astype(object) * Fraction(1)
    g, gi = one.copy(), one.copy()
    term_p, term_m = one.copy(), one.copy()
    k = 0
    # tail after the k-th term is at most 2 |h|^{k+1}/(k+1)!
    while k == 0 or 2 * norm ** (k + 1) / math.factorial(k + 1) >= tol:
        k += 1
        term_p = term_p.dot(h) / k
        term_m = term_m.dot(-h) / k
        g, gi = g + term_p, gi + term_m
    return g, gi


def jet_norms(field: MetricField, x: Sequence, order: int = 2) -> tuple:
    """Max-entry norms of h and its derivatives up to ``order`` (autodiff, any branch)."""
    y = jnp.asarray([float(v) for v in x])
    p = field.params()
    fn = lambda z: _h(p, z)
    out = []
    for _ in range(order + 1):
        out.append(float(jnp.abs(fn(y)).max()))
        fn = jax.jacfwd(fn)
    return tuple(out)


@dataclass(frozen=True)
class CurvaturePoint:
    x: tuple
    g: np.ndarray
    ginv: np.ndarray
    Gamma: np.ndarray
    Ric: np.ndarray
    S: float
    S_alt: float     # -d_i d_j g^{ij} + g^{ij} Gamma Gamma, independent of Ric
    DeltaS: float
    Q: float
    jet_order: int = 4

    @property
    def trace_consistency(self) -> float:
        return float(abs(np.einsum("ij,ij->", self.ginv, self.Ric) - self.S))


def curvature_at(field: MetricField, x: Sequence, order: int = 4) -> CurvaturePoint:
    """Christoffel symbols, Ricci, scalar and Q-curvature at one point."""
    if order < 4:
        raise JetOrderError("Q needs metric jets of order 4")
    y = jnp.asarray([float(v) for v in x])
    if y.shape[0] != field.N:
        raise ShapeError(f"point has length {y.shape[0]}, expected {field.N}")
    K = _order_for(field, y)
    out = kernels(K)["curvature"](field.params(), y)
    o = {k: np.asarray(v) for k, v in out.items()}
    return CurvaturePoint(tuple(float(v) for v in x), o["g"], o["ginv"], o["Gamma"], o["Ric"],
                          float(o["S"]), float(o["S_alt"]), float(o["DeltaS"]), float(o["Q"]))


def leading_terms(field: MetricField, x: Sequence) -> dict:
    """The printed leading-order expressions for Ric, S, Delta S and Q from exact jets of h."""
    N = field.N
    J = {}
    from itertools import product

    def d(idx):
        key = tuple(sorted(idx))
        if key not in J:
            J[key] = np.asarray(h_derivative(field, x, key), dtype=float)
        return J[key]

    d1 = np.stack([d((l,)) for l in range(N)])                        # [l, m, k]
    d2 = np.array([[d((i, l)) for l in range(N)] for i in range(N)])   # [i, l, m, k]
    lap = sum(d2[m, m] for m in range(N))
    d3 = np.array([sum(d((i, i, l)) for i in range(N)) for l in range(N)])  # [l, m, k] = d_iil h
    ric = -0.5 * lap
    S = -0.25 * float((d1 ** 2).sum())
    dS = -0.5 * float((d2 ** 2).sum()) - 0.5 * float((d1 * d3).sum())
    Q = (float((d2 ** 2).sum()) + float((d1 * d3).sum())) / (4 * (N - 1)) \
        - float((lap * lap).sum()) / (2 * (N - 2) ** 2)
    return {"Ric": ric, "S": S, "DeltaS": dS, "Q": Q}


@dataclass(frozen=True)
class BubbleSum:
    """u(y) = const + sum_k c_k gamma_k (lam_k/(lam_k^2+|y-xi_k|^2))^{(N-4)/2}.

    Parameters enter the compiled kernels as traced arrays, so every member of
    the family with the same number of terms shares one compilation.
    """

    N: int
    terms: tuple = ()        # (c, gamma, lam, xi)
    const: float = 0.0

    def arrays(self):
        t = self.terms or ((0.0, 0.0, 1.0, (0.0,) * self.N),)
        return (jnp.asarray([c * g for c, g, _, _ in t], dtype=float),
                jnp.asarray([lam for _, _, lam, _ in t], dtype=float),
                jnp.asarray([xi for _, _, _, xi in t], dtype=float),
                jnp.asarray(self.const, dtype=float))

    def __call__(self, y):
        return _bubble_sum(self.arrays(), (self.N - 4) / 2, y)

    def _check(self, other: BubbleSum) -> None:
        if not isinstance(other, BubbleSum) or other.N != self.N:
            raise TypeError("can only combine bubble sums of the same dimension")

    def __add__(self, other):
        self._check(other)
        return BubbleSum(self.N, self.terms + other.terms, self.const + other.const)

    def __mul__(self, k):
        k = float(k)
        return BubbleSum(self.N, tuple((k * c, g, lam, xi) for c, g, lam, xi in self.terms), k * self.const)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other


def _bubble_sum(arr, a, y):
    cg, lam, xi, const = arr
    z = y[None, :] - xi
    return const + jnp.sum(cg * (lam / (lam ** 2 + jnp.sum(z * z, axis=1))) ** a)


def constant_function(N: int, c: float = 1.0) -> BubbleSum:
    """The constant c as a member of the bubble family."""
    return BubbleSum(N, (), float(c))


def paneitz_difference(field: MetricField, u: Callable, x: Sequence) -> float:
    """(P_g - Delta^2) u at x; ``u`` is a BubbleSum or any jax-traceable scalar function."""
    y = jnp.asarray([float(v) for v in x])
    K = _order_for(field, y)
    N = field.N
    ab = (float(a_coeff(N)), float(b_coeff(N)))
    if isinstance(u, BubbleSum):
        return float(_paneitz_family_jit(K)(field.params(), y, ab, u.arrays(), (N - 4) / 2))
    fn = _paneitz_jit(K, u)
    return float(fn(field.params(), y, ab))


@lru_cache(maxsize=64)
def _paneitz_jit(K: int, u: Callable):
    kk = kernels(K)
    return jax.jit(lambda p, y, ab: kk["paneitz_diff"](p, y, u, ab))


@lru_cache(maxsize=32)
def _paneitz_family_jit(K: int):
    kk = kernels(K)

    def run(p, y, ab, arr, a):
        return kk["paneitz_diff"](p, y, partial(_bubble_sum, arr, a), ab)

    return jax.jit(run, static_argnums=4)


def _bilap(u: Callable, y):
    lap = lambda z: jnp.trace(jax.hessian(u)(z))
    return jnp.trace(jax.hessian(lap)(y))


@partial(jax.jit, static_argnums=1)
def _bilap_family(arr, a, y):
    return _bilap(partial(_bubble_sum, arr, a), y)


def paneitz_apply(field: MetricField, u: Callable, x: Sequence) -> float:
    """P_g u(x) = Delta^2 u + (P_g - Delta^2) u with every derivative from autodiff."""
    y = jnp.asarray([float(v) for v in x])
    if isinstance(u, BubbleSum):
        flat = float(_bilap_family(u.arrays(), (u.N - 4) / 2, y))
    else:
        flat = float(jax.jit(partial(_bilap, u))(y))
    return flat + paneitz_difference(field, u, x)


@lru_cache(maxsize=64)
def bubble_function(N: int, lam: float = 1.0, xi: tuple | None = None, gamma: float | None = None) -> BubbleSum:
    """gamma (lam/(lam^2+|y-xi|^2))^{(N-4)/2} (flat normalisation by default)."""
    from .scalars import gamma_N_flat

    g = float(gamma_N_flat(N)) if gamma is None else float(gamma)
    c = tuple(float(v) for v in xi) if xi is not None else (0.0,) * N
    if len(c) != N:
        raise ValueError(f"xi has length {len(c)}, expected {N}")
    return BubbleSum(N, ((1.0, g, float(lam), c),))


def residual_at(field: MetricField, u: Callable, y: Sequence) -> float:
    """R(y) = P_g u - (N-4)/2 u^{(N+4)/(N-4)} for the bubble u.

    The flat bubble equation holds identically, so R = (P_g - Delta^2) u.
    """
    return paneitz_difference(field, u, y)


@dataclass(frozen=True)
class ResidualProfile:
    N: int
    radii: tuple
    values: tuple
    eps_pair: tuple
    eps_values: tuple
    eps_ratio: float
    slope: float
    fit_residual: float


def residual_profile(field: MetricField, xi: Sequence[float], radii: Sequence[float],
                     direction: Sequence[float] | None = None, probe: Sequence[float] | None = None,
                     lam: float = 1.0) -> ResidualProfile:
    """|R| along a ray through xi' and its eps-halving ratio at a probe point."""
    from .crosscheck import fit_exponent

    if not len(radii):
        raise ValueError("empty sample")
    if field.scale != "y":
        field = field.with_scale("y")
    N = field.N
    xi = tuple(float(v) for v in xi)
    u = bubble_function(N, lam, xi)
    e = np.zeros(N)
    e[0] = 1.0
    if direction is not None:
        e = np.asarray(direction, float)
        e /= np.linalg.norm(e)
    lim = float(field.rho / field.eps)
    pts = [np.asarray(xi) + r * e for r in radii]
    if any(np.linalg.norm(p) > lim for p in pts):
        raise ValueError("sample points must satisfy |y| <= rho/eps")
    vals = [abs(residual_at(field, u, p)) for p in pts]
    probe = np.asarray(probe if probe is not None else np.asarray(xi) + 3 * e, float)
    f2 = replace(field, eps=field.eps / 2)
    r1 = residual_at(field, u, probe)
    r2 = residual_at(f2, u, probe)
    fit = fit_exponent([1 + r for r in radii], vals)
    return ResidualProfile(N, tuple(radii), tuple(vals), (float(field.eps), float(f2.eps)),
                           (r1, r2), abs(r1 / r2) if r2 else float("inf"), fit.exponent, fit.residual)
