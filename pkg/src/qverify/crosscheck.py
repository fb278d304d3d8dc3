"""Independent numerical oracles: quadrature, Monte Carlo, finite differences.

Nothing here shares code paths with the exact routes it checks, apart from
the Weyl form itself.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np

from .errors import AccuracyError, DimensionError
from .scalars import a_coeff, b_coeff

__all__ = [
    "adaptive_radial_quad",
    "McEstimate",
    "mc_sphere",
    "sphere_integrand",
    "ScalingFit",
    "fit_exponent",
    "convolution_scaling",
    "convolution_log_case",
    "ball_scaling",
    "finite_difference",
    "FirstPrinciples",
    "first_principles_energy",
    "closed_form_energy",
]


# quadrature

def adaptive_radial_quad(integrand: Callable, tol: float = 1e-12, dps: int = 30,
                         max_degree: int = 10):
    """int_0^inf integrand(r) dr, split at r=1 with r -> 1/r on the tail.

    Raises AccuracyError when the error estimate stays above tol relative
    (or absolute, for tiny values) at the highest quadrature degree.
    """
    with mpmath.workdps(dps):
        def tail(t):
            return integrand(1 / t) / (t * t) if t else mpmath.mpf(0)

        val, err = None, None
        for deg in range(6, max_degree + 1):
            a, ea = mpmath.quad(integrand, [0, mpmath.mpf(1) / 2, 1], error=True, maxdegree=deg)
            b, eb = mpmath.quad(tail, [0, mpmath.mpf(1) / 2, 1], error=True, maxdegree=deg)
            val, err = a + b, ea + eb
            if err <= tol * max(abs(val), 1):
                return +val
        raise AccuracyError(f"quadrature error {mpmath.nstr(err, 3)} above tol {tol}")


# Monte Carlo on spheres

@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def agrees(self, exact: float, k: float = 3.0) -> bool:
        if self.stderr == 0:
            return math.isclose(self.mean, exact, rel_tol=1e-12, abs_tol=1e-300)
        return abs(self.mean - exact) <= k * self.stderr


def _batches(samples: int, batch: int):
    full, rest = divmod(samples, batch)
    return [batch] * full + ([rest] if rest else [])


def mc_sphere(N: int, samples: int, integrand: Callable[[np.ndarray], np.ndarray],
              seed: int = 0, batch: int = 100_000) -> McEstimate:
    """|S^{N-1}| times the sample mean of integrand over uniform unit vectors.

    ``integrand`` maps an (m, N) array of points to m values.  Batches get
    seeds spawned from ``seed`` so results do not depend on thread layout.
    """
    if N < 2:
        raise DimensionError("mc_sphere needs N >= 2")
    if samples < 1000:
        raise ValueError("mc_sphere needs at least 1000 samples")
    area = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    sizes = _batches(samples, batch)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    s1 = s2 = 0.0
    for m, ss in zip(sizes, seeds):
        rng = np.random.default_rng(ss)
        y = rng.standard_normal((m, N))
        y /= np.linalg.norm(y, axis=1, keepdims=True)
        v = np.asarray(integrand(y), dtype=float)
        s1 += float(v.sum())
        s2 += float((v * v).sum())
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    return McEstimate(area * mean, area * math.sqrt(var / samples), samples, seed)


def sphere_integrand(W, kind: str, p: int = 0, q: int = 0) -> Callable[[np.ndarray], np.ndarray]:
    """Float integrand of a sphere identity, built from H, dH, d2H directly."""
    Wf = W.to_float() if hasattr(W, "to_float") else np.asarray(W, float)
    # d2H[i, j, k, l] = d_k d_l H_ij = W_ikjl + W_iljk
    d2H = np.einsum("ikjl->ijkl", Wf) + np.einsum("iljk->ijkl", Wf)
    kinds = {"H^2": "H2", "(dH)^2": "dH2", "(d2H)^2": "d2H2", "H^2yy": "H2yy",
             "H_pt H_qt": "HptHqt", "(dH)^2yy": "dH2yy", "(d_pH)(d_qH)": "dpHdqH",
             "H(d_qH)y_p": "HdqHyp", "(d2H)^2yy": "d2H2yy"}
    kind = kinds.get(kind, kind)

    N = d2H.shape[0]
    G = d2H.reshape(N * N, N * N).T                  # (kl, ij)
    F = d2H.reshape(N ** 3, N)                       # dH_ijk(y) = F @ y
    Fp, Fq = d2H[:, :, p, :].reshape(N * N, N), d2H[:, :, q, :].reshape(N * N, N)
    c2 = float((d2H ** 2).sum())

    def H(y):
        # H_ij(y) flattened over ij
        yy = (y[:, :, None] * y[:, None, :]).reshape(len(y), N * N)
        return 0.5 * (yy @ G)

    def quad(M):
        return lambda y: ((y @ M) * y).sum(axis=1)

    def hpq(y):
        h = H(y).reshape(len(y), N, N)
        return (h[:, p, :] * h[:, q, :]).sum(axis=1)

    def hdq(y):
        return (H(y) * (y @ Fq.T)).sum(axis=1) * y[:, p]

    dH2 = quad(F.T @ F)
    table = {
        "H2": lambda y: (H(y) ** 2).sum(axis=1),
        "dH2": dH2,
        "d2H2": lambda y: np.full(len(y), c2),
        "H2yy": lambda y: (H(y) ** 2).sum(axis=1) * y[:, p] * y[:, q],
        "HptHqt": hpq,
        "dH2yy": lambda y: dH2(y) * y[:, p] * y[:, q],
        "dpHdqH": quad(Fp.T @ Fq),
        "HdqHyp": hdq,
        "d2H2yy": lambda y: c2 * y[:, p] * y[:, q],
    }
    if kind not in table:
        raise KeyError(f"unknown sphere identity kind {kind!r}")
    return table[kind]


# scaling fits

@dataclass(frozen=True)
class ScalingFit:
    abscissae: tuple
    values: tuple
    exponent: float
    residual: float
    stderrs: tuple = ()


def fit_exponent(xs: Sequence[float], ys: Sequence[float], stderrs: Sequence[float] = ()) -> ScalingFit:
    """Least squares of log y on log x; the two largest x carry double weight."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if len(xs) < 4:
        raise ValueError("a scaling fit needs at least 4 points")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("abscissae must be strictly increasing")
    if np.any(ys <= 0):
        raise ValueError("values must be positive")
    w = np.ones_like(xs)
    w[-2:] = 2.0
    A = np.stack([np.log(xs), np.ones_like(xs)], axis=1)
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], np.log(ys) * sw, rcond=None)
    res = float(np.sqrt(np.mean((A @ coef - np.log(ys)) ** 2)))
    return ScalingFit(tuple(xs), tuple(ys), float(coef[0]), res, tuple(stderrs))


def _sphere_dirs(rng, m: int, N: int) -> np.ndarray:
    d = rng.standard_normal((m, N))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _convolution_mc(N: int, s: float, t: float, x: np.ndarray, samples: int, rng) -> tuple[float, float]:
    """int |x-y|^{s-N} (1+|y|)^{-t} dy by a two-component importance mixture."""
    area = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    R = np.linalg.norm(x) / 2 + 1.0
    kappa = max((t - s) / 2, 0.25)
    r0 = 1.0
    m = samples
    pick = rng.random(m) < 0.5
    y = np.empty((m, N))
    # component 1: |x-y|^{s-N} on B(x, R), radius R U^{1/s}
    n1 = int(pick.sum())
    rho = R * rng.random(n1) ** (1.0 / s)
    y[pick] = x + rho[:, None] * _sphere_dirs(rng, n1, N)
    # component 2: Pareto-type radius about the origin
    n2 = m - n1
    r = r0 * (rng.random(n2) ** (-1.0 / kappa) - 1.0)
    y[~pick] = r[:, None] * _sphere_dirs(rng, n2, N)
    dx = np.linalg.norm(y - x, axis=1)
    ry = np.linalg.norm(y, axis=1)
    with np.errstate(divide="ignore"):
        q1 = np.where(dx < R, s * dx ** (s - N) / (area * R ** s), 0.0)
        p2 = kappa / r0 * (1 + ry / r0) ** (-kappa - 1)
        q2 = p2 / (area * ry ** (N - 1))
        f = dx ** (s - N) * (1 + ry) ** (-t)
    v = f / (0.5 * q1 + 0.5 * q2)
    v = v[np.isfinite(v)]
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def _grid_check(xs) -> np.ndarray:
    xs = np.asarray(xs, float)
    if len(xs) < 4 or xs[-1] / xs[0] < 100:
        raise ValueError("x-grid must have >= 4 points spanning at least 2 decades")
    return xs


def convolution_scaling(N: int, s: float, t: float, xs: Sequence[float] | None = None,
                        samples: int = 200_000, seed: int = 0) -> ScalingFit:
    """Fitted decay exponent of x -> int |x-y|^{s-N}(1+|y|)^{-t} dy along the first axis."""
    if not 0 < s < N or not t > s:
        raise ValueError("need 0 < s < N and t > s")
    xs = _grid_check(np.geomspace(30, 3000, 6) if xs is None else xs)
    seeds = np.random.SeedSequence(seed).spawn(len(xs))
    vals, errs = [], []
    for r, ss in zip(xs, seeds):
        x = np.zeros(N)
        x[0] = r
        v, e = _convolution_mc(N, s, t, x, samples, np.random.default_rng(ss))
        vals.append(v)
        errs.append(e)
    fit = fit_exponent(1 + xs, vals, errs)
    return fit


def convolution_log_case(N: int, s: float, xs: Sequence[float] | None = None,
                         samples: int = 200_000, seed: int = 0) -> tuple[ScalingFit, tuple]:
    """t = N case: ratios value / ((1+|x|)^{s-N}(1+log(1+|x|))) across the grid."""
    fit = convolution_scaling(N, s, N, xs, samples, seed)
    ratios = tuple(v / ((1 + x) ** (s - N) * (1 + math.log(1 + x)))
                   for x, v in zip(np.asarray(fit.abscissae) - 1, fit.values))
    return fit, ratios


def ball_scaling(N: int, s: float, k: float, rs: Sequence[float] | None = None,
                 y_norm: float = 1e5, samples: int = 200_000, seed: int = 0) -> ScalingFit:
    """Fitted r-exponent of int_{B_r} |y-z|^{s-N}(1+|z|)^{k-N} dz for |y| >> r."""
    if not 0 < s < N or not 0 < k < N:
        raise ValueError("need 0 < s, k < N")
    rs = _grid_check(np.geomspace(10, 1000, 6) if rs is None else rs)
    if y_norm < 10 * rs[-1]:
        raise ValueError("|y| must dominate the largest ball radius")
    area = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    y = np.zeros(N)
    y[0] = y_norm
    seeds = np.random.SeedSequence(seed).spawn(len(rs))
    vals, errs = [], []
    for r, ss in zip(rs, seeds):
        rng = np.random.default_rng(ss)
        # radius with density proportional to (1+rho)^{k-1} on [0, r]
        u = rng.random(samples)
        top = (1 + r) ** k - 1
        rho = (1 + u * top) ** (1 / k) - 1
        z = rho[:, None] * _sphere_dirs(rng, samples, N)
        q = k * (1 + rho) ** (k - 1) / top / (area * rho ** (N - 1))
        f = np.linalg.norm(y - z, axis=1) ** (s - N) * (1 + rho) ** (k - N)
        v = f / q
        vals.append(float(v.mean()))
        errs.append(float(v.std(ddof=1) / math.sqrt(samples)))
    return fit_exponent(rs, vals, errs)


# finite differences

def finite_difference(f: Callable, x: Sequence, idx: Sequence[int], h=None, dps: int = 60):
    """Nested central differences of f along idx, with one Richardson step.

    ``f`` takes a list of mpf coordinates.  Run at high precision so the
    truncation error dominates.
    """
    k = len(idx)
    with mpmath.workdps(dps):
        x = [mpmath.mpf(v) if not hasattr(v, "numerator") else mpmath.mpf(v.numerator) / v.denominator
             for v in x]
        h = mpmath.mpf(10) ** (-(dps // (2 * k + 4))) if h is None else mpmath.mpf(h)

        def nested(step):
            def rec(pt, rest):
                if not rest:
                    return f(pt)
                i = rest[0]
                up, dn = list(pt), list(pt)
                up[i] += step
                dn[i] -= step
                return (rec(up, rest[1:]) - rec(dn, rest[1:])) / (2 * step)
            return rec(x, list(idx))

        d1, d2 = nested(h), nested(h / 2)
        return (4 * d2 - d1) / 3


# first-principles reduced energy at small N

class _Expr:
    """Sparse sums of c * y^alpha * prod f^{(d)}(|y|^2) * D^{-j} * (lam/D)^{a*up}."""

    @staticmethod
    def add(*es):
        r = defaultdict(float)
        for e in es:
            for k, v in e.items():
                r[k] += v
        return {k: v for k, v in r.items() if v != 0}

    @staticmethod
    def scal(c, e):
        return {k: c * v for k, v in e.items()} if c else {}

    @staticmethod
    def mul(a, b):
        r = defaultdict(float)
        for (a1, f1, j1, u1), v1 in a.items():
            for (a2, f2, j2, u2), v2 in b.items():
                r[(tuple(x + y for x, y in zip(a1, a2)), tuple(sorted(f1 + f2)), j1 + j2, u1 + u2)] += v1 * v2
        return dict(r)


@dataclass(frozen=True)
class FirstPrinciples:
    N: int
    lam: float
    F0: mpmath.mpf
    hessian: dict        # (p, q) -> value
    alpha: float         # fitted coefficient of M_pq
    beta: float          # fitted coefficient of sum(W+W)^2 delta_pq
    fit_residual: float


def _default_profile():
    import sympy

    s = sympy.Symbol("s")
    g = (1 + sympy.Rational(3, 10) * s - sympy.Rational(1, 5) * s ** 2 + sympy.Rational(1, 50) * s ** 3) * sympy.exp(-s)
    return [sympy.lambdify(s, sympy.diff(g, s, k), "mpmath") for k in range(8)]


def first_principles_energy(W, lam=1, pairs=((0, 0), (1, 1), (0, 1), (2, 2), (1, 2)),
                            profile=None, dps: int = 30) -> FirstPrinciples:
    """F(0, lam) and its xi'-Hessian from the raw lemma integrands.

    Expands every product of derivatives of f(|y|^2) H(y) and of the bubble
    into monomials, integrates the angular part by exact moments and the
    radial part by quadrature.  ``profile`` gives f and its derivatives; the
    default is a decaying test profile so all integrals converge at small N.
    """
    Wf = np.asarray(W.to_float() if hasattr(W, "to_float") else W, dtype=float)
    N = Wf.shape[0]
    E = _Expr
    fders = profile or _default_profile()
    R = range(N)
    Z = (0,) * N
    with mpmath.workdps(dps):
        LAM = mpmath.mpf(lam)

        def diff(e, i):
            r = defaultdict(float)
            for (al, fd, j, up), v in e.items():
                if al[i]:
                    a2 = list(al)
                    a2[i] -= 1
                    r[(tuple(a2), fd, j, up)] += v * al[i]
                a2 = list(al)
                a2[i] += 1
                a2 = tuple(a2)
                for t in range(len(fd)):
                    fd2 = list(fd)
                    fd2[t] += 1
                    r[(a2, tuple(sorted(fd2)), j, up)] += 2 * v
                if up:
                    r[(a2, fd, j + 1, up)] += -(N - 4) * up * v
                if j:
                    r[(a2, fd, j + 1, up)] += -2 * j * v
            return {k: v for k, v in r.items() if v != 0}

        def hpoly(i, j):
            r = defaultdict(float)
            for p in R:
                for q in R:
                    if Wf[i, p, j, q]:
                        a = [0] * N
                        a[p] += 1
                        a[q] += 1
                        r[(tuple(a), (0,), 0, 0)] += Wf[i, p, j, q]
            return dict(r)

        @lru_cache(None)
        def Hd(i, j, idx):
            if not idx:
                return hpoly(i, j)
            return diff(Hd(i, j, idx[:-1]), idx[-1])

        def HD(i, j, *idx):
            return Hd(i, j, tuple(sorted(idx)))

        @lru_cache(None)
        def ud(idx):
            if not idx:
                return {(Z, (), 0, 1): 1.0}
            return diff(ud(idx[:-1]), idx[-1])

        def U(*idx):
            return ud(tuple(sorted(idx)))

        @lru_cache(None)
        def radial(deg, fd, j, up):
            def g(r):
                s = r * r
                D = LAM ** 2 + s
                v = r ** (deg + N - 1)
                for a in fd:
                    v *= fders[a](s)
                v *= (LAM / D) ** (mpmath.mpf(N - 4) / 2 * up)
                return v / D ** j
            return mpmath.quad(g, [0, 1, 4, mpmath.inf])

        @lru_cache(None)
        def mom(al):
            if any(a % 2 for a in al):
                return 0.0
            return float(2 * mpmath.fprod([mpmath.gamma(mpmath.mpf(a + 1) / 2) for a in al])
                         / mpmath.gamma(mpmath.mpf(sum(al) + N) / 2))

        def integ(e):
            grp = defaultdict(float)
            for (al, fd, j, up), v in e.items():
                m = mom(al)
                if m:
                    grp[(sum(al), fd, j, up)] += v * m
            return mpmath.fsum(v * radial(*k) for k, v in grp.items() if v)

        aN, bN = float(a_coeff(N)), float(b_coeff(N))
        terms = []
        for i in R:
            for j in R:
                K = E.add(*[E.mul(HD(i, l), HD(j, l)) for l in R])
                if K:
                    for k in R:
                        terms.append((-1.0, K, (i, k, k), (j,)))
        for i in R:
            for j in R:
                for s in R:
                    for t in R:
                        A = E.mul(HD(i, j), HD(s, t))
                        if A:
                            terms.append((1.0, A, (i, j), (s, t)))
        A = E.add(*[E.mul(HD(m, k, l), HD(m, k, l)) for l in R for m in R for k in R])
        for i in R:
            terms.append((-aN / 4, A, (i,), (i,)))
        for i in R:
            for j in R:
                A = E.add(*[E.mul(HD(m, s, j), HD(s, m, i)) for m in R for s in R])
                if A:
                    terms.append((-bN / 4, A, (i,), (j,)))
        for i in R:
            for j in R:
                for m in R:
                    A = E.add(*[E.add(E.mul(HD(m, s), HD(i, j, s)), E.scal(-1, E.mul(HD(s, i), HD(m, j, s))),
                                      E.mul(HD(s, j), HD(m, s, i)), E.scal(-1, E.mul(HD(m, s), HD(s, j, i))))
                                for s in R])
                    if A:
                        terms.append((-bN / 2, A, (i, m), (j,)))
                        terms.append((-bN / 2, A, (i,), (j, m)))
        for i in R:
            for j in R:
                A = E.add(*[E.mul(HD(i, s), HD(j, s, m, m)) for s in R for m in R])
                if A:
                    terms.append((bN / 2, A, (i,), (j,)))
        A = E.add(*[E.add(E.mul(HD(m, k, i, l), HD(m, k, i, l)), E.mul(HD(m, k, l), HD(m, k, i, i, l)))
                    for i in R for l in R for m in R for k in R])
        terms.append(((N - 4) / (8 * (N - 1)), A, (), ()))
        A = E.add(*[E.mul(HD(i, j, m, m), HD(i, j, s, s)) for i in R for j in R for m in R for s in R])
        terms.append((-(N - 4) / (4 * (N - 2) ** 2), A, (), ()))

        F0 = mpmath.fsum(c * integ(E.mul(A, E.mul(U(*P), U(*Q)))) for c, A, P, Q in terms)
        hess = {}
        for p, q in pairs:
            tot = []
            for c, A, P, Q in terms:
                B = E.add(E.mul(U(*P, p, q), U(*Q)), E.mul(U(*P, p), U(*Q, q)),
                          E.mul(U(*P, q), U(*Q, p)), E.mul(U(*P), U(*Q, p, q)))
                tot.append(c * integ(E.mul(A, B)))
            hess[(p, q)] = mpmath.fsum(tot)

    Z2 = Wf + Wf.transpose(0, 3, 2, 1)
    M = np.einsum("ikjp,ikjq->pq", Z2, Z2)
    QW = float((Z2 ** 2).sum())
    rows = np.array([[M[p, q], 1.0 * (p == q)] for p, q in hess])
    rhs = np.array([float(v) for v in hess.values()])
    sol, res, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    resid = float(np.sqrt(res[0])) if len(res) else 0.0
    return FirstPrinciples(N, float(lam), F0, hess, float(sol[0]), float(sol[1] / QW), resid)


def closed_form_energy(N: int, W, lam=1, profile=None, dps: int = 30) -> tuple:
    """(F0, alpha, beta) from the closed radial forms with a general profile f.

    Same normalisation as first_principles_energy, so the two can be compared
    at small N where the quartic f would make the integrals diverge.
    """
    Wf = np.asarray(W.to_float() if hasattr(W, "to_float") else W, dtype=float)
    fders = profile or _default_profile()
    n = N
    aN, bN = float(a_coeff(N)), float(b_coeff(N))
    Z2 = Wf + Wf.transpose(0, 3, 2, 1)
    QW = float((Z2 ** 2).sum())
    with mpmath.workdps(dps):
        L = mpmath.mpf(lam)
        area = 2 * mpmath.pi ** (mpmath.mpf(N) / 2) / mpmath.gamma(mpmath.mpf(N) / 2)

        def f(k):
            return lambda s: fders[k](s)

        f0, f1, f2, f3 = f(0), f(1), f(2), f(3)

        def rad(P, k, m):
            return mpmath.quad(lambda r: P(r * r) * r ** k / (L ** 2 + r * r) ** m, [0, 1, 4, mpmath.inf])

        A_ = lambda s: s * f1(s) ** 2 + 2 * f0(s) * f1(s)
        B_ = lambda s: (s * f1(s) + f0(s)) ** 2
        C_ = lambda s: s * f1(s) ** 2 + f0(s) * f1(s)
        D_ = lambda s: s * f0(s) * f1(s) + f0(s) ** 2
        E7 = lambda s: (3 * (n + 8) * f1(s) ** 2 + 4 * s ** 2 * f2(s) ** 2 + 2 * (n + 18) * s * f1(s) * f2(s)
                        + 2 * (n + 8) * f0(s) * f2(s) + 4 * s * f0(s) * f3(s) + 4 * s ** 2 * f1(s) * f3(s))
        E8 = lambda s: 4 * s * f1(s) ** 2 + (n + 8) * f0(s) * f1(s) + 2 * s * f0(s) * f2(s)
        E9 = lambda s: ((n + 4) * f1(s) + 2 * s * f2(s)) ** 2
        ff = lambda s: f0(s) ** 2
        Fterms = [(-aN * (n - 4) / (n * (n + 2)), A_, n + 5, n - 2), (-aN * (n - 4) / (2 * n), ff, n + 3, n - 2),
                  (-bN * (n - 4) / (n * (n + 2)), B_, n + 3, n - 2),
                  (1 / (2 * n * (n - 1) * (n + 2)), E7, n + 3, n - 4), (1 / (2 * n * (n - 1)), E8, n + 1, n - 4),
                  (1 / (4 * (n - 1)), ff, n - 1, n - 4), (-1 / (n * (n - 2) ** 2 * (n + 2)), E9, n + 3, n - 4)]
        F0 = (n - 4) / mpmath.mpf(2) * area * QW * L ** (n - 4) * mpmath.fsum(c * rad(P, k, m) for c, P, k, m in Fterms)
        Ml = [(-(n - 2), ff, [(n, 5, 0), (-(n + 2), 3, -1)]),
              (-8 * aN * (n - 2) / (n + 4), A_, [(n - 1, 7, 0), (-2, 5, -1)]),
              (-2 * aN * (n - 2), ff, [(n - 1, 5, 0), (-2, 3, -1)]),
              (-8 * bN * (n - 1) * (n - 2) / (n + 4), B_, [(1, 5, 0)]), (16 * bN * (n - 2) / (n + 4), C_, [(1, 5, -1)]),
              (4 * bN * (n - 2), D_, [(1, 3, -1)]), (-4 * bN / (n + 4), lambda s: f1(s) ** 2, [(1, 5, -2)]),
              (-bN * (n + 2) / 2, ff, [(1, 1, -2)]), (-2 * bN, lambda s: f0(s) * f1(s), [(1, 3, -2)]),
              (bN, lambda s: (n + 4) * f0(s) * f1(s) + 2 * s * f0(s) * f2(s), [(1, 3, -2)]),
              (4 * (n - 3) / ((n - 1) * (n + 4)), E7, [(1, 5, -2)]), (2 * (n - 3) / (n - 1), E8, [(1, 3, -2)]),
              (-8 * (n - 3) / ((n - 2) ** 2 * (n + 4)), E9, [(1, 5, -2)])]
        Ql = [(-aN / (n + 4), A_, [(2 * (n - 1) * (n - 2), 7, 0), (-(n - 2) * (n + 8), 5, -1), (n + 4, 3, -2)]),
              (-aN / 2, ff, [(2 * (n - 1) * (n - 2), 5, 0), (-(n - 2) * (n + 6), 3, -1), (n + 2, 1, -2)]),
              (-bN * (n - 2) / (n + 4), B_, [(2 * (n - 1), 5, 0), (-(n + 4), 3, -1)]),
              (4 * bN * (n - 2) / (n + 4), C_, [(1, 5, -1)]), (-bN / (n + 4), lambda s: f1(s) ** 2, [(1, 5, -2)]),
              (1 / (2 * (n - 1) * (n + 4)), E7, [(2 * (n - 3), 5, -2), (-(n + 4), 3, -3)]),
              (1 / (2 * (n - 1)), E8, [(2 * (n - 3), 3, -2), (-(n + 2), 1, -3)]),
              ((n + 2) / (4 * (n - 1)), ff, [(2 * (n - 3), 1, -2), (-n, -1, -3)]),
              (-1 / ((n - 2) ** 2 * (n + 4)), E9, [(2 * (n - 3), 5, -2), (-(n + 4), 3, -3)])]

        def ev(lst):
            return mpmath.fsum(c * mpmath.fsum(cc * rad(P, n + k, n + m) for cc, k, m in ks) for c, P, ks in lst)

        pre = mpmath.mpf((n - 4) ** 2) / (n * (n + 2)) * area * L ** (n - 4)
        return F0, pre * ev(Ml), pre * ev(Ql)
