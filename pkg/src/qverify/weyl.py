"""Weyl-symmetric rank-4 forms, the quadratic field H(y), and sphere integrals.

Index convention: ``W[i, k, j, l]`` is antisymmetric in the slot pairs
(0, 1) and (2, 3), symmetric under the pair swap, satisfies the first
Bianchi identity in the last three slots, and is trace free over slots
(0, 2).  Indices are 0-based in the API.

Entries are stored as an integer numerator array (dtype object, so that
products never overflow) over one common positive denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Sequence

import numpy as np

from .errors import DimensionError, ShapeError, UnsupportedIdentityError
from .scalars import SymScalar, as_fraction

__all__ = [
    "WeylForm",
    "project_weyl",
    "h_matrix",
    "h_matrix_float",
    "weyl_quad_norm",
    "m_matrix",
    "random_weyl",
    "default_weyl",
    "sphere_moment",
    "SPHERE_KINDS",
    "SphereIntegral",
    "sphere_quadratic_integral",
    "sphere_quadratic_matrix",
]


def _perm(t: np.ndarray, src: str, dst: str = "abcd") -> np.ndarray:
    """Return X with X[dst] = t[src], e.g. _perm(t, 'acdb')[a,b,c,d] = t[a,c,d,b]."""
    return t.transpose([src.index(ch) for ch in dst])


def _to_int_array(raw) -> tuple[np.ndarray, int]:
    """Scale a rational array to (integer object array, denominator)."""
    arr = np.asarray(raw, dtype=object)
    fr = np.vectorize(as_fraction, otypes=[object])(arr) if arr.size else arr
    den = reduce(math.lcm, (x.denominator for x in fr.flat), 1)
    num = np.vectorize(lambda x: int(x * den), otypes=[object])(fr) if arr.size else arr
    return num, den


def _kn(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Kulkarni-Nomizu type product h_ac g_bd + h_bd g_ac - h_ad g_bc - h_bc g_ad."""
    t1 = h[:, None, :, None] * g[None, :, None, :]
    t2 = g[:, None, :, None] * h[None, :, None, :]
    t3 = h[:, None, None, :] * g[None, :, :, None]
    t4 = g[:, None, None, :] * h[None, :, :, None]
    return t1 + t2 - t3 - t4


@dataclass(frozen=True, eq=False)
class WeylForm:
    """Exact rank-4 form ``num / den`` with the Weyl symmetries.

    Construct through :func:`project_weyl`; the constructor only checks
    shape, the predicates below check the symmetry class.
    """

    dim: int
    num: np.ndarray
    den: int = 1

    def __post_init__(self):
        num = np.asarray(self.num, dtype=object)
        if num.shape != (self.dim,) * 4:
            raise ShapeError(f"expected shape {(self.dim,) * 4}, got {num.shape}")
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        num = num.copy()
        num.flags.writeable = False
        object.__setattr__(self, "num", num)

    @property
    def entries(self) -> np.ndarray:
        """Entries as Fractions (object array)."""
        d = self.den
        return np.vectorize(lambda x: Fraction(x, d), otypes=[object])(self.num)

    def to_float(self) -> np.ndarray:
        return self.num.astype(float) / self.den

    def __eq__(self, other):
        if not isinstance(other, WeylForm) or other.dim != self.dim:
            return NotImplemented
        # cross-multiplied comparison, exact
        return bool(np.all(self.num * other.den == other.num * self.den))

    def __hash__(self):
        return hash((self.dim, self.den, tuple(self.num.flat)))

    def scale(self, c) -> "WeylForm":
        c = as_fraction(c)
        return WeylForm(self.dim, self.num * c.numerator, self.den * c.denominator)

    def is_zero(self) -> bool:
        return not any(self.num.flat)

    # invariant predicates
    def is_antisymmetric(self) -> bool:
        n = self.num
        return bool(np.all(n == -_perm(n, "bacd")) and np.all(n == -_perm(n, "abdc")))

    def has_pair_symmetry(self) -> bool:
        return bool(np.all(self.num == _perm(self.num, "cdab")))

    def satisfies_bianchi(self) -> bool:
        n = self.num
        return not np.any(n + _perm(n, "acdb") + _perm(n, "adbc"))

    def is_trace_free(self) -> bool:
        return not np.any(np.einsum("abad->bd", self.num))

    def is_valid(self) -> bool:
        return (self.is_antisymmetric() and self.has_pair_symmetry()
                and self.satisfies_bianchi() and self.is_trace_free())


def project_weyl(raw, dim: int | None = None) -> WeylForm:
    """Orthogonal projection of a rank-4 rational array onto the Weyl class.

    Steps: average over the order-8 symmetry group, remove the totally
    antisymmetric part (Bianchi), then remove traces by the Ricci
    decomposition.  All arithmetic is exact.
    """
    arr = np.asarray(raw, dtype=object)
    N = arr.shape[0] if dim is None else dim
    if arr.shape != (N,) * 4:
        raise ShapeError(f"raw tensor must have shape {(N,) * 4}, got {arr.shape}")
    if N < 4:
        raise DimensionError(f"Weyl class is trivial for N={N} < 4")
    t, d0 = _to_int_array(arr)

    t = t - _perm(t, "bacd")
    t = t - _perm(t, "abdc")
    t = t + _perm(t, "cdab")            # scale 8
    t = 3 * t - (t + _perm(t, "acdb") + _perm(t, "adbc"))   # scale 24
    ric = np.einsum("abad->bd", t)
    scal = sum(ric[i, i] for i in range(N))
    g = np.eye(N, dtype=int).astype(object)
    w = 2 * (N - 1) * (N - 2) * t - 2 * (N - 1) * _kn(ric, g) + scal * _kn(g, g)
    den = d0 * 48 * (N - 1) * (N - 2)
    common = reduce(math.gcd, (int(x) for x in w.flat), den)
    if common > 1:
        w = np.vectorize(lambda x: x // common, otypes=[object])(w)
        den //= common
    return WeylForm(N, w, den)


def random_weyl(N: int, seed: int, low: int = -9, high: int = 9) -> WeylForm:
    """Projection of a seeded random integer tensor with entries in [low, high]."""
    rng = np.random.default_rng(seed)
    raw = rng.integers(low, high + 1, size=(N,) * 4).astype(object)
    return project_weyl(raw, N)


def default_weyl(N: int) -> WeylForm:
    """Projection of the tensor with a single 1 at (1,2,1,2) (0-based (0,1,0,1))."""
    raw = np.zeros((N,) * 4, dtype=int).astype(object)
    raw[0, 1, 0, 1] = 1
    return project_weyl(raw, N)


def _y_int(y: Sequence, N: int) -> tuple[np.ndarray, int]:
    if len(y) != N:
        raise ShapeError(f"vector of length {len(y)} does not match dimension {N}")
    return _to_int_array(list(y))


def h_matrix(W: WeylForm, y: Sequence) -> np.ndarray:
    """H(y)_ij = sum_pq W_ipjq y_p y_q as an exact Fraction matrix."""
    yn, dy = _y_int(y, W.dim)
    t = np.tensordot(W.num, yn, axes=([3], [0]))      # [i, p, j]
    h = np.tensordot(t, yn, axes=([1], [0]))          # [i, j]
    den = W.den * dy * dy
    return np.vectorize(lambda x: Fraction(x, den), otypes=[object])(h)


def h_matrix_float(W: WeylForm | np.ndarray, y: np.ndarray) -> np.ndarray:
    """Float evaluation of H(y); ``y`` may carry leading batch axes."""
    w = W.to_float() if isinstance(W, WeylForm) else W
    return np.einsum("ipjq,...p,...q->...ij", w, y, y)


def _sym_part(W: WeylForm) -> np.ndarray:
    """Integer array of W_ikjl + W_iljk (the form entering every sphere integral)."""
    return W.num + _perm(W.num, "adcb")


def weyl_quad_norm(W: WeylForm) -> Fraction:
    """Q_W = sum (W_ikjl + W_iljk)^2."""
    z = _sym_part(W)
    return Fraction(int(np.sum(z * z)), W.den ** 2)


def m_matrix(W: WeylForm) -> np.ndarray:
    """M_pq = sum_ikj (W_ikjp + W_ipjk)(W_ikjq + W_iqjk); Gram matrix, trace = Q_W."""
    N = W.dim
    z = _sym_part(W).reshape(N ** 3, N)
    m = z.T.dot(z)
    d2 = W.den ** 2
    return np.vectorize(lambda x: Fraction(int(x), d2), otypes=[object])(m)


# ---------------------------------------------------------------------------
# sphere integrals

def sphere_moment(N: int, alpha: Sequence[int]) -> SymScalar:
    """int_{S^{N-1}} y^alpha, with the sphere area kept symbolic."""
    if any(a % 2 for a in alpha):
        return SymScalar(0)
    num = 1
    for a in alpha:
        num *= math.prod(range(a - 1, 0, -2))      # (a-1)!!
    deg = sum(alpha)
    den = math.prod(N + 2 * j for j in range(deg // 2))
    return SymScalar(Fraction(num, den), 0, 1, N)


# (coefficient, factors, y-labels, output labels); T = W_ipjq + W_iqjp
# carries a factor 2 relative to the symmetrised form, absorbed below.
_KIND_SPECS = {
    "H2": (Fraction(1, 4), ("iajb", "icjd"), "abcd", ""),
    "dH2": (Fraction(1), ("ikja", "ikjb"), "ab", ""),
    "d2H2": (Fraction(1), ("ikjl", "ikjl"), "", ""),
    "H2yy": (Fraction(1, 4), ("iajb", "icjd"), "abcdpq", "pq"),
    "HptHqt": (Fraction(1, 4), ("patb", "qctd"), "abcd", "pq"),
    "dH2yy": (Fraction(1), ("ikja", "ikjb"), "abpq", "pq"),
    "dpHdqH": (Fraction(1), ("ipja", "iqjb"), "ab", "pq"),
    "HdqHyp": (Fraction(1, 2), ("iajb", "iqjc"), "abcp", "pq"),
    "d2H2yy": (Fraction(1), ("ikjl", "ikjl"), "pq", "pq"),
}

SPHERE_KINDS = tuple(_KIND_SPECS)

_KIND_ALIASES = {
    "H^2": "H2", "(dH)^2": "dH2", "(d2H)^2": "d2H2", "H^2yy": "H2yy",
    "H_pt H_qt": "HptHqt", "(dH)^2yy": "dH2yy", "(d_pH)(d_qH)": "dpHdqH",
    "H(d_qH)y_p": "HdqHyp", "(d2H)^2yy": "d2H2yy",
}


def _resolve_kind(kind: str) -> str:
    k = _KIND_ALIASES.get(kind, kind)
    if k not in _KIND_SPECS:
        raise UnsupportedIdentityError(f"unknown sphere identity kind {kind!r}")
    return k


def _pairings(labels: str):
    if not labels:
        yield []
        return
    a = labels[0]
    for i in range(1, len(labels)):
        rest = labels[1:i] + labels[i + 1:]
        for p in _pairings(rest):
            yield [(a, labels[i])] + p


def _contract_pairing(t: np.ndarray, factors, pairs, out: str, N: int) -> np.ndarray:
    """Contract the factor network after identifying paired y-labels."""
    rename = {}
    deltas = []
    for a, b in pairs:
        if a in out and b in out:
            deltas.append((a, b))
        elif b in out:
            rename[a] = b
        else:
            rename[b] = a
    subs = ["".join(rename.get(ch, ch) for ch in f) for f in factors]
    delta_labels = {ch for d in deltas for ch in d}
    rest_out = "".join(ch for ch in out if ch not in delta_labels)
    res = np.einsum(",".join(subs) + "->" + rest_out, *([t] * len(subs)))
    if not out:
        return res
    shaped = np.zeros((N,) * len(out), dtype=object)
    for idx in product(range(N), repeat=len(out)):
        env = dict(zip(out, idx))
        if any(env[a] != env[b] for a, b in deltas):
            continue
        sub = tuple(env[ch] for ch in rest_out)
        shaped[idx] = res[sub] if sub else res
    return shaped


def _pairing_route(W: WeylForm, kind: str) -> tuple[np.ndarray, Fraction]:
    """Integer-array value and Fraction scale (times |S|) via pair contractions."""
    coeff, factors, ylab, out = _KIND_SPECS[kind]
    N = W.dim
    t = _sym_part(W)
    total = None
    for pairs in _pairings(ylab):
        term = _contract_pairing(t, factors, pairs, out, N)
        total = term if total is None else total + term
    m = len(ylab) // 2
    den = math.prod(N + 2 * j for j in range(m)) * W.den ** 2
    return np.asarray(total, dtype=object), coeff / den


# --- monomial route: explicit polynomials in y --------------------------------

def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return out


def _poly_add(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0) + scale * c
    return out


def _unit(N: int, i: int) -> tuple:
    return tuple(1 if k == i else 0 for k in range(N))


def _monomial_tables(W: WeylForm):
    """Integer polynomials for H_ij, d_k H_ij and d_kl H_ij (common den W.den)."""
    N = W.dim
    n = W.num
    zero = (0,) * N
    H = {}
    dH = {}
    d2H = {}
    for i in range(N):
        for j in range(N):
            poly: dict = {}
            for p in range(N):
                for q in range(N):
                    c = n[i, p, j, q]
                    if c:
                        e = tuple(a + b for a, b in zip(_unit(N, p), _unit(N, q)))
                        poly[e] = poly.get(e, 0) + c
            H[i, j] = {e: c for e, c in poly.items() if c}
            for k in range(N):
                lin: dict = {}
                for q in range(N):
                    c = n[i, k, j, q] + n[i, q, j, k]
                    if c:
                        lin[_unit(N, q)] = lin.get(_unit(N, q), 0) + c
                dH[k, i, j] = lin
                for l in range(N):
                    c = n[i, k, j, l] + n[i, l, j, k]
                    d2H[k, l, i, j] = {zero: c} if c else {}
    return H, dH, d2H


def _integrate_poly(poly: dict, N: int) -> SymScalar:
    total = SymScalar(0)
    for e, c in poly.items():
        if c:
            total = total + sphere_moment(N, e) * c
    return total


def _monomial_route(W: WeylForm, kind: str) -> np.ndarray:
    """Matrix (or 1x1) of SymScalar values, integrands expanded into monomials."""
    N = W.dim
    H, dH, d2H = _monomial_tables(W)
    d2 = W.den ** 2
    yp = [{_unit(N, p): 1} for p in range(N)]

    def sq_sum(table, keys):
        acc: dict = {}
        for key in keys:
            acc = _poly_add(acc, _poly_mul(table[key], table[key]))
        return acc

    ij = [(i, j) for i in range(N) for j in range(N)]
    kij = [(k, i, j) for k in range(N) for i in range(N) for j in range(N)]
    klij = [(k, l, i, j) for k in range(N) for l in range(N) for i in range(N) for j in range(N)]

    def integ(poly):
        return _integrate_poly(poly, N) / d2

    if kind == "H2":
        return np.array([[integ(sq_sum(H, ij))]], dtype=object)
    if kind == "dH2":
        return np.array([[integ(sq_sum(dH, kij))]], dtype=object)
    if kind == "d2H2":
        return np.array([[integ(sq_sum(d2H, klij))]], dtype=object)

    out = np.empty((N, N), dtype=object)
    base = None
    if kind == "H2yy":
        base = sq_sum(H, ij)
    elif kind == "dH2yy":
        base = sq_sum(dH, kij)
    elif kind == "d2H2yy":
        base = sq_sum(d2H, klij)
    for p in range(N):
        for q in range(N):
            if base is not None:
                poly = _poly_mul(_poly_mul(base, yp[p]), yp[q])
            elif kind == "HptHqt":
                poly = {}
                for t in range(N):
                    poly = _poly_add(poly, _poly_mul(H[p, t], H[q, t]))
            elif kind == "dpHdqH":
                poly = {}
                for i, j in ij:
                    poly = _poly_add(poly, _poly_mul(dH[p, i, j], dH[q, i, j]))
            elif kind == "HdqHyp":
                poly = {}
                for i, j in ij:
                    poly = _poly_add(poly, _poly_mul(H[i, j], dH[q, i, j]))
                poly = _poly_mul(poly, yp[p])
            else:  # pragma: no cover - guarded by _resolve_kind
                raise UnsupportedIdentityError(kind)
            out[p, q] = integ(poly)
    return out


# --- closed forms -------------------------------------------------------------

def _closed_form(W: WeylForm, kind: str) -> np.ndarray:
    """Right-hand sides: rational multiples of M_pq and Q_W delta_pq (times |S|)."""
    N = W.dim
    Qw = weyl_quad_norm(W)
    c_m, c_q = {
        "H2": (None, Fraction(1, 2 * N * (N + 2))),
        "dH2": (None, Fraction(1, N)),
        "d2H2": (None, Fraction(1)),
        "H2yy": (Fraction(2, N * (N + 2) * (N + 4)), Fraction(1, 2 * N * (N + 2) * (N + 4))),
        "HptHqt": (Fraction(1, 2 * N * (N + 2)), Fraction(0)),
        "dH2yy": (Fraction(2, N * (N + 2)), Fraction(1, N * (N + 2))),
        "dpHdqH": (Fraction(1, N), Fraction(0)),
        "HdqHyp": (Fraction(1, N * (N + 2)), Fraction(0)),
        "d2H2yy": (Fraction(0), Fraction(1, N)),
    }[kind]
    if c_m is None:
        return np.array([[c_q * Qw]], dtype=object)
    M = m_matrix(W)
    out = M * c_m
    for p in range(N):
        out[p, p] += c_q * Qw
    return out


@dataclass(frozen=True)
class SphereIntegral:
    kind: str
    p: int | None
    q: int | None
    lhs: SymScalar
    rhs: SymScalar

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs


def _to_sym(x, N: int) -> SymScalar:
    if isinstance(x, SymScalar):
        return x
    return SymScalar(as_fraction(x), 0, 1, N)


def sphere_quadratic_matrix(W: WeylForm, kind: str, method: str = "auto"):
    """Full (lhs, rhs) matrices of SymScalars (1x1 for scalar kinds)."""
    kind = _resolve_kind(kind)
    N = W.dim
    if method == "auto":
        method = "monomial" if N <= 8 else "pairing"
    if method == "monomial":
        lhs = _monomial_route(W, kind)
    elif method == "pairing":
        arr, scale = _pairing_route(W, kind)
        arr = np.asarray(arr, dtype=object).reshape((1, 1) if arr.ndim == 0 else arr.shape)
        lhs = np.vectorize(lambda x: _to_sym(Fraction(int(x)) * scale, N), otypes=[object])(arr)
    else:
        raise ValueError(f"unknown method {method!r}")
    rhs = np.vectorize(lambda x: _to_sym(x, N), otypes=[object])(_closed_form(W, kind))
    lhs = np.vectorize(lambda x: _to_sym(x, N), otypes=[object])(lhs)
    return lhs, rhs


def sphere_quadratic_integral(W: WeylForm, kind: str, p: int | None = None,
                              q: int | None = None, method: str = "auto") -> SphereIntegral:
    """Both sides of one sphere identity; for matrix kinds select entry (p, q)."""
    kind = _resolve_kind(kind)
    lhs, rhs = sphere_quadratic_matrix(W, kind, method)
    if lhs.shape == (1, 1):
        return SphereIntegral(kind, None, None, lhs[0, 0], rhs[0, 0])
    p = 0 if p is None else p
    q = p if q is None else q
    if not (0 <= p < W.dim and 0 <= q < W.dim):
        raise ShapeError(f"index ({p}, {q}) out of range for N={W.dim}")
    return SphereIntegral(kind, p, q, lhs[p, q], rhs[p, q])
