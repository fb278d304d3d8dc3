"""Reduced energy F(0, lambda'), its Hessian, the parameter tau and the sign table.

Everything is exact until the sign decisions, which involve the square root
of an integer and are settled by interval arithmetic with precision
escalation (an exact surd-sign routine is provided as an oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce

import mpmath

from .errors import DimensionError, NoRealRootError, PoleError
from .radial import DEFAULT_C1, FPoly, RPoly, poly_radial_integral
from .scalars import SymScalar, a_coeff, b_coeff, gamma_ratio, sphere_area
from .taupoly import TauPoly
from .transcripts import printed_taupoly, printed_value
from .weyl import WeylForm, m_matrix, weyl_quad_norm

__all__ = [
    "paper_I",
    "paper_J1",
    "paper_J2",
    "f0_prefactor",
    "hessian_prefactor",
    "DerivedEnergy",
    "LemmaTerm",
    "DerivedHessian",
    "assemble_F0",
    "assemble_F0_from_lemmas",
    "assemble_hessian",
    "TauQuadratic",
    "TauSolution",
    "solve_tau",
    "surd_sign",
    "interval_sign",
    "RootCheck",
    "CriticalPointReport",
    "verify_lemma81",
    "HessianResult",
    "hessian_matrix",
    "ScanResult",
    "scan_F0",
    "GluingReport",
    "gluing_schedule_check",
    "gluing_decreasing_from",
]

SIGN_PRECISIONS = (64, 128, 256)
MIN_N = 25


def _require_n(N: int, what: str) -> None:
    if N < MIN_N:
        raise DimensionError(f"{what} needs N >= {MIN_N}, got {N}")


# printed closed forms

def paper_I(N: int) -> TauPoly:
    """Printed I(lambda') at dimension N."""
    return printed_taupoly("I", N)


def paper_J1(N: int) -> TauPoly:
    return printed_taupoly("J1", N)


def paper_J2(N: int) -> TauPoly:
    return printed_taupoly("J2", N)


def f0_prefactor(N: int) -> SymScalar:
    """(N-4)/(16(N^2-4)) Gamma(N/2-9) Gamma(N/2+7)/Gamma(N+1).

    F(0, lambda') = f0_prefactor * |S^{N-1}| * sum (W+W)^2 * I(lambda').
    """
    if N <= 18:
        raise PoleError(f"Gamma(N/2-9) has a pole at N={N}")
    g = gamma_ratio([Fraction(N, 2) - 9, Fraction(N, 2) + 7], [N + 1])
    return g * Fraction(N - 4, 16 * (N * N - 4))


def hessian_prefactor(N: int) -> SymScalar:
    """(N-4)^2/(32N(N-2)(N-1)(N+2)(N+4)) Gamma(N/2-7) Gamma(N/2+5)/Gamma(N+1)."""
    if N <= 14:
        raise PoleError(f"Gamma(N/2-7) has a pole at N={N}")
    g = gamma_ratio([Fraction(N, 2) - 7, Fraction(N, 2) + 5], [N + 1])
    return g * Fraction((N - 4) ** 2, 32 * N * (N - 2) * (N - 1) * (N + 2) * (N + 4))


# radial building blocks

@dataclass(frozen=True)
class _Radial:
    """f and its s-derivatives as RPoly, plus the recurring combinations."""

    N: int
    f: RPoly
    f1: RPoly
    f2: RPoly
    f3: RPoly

    @classmethod
    def build(cls, N: int, fpoly: FPoly) -> "_Radial":
        f = fpoly.rpoly()
        return cls(N, f, f.d(), f.d(2), f.d(3))

    @property
    def s(self) -> RPoly:
        return RPoly.s()

    def integ(self, P: RPoly, k: int, m: int) -> TauPoly:
        return poly_radial_integral(P, k, m, self.N)

    # E7, E8, E9 of the second-derivative lemmas
    def e7(self) -> RPoly:
        n, s, f, f1, f2, f3 = self.N, self.s, self.f, self.f1, self.f2, self.f3
        return (3 * (n + 8) * f1 * f1 + 4 * s * s * f2 * f2 + 2 * (n + 18) * s * f1 * f2
                + 2 * (n + 8) * f * f2 + 4 * s * f * f3 + 4 * s * s * f1 * f3)

    def e8(self) -> RPoly:
        n, s, f, f1, f2 = self.N, self.s, self.f, self.f1, self.f2
        return 4 * s * f1 * f1 + (n + 8) * f * f1 + 2 * s * f * f2

    def e9(self) -> RPoly:
        g = (self.N + 4) * self.f1 + 2 * self.s * self.f2
        return g * g


def _combine(R: _Radial, groups) -> TauPoly:
    """sum_c c * sum_(cc,k,m) cc * int P r^k/(lam^2+r^2)^m."""
    total = None
    for c, P, kernels in groups:
        for cc, k, m in kernels:
            term = R.integ(P, k, m).scale(Fraction(c) * Fraction(cc))
            total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class DerivedEnergy:
    """Derived I(lambda') with F(0,lambda') = prefactor * |S| * sum (W+W)^2 * poly."""

    N: int
    poly: TauPoly
    prefactor: SymScalar
    c1: Fraction
    terms: tuple = ()


@dataclass(frozen=True)
class LemmaTerm:
    """One lemma's xi'=0 value, in units of |S| sum (W+W)^2 lambda'^{N-4}."""

    name: str
    weight: Fraction
    value: TauPoly | None
    vanishes: bool = False
    reason: str = ""


def _brace_F0(R: _Radial) -> TauPoly:
    N = R.N
    aN, bN = a_coeff(N), b_coeff(N)
    s, f, f1, f2 = R.s, R.f, R.f1, R.f2
    groups = [
        (-aN * (N - 4) / Fraction(N * (N + 2)), s * f1 * f1 + 2 * f * f1, [(1, N + 5, N - 2)]),
        (-aN * (N - 4) / Fraction(2 * N), f * f, [(1, N + 3, N - 2)]),
        (-bN * (N - 4) / Fraction(N * (N + 2)), (s * f1 + f) ** 2, [(1, N + 3, N - 2)]),
        (Fraction(1, 2 * N * (N - 1) * (N + 2)), R.e7(), [(1, N + 3, N - 4)]),
        (Fraction(1, 2 * N * (N - 1)), R.e8(), [(1, N + 1, N - 4)]),
        (Fraction(1, 4 * (N - 1)), f * f, [(1, N - 1, N - 4)]),
        (Fraction(-1, N * (N - 2) ** 2 * (N + 2)), R.e9(), [(1, N + 3, N - 4)]),
    ]
    return _combine(R, groups)


def assemble_F0(N: int, c1=DEFAULT_C1, tau_slot: bool = True) -> DerivedEnergy:
    """Derived I(lambda') from the closed radial form of F(0, lambda')."""
    _require_n(N, "assemble_F0")
    R = _Radial.build(N, FPoly(c1=c1, tau_slot=tau_slot))
    pref = f0_prefactor(N)
    F = _brace_F0(R).shift(N - 4).scale(Fraction(N - 4, 2))
    return DerivedEnergy(N, F.divide(pref), pref, Fraction(c1))


def _lemma_terms(R: _Radial) -> list[LemmaTerm]:
    N = R.N
    aN, bN = a_coeff(N), b_coeff(N)
    s, f, f1, f2 = R.s, R.f, R.f1, R.f2
    k4 = Fraction((N - 4) ** 2)
    L3 = (R.integ(s * f1 * f1 + 2 * f * f1, N + 5, N - 2).scale(2 * k4 / (N * (N + 2)))
          + R.integ(f * f, N + 3, N - 2).scale(k4 / N))
    L4 = R.integ((s * f1 + f) ** 2, N + 3, N - 2).scale(2 * k4 / (N * (N + 2)))
    L7 = (R.integ(R.e7(), N + 3, N - 4).scale(Fraction(2, N * (N + 2)))
          + R.integ(R.e8(), N + 1, N - 4).scale(Fraction(2, N))
          + R.integ(f * f, N - 1, N - 4))
    g = 2 * (N + 4) * f1 + 4 * s * f2
    L8 = R.integ(g * g, N + 3, N - 4).scale(Fraction(1, 2 * N * (N + 2)))
    return [
        LemmaTerm("HH d3u du cross term", Fraction(-1), None, True,
                  "odd in y at xi'=0"),
        LemmaTerm("H d2u H d2u term", Fraction(1), None, True,
                  "odd in y at xi'=0"),
        LemmaTerm("a_N |dh|^2 |du|^2", -aN / 4, L3),
        LemmaTerm("b_N (dh du)^2", -bN / 4, L4),
        LemmaTerm("b_N commutator bracket", -bN / 2, None, True,
                  "bracket vanishes identically"),
        LemmaTerm("b_N mixed term", bN / 2, None, True, "vanishes at xi'=0"),
        LemmaTerm("Delta_g S_g u^2", Fraction(N - 4, 8 * (N - 1)), L7),
        LemmaTerm("(d2 h)^2 u^2", Fraction(-(N - 4), 4 * (N - 2) ** 2), L8),
    ]


def assemble_F0_from_lemmas(N: int, c1=DEFAULT_C1) -> DerivedEnergy:
    """Derived I(lambda') rebuilt from the individual lemma values at xi'=0.

    The w-bar contribution is dropped because w vanishes on xi'=0.
    """
    _require_n(N, "assemble_F0_from_lemmas")
    R = _Radial.build(N, FPoly(c1=c1))
    terms = _lemma_terms(R)
    total = TauPoly.zero(dim=N)
    for t in terms:
        if t.value is not None:
            total = total + t.value.scale(t.weight)
    pref = f0_prefactor(N)
    return DerivedEnergy(N, total.shift(N - 4).divide(pref), pref, Fraction(c1), tuple(terms))


@dataclass(frozen=True)
class DerivedHessian:
    """d^2F/dxi'_p dxi'_q (0,lambda') = prefactor |S| (J1 M_pq + J2 sum(W+W)^2 delta_pq)."""

    N: int
    J1: TauPoly
    J2: TauPoly
    prefactor: SymScalar
    mixed_zero: bool = True


def _hessian_groups(R: _Radial):
    N = R.N
    aN, bN = a_coeff(N), b_coeff(N)
    n = Fraction(N)
    s, f, f1, f2 = R.s, R.f, R.f1, R.f2
    A = s * f1 * f1 + 2 * f * f1
    B = (s * f1 + f) ** 2
    C = s * f1 * f1 + f * f1
    D = s * f * f1 + f * f
    E7, E8, E9 = R.e7(), R.e8(), R.e9()
    M = [
        (-(n - 2), f * f, [(n, N + 5, N), (-(n + 2), N + 3, N - 1)]),
        (-8 * aN * (n - 2) / (n + 4), A, [(n - 1, N + 7, N), (-2, N + 5, N - 1)]),
        (-2 * aN * (n - 2), f * f, [(n - 1, N + 5, N), (-2, N + 3, N - 1)]),
        (-8 * bN * (n - 1) * (n - 2) / (n + 4), B, [(1, N + 5, N)]),
        (16 * bN * (n - 2) / (n + 4), C, [(1, N + 5, N - 1)]),
        (4 * bN * (n - 2), D, [(1, N + 3, N - 1)]),
        (-4 * bN / (n + 4), f1 * f1, [(1, N + 5, N - 2)]),
        (-bN * (n + 2) / 2, f * f, [(1, N + 1, N - 2)]),
        (-2 * bN, f * f1, [(1, N + 3, N - 2)]),
        (bN, (N + 4) * f * f1 + 2 * s * f * f2, [(1, N + 3, N - 2)]),
        (4 * (n - 3) / ((n - 1) * (n + 4)), E7, [(1, N + 5, N - 2)]),
        (2 * (n - 3) / (n - 1), E8, [(1, N + 3, N - 2)]),
        (-8 * (n - 3) / ((n - 2) ** 2 * (n + 4)), E9, [(1, N + 5, N - 2)]),
    ]
    Q = [
        (-aN / (n + 4), A, [(2 * (n - 1) * (n - 2), N + 7, N), (-(n - 2) * (n + 8), N + 5, N - 1),
                            (n + 4, N + 3, N - 2)]),
        (-aN / 2, f * f, [(2 * (n - 1) * (n - 2), N + 5, N), (-(n - 2) * (n + 6), N + 3, N - 1),
                          (n + 2, N + 1, N - 2)]),
        (-bN * (n - 2) / (n + 4), B, [(2 * (n - 1), N + 5, N), (-(n + 4), N + 3, N - 1)]),
        (4 * bN * (n - 2) / (n + 4), C, [(1, N + 5, N - 1)]),
        (-bN / (n + 4), f1 * f1, [(1, N + 5, N - 2)]),
        (1 / (2 * (n - 1) * (n + 4)), E7, [(2 * (n - 3), N + 5, N - 2), (-(n + 4), N + 3, N - 3)]),
        (1 / (2 * (n - 1)), E8, [(2 * (n - 3), N + 3, N - 2), (-(n + 2), N + 1, N - 3)]),
        ((n + 2) / (4 * (n - 1)), f * f, [(2 * (n - 3), N + 1, N - 2), (-n, N - 1, N - 3)]),
        (-1 / ((n - 2) ** 2 * (n + 4)), E9, [(2 * (n - 3), N + 5, N - 2), (-(n + 4), N + 3, N - 3)]),
    ]
    return M, Q


def assemble_hessian(N: int, c1=DEFAULT_C1) -> DerivedHessian:
    """Derived J1, J2 from the two brace groups of the Hessian integrals."""
    _require_n(N, "assemble_hessian")
    R = _Radial.build(N, FPoly(c1=c1))
    M, Q = _hessian_groups(R)
    pref = hessian_prefactor(N)
    scale = Fraction((N - 4) ** 2, N * (N + 2))
    J1 = _combine(R, M).shift(N - 4).scale(scale).divide(pref)
    J2 = _combine(R, Q).shift(N - 4).scale(scale).divide(pref)
    return DerivedHessian(N, J1, J2, pref)


# tau

@dataclass(frozen=True)
class TauQuadratic:
    """tau = (A1 + sign * sqrt(A2)) / A3 with integer data."""

    A1: int
    A2: int
    A3: int
    sign: int = 1

    def value(self, dps: int = 64) -> mpmath.mpf:
        with mpmath.workdps(dps + 10):
            v = (mpmath.mpf(self.A1) + self.sign * mpmath.sqrt(self.A2)) / self.A3
        with mpmath.workdps(dps):
            return +v

    def interval(self, dps: int = 64):
        iv = mpmath.iv
        with mpmath.workdps(dps):
            iv.dps = dps
            return (iv.mpf(self.A1) + self.sign * iv.sqrt(iv.mpf(self.A2))) / iv.mpf(self.A3)

    def surd(self, q: tuple) -> tuple[Fraction, Fraction]:
        """q0 + q1 tau + q2 tau^2 at this root as X + Y sqrt(A2), exactly."""
        q0, q1, q2 = q
        a1, a3, s = Fraction(self.A1), Fraction(self.A3), self.sign
        X = q0 + q1 * a1 / a3 + q2 * (a1 * a1 + self.A2) / (a3 * a3)
        Y = s * (q1 / a3 + 2 * q2 * a1 / (a3 * a3))
        return X, Y

    def same_root(self, other: "TauQuadratic") -> bool:
        """Exact equality of the two surds."""
        if Fraction(self.A1, self.A3) != Fraction(other.A1, other.A3):
            return False
        r1 = Fraction(self.A2, self.A3 ** 2)
        r2 = Fraction(other.A2, other.A3 ** 2)
        if r1 != r2:
            return False
        if r1 == 0:
            return True
        return self.sign * (1 if self.A3 > 0 else -1) == other.sign * (1 if other.A3 > 0 else -1)


def _lcm(*xs: int) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), xs, 1)


def surd_sign(X: Fraction, Y: Fraction, D: int) -> int:
    """Exact sign of X + Y sqrt(D), D >= 0."""
    if D < 0:
        raise ValueError("negative radicand")
    sx = (X > 0) - (X < 0)
    sy = (Y > 0) - (Y < 0)
    if sy == 0 or D == 0:
        return sx
    if sx == 0 or sx == sy:
        return sy
    # opposite signs: compare X^2 with Y^2 D
    d = X * X - Y * Y * D
    return sx if d > 0 else (sy if d < 0 else 0)


def interval_sign(q: tuple, root: TauQuadratic, precisions=SIGN_PRECISIONS) -> tuple[int, int]:
    """Sign of q0 + q1 tau + q2 tau^2 by outward-rounded intervals.

    Returns (sign, digits used); raises when no precision excludes 0.
    """
    iv = mpmath.iv
    for dps in precisions:
        t = root.interval(dps)
        iv.dps = dps
        val = iv.mpf(_fr_iv(q[0], dps)) + iv.mpf(_fr_iv(q[1], dps)) * t + iv.mpf(_fr_iv(q[2], dps)) * t * t
        if val.a > 0:
            return 1, dps
        if val.b < 0:
            return -1, dps
    X, Y = root.surd(q)
    if X == 0 and Y == 0:
        return 0, precisions[-1]
    raise ArithmeticError("interval sign undecided at the highest precision")


def _fr_iv(x: Fraction, dps: int):
    iv = mpmath.iv
    iv.dps = dps
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _as_int(x: Fraction) -> int:
    if x.denominator != 1:
        raise ValueError(f"expected an integer, got {x}")
    return x.numerator


def _dI1_coeffs(I: TauPoly) -> tuple:
    return I.d_lambda().at_lambda(1)


@dataclass(frozen=True)
class TauSolution:
    N: int
    roots: tuple            # two TauQuadratic, minus root first
    values: tuple           # 64-digit mpf values
    quadratic: tuple        # (q0, q1, q2) of I'(1) in tau
    discriminant: int
    printed: TauQuadratic
    printed_value: mpmath.mpf
    printed_matches: int | None   # index of the matching derived root
    exact_match: bool
    agreement_digits: float


def solve_tau(N: int, c1=DEFAULT_C1, dps: int = 64) -> TauSolution:
    """Both roots of I'(1)=0 in tau, plus the printed A1/A2/A3 route."""
    _require_n(N, "solve_tau")
    I = assemble_F0(N, c1).poly
    q = _dI1_coeffs(I)
    den = _lcm(*(x.denominator for x in q))
    c, b, a = (int(x * den) for x in q)
    if a == 0:
        raise NoRealRootError(f"I'(1) is not quadratic in tau at N={N}")
    disc = b * b - 4 * a * c
    if disc < 0:
        raise NoRealRootError(f"I'(1)=0 has no real root at N={N}: discriminant {disc}")
    roots = (TauQuadratic(-b, disc, 2 * a, -1), TauQuadratic(-b, disc, 2 * a, 1))
    vals = tuple(r.value(dps) for r in roots)
    printed = TauQuadratic(*(_as_int(printed_value("tau_quadratic", k, N))
                             for k in ("A1", "A2", "A3")), 1)
    if printed.A2 < 0:
        raise NoRealRootError(f"printed A2 < 0 at N={N}")
    pv = printed.value(dps)
    match, exact, digits = None, False, 0.0
    for i, r in enumerate(roots):
        if r.same_root(printed):
            match, exact = i, True
    with mpmath.workdps(dps):
        errs = [abs(v - pv) / abs(v) if v else abs(pv) for v in vals]
        best = min(range(2), key=lambda i: errs[i])
        digits = float(-mpmath.log10(errs[best])) if errs[best] else float(dps)
    if match is None and digits >= 50:
        match = best
    return TauSolution(N, roots, vals, q, disc, printed, pv, match, exact, digits)


# sign conditions at the tau roots

@dataclass(frozen=True)
class RootCheck:
    root: TauQuadratic
    tau: mpmath.mpf
    I1: mpmath.mpf
    dI1: mpmath.mpf
    d2I1: mpmath.mpf
    J1: mpmath.mpf
    J2: mpmath.mpf
    signs: dict            # condition -> sign decided by intervals
    digits: dict           # condition -> precision used
    printed_J_signs: dict  # signs of the printed J1, J2 at this root
    dI1_exact_zero: bool

    @property
    def conditions(self) -> dict:
        return {
            "I(1)<0": self.signs["I"] < 0,
            "I''(1)>0": self.signs["d2I"] > 0,
            "J1(1)>0": self.signs["J1"] > 0,
            "J2(1)>0": self.signs["J2"] > 0,
        }

    @property
    def accepted(self) -> bool:
        return self.dI1_exact_zero and all(self.conditions.values())


@dataclass(frozen=True)
class CriticalPointReport:
    N: int
    c1: Fraction
    roots: tuple
    accepted_index: int | None
    printed_route_digits: float
    printed_route_exact: bool
    printed_J_match: bool
    notes: tuple = field(default_factory=tuple)

    @property
    def accepted(self) -> RootCheck | None:
        return None if self.accepted_index is None else self.roots[self.accepted_index]

    @property
    def n_accepted(self) -> int:
        return sum(r.accepted for r in self.roots)

    @property
    def passed(self) -> bool:
        return self.n_accepted == 1


def _mp_eval(q: tuple, tau, dps: int):
    with mpmath.workdps(dps + 20):
        return sum(mpmath.mpf(c.numerator) / c.denominator * tau ** k for k, c in enumerate(q))


@lru_cache(maxsize=128)
def _lemma_data(N: int, c1: int):
    I = assemble_F0(N, c1).poly
    hess = assemble_hessian(N, c1)
    return I, hess


def verify_lemma81(N: int, c1=DEFAULT_C1, dps: int = 64) -> CriticalPointReport:
    """Evaluate the four sign conditions at both roots of I'(1)=0."""
    _require_n(N, "verify_lemma81")
    I, hess = _lemma_data(N, int(c1))
    sol = solve_tau(N, c1, dps)
    qI = I.at_lambda(1)
    qdI = I.d_lambda().at_lambda(1)
    qd2I = I.d_lambda(2).at_lambda(1)
    qJ1, qJ2 = hess.J1.at_lambda(1), hess.J2.at_lambda(1)
    pJ1, pJ2 = paper_J1(N), paper_J2(N)
    checks = []
    for root, tv in zip(sol.roots, sol.values):
        signs, digits = {}, {}
        for key, q in (("I", qI), ("d2I", qd2I), ("J1", qJ1), ("J2", qJ2)):
            signs[key], digits[key] = interval_sign(q, root)
        printed = {"J1": interval_sign(pJ1.at_lambda(1), root)[0],
                   "J2": interval_sign(pJ2.at_lambda(1), root)[0]}
        X, Y = root.surd(qdI)
        checks.append(RootCheck(
            root, tv,
            _mp_eval(qI, tv, dps), _mp_eval(qdI, tv, dps), _mp_eval(qd2I, tv, dps),
            _mp_eval(qJ1, tv, dps), _mp_eval(qJ2, tv, dps),
            signs, digits, printed, X == 0 and Y == 0))
    accepted = [i for i, c in enumerate(checks) if c.accepted]
    notes = []
    match = hess.J1 == pJ1 and hess.J2 == pJ2
    if not match:
        notes.append("printed J1/J2 differ from the derived Hessian polynomials; signs use the derived ones")
    if not accepted:
        notes.append("no root satisfies all sign conditions")
    return CriticalPointReport(
        N, Fraction(c1), tuple(checks), accepted[0] if len(accepted) == 1 else None,
        sol.agreement_digits, sol.exact_match, match, tuple(notes))


# Hessian at (0, 1)

@dataclass(frozen=True)
class HessianResult:
    N: int
    matrix: mpmath.matrix
    eigenvalues: tuple
    min_eigenvalue: mpmath.mpf
    positive_definite: bool
    F01: mpmath.mpf
    block_diagonal: bool


def hessian_matrix(N: int, tau, W: WeylForm, c1=DEFAULT_C1, dps: int = 64) -> HessianResult:
    """(N+1)x(N+1) Hessian of F at (xi', lambda') = (0, 1); last index is lambda'."""
    _require_n(N, "hessian_matrix")
    if W.dim != N:
        raise DimensionError(f"Weyl form has dimension {W.dim}, expected {N}")
    norm = weyl_quad_norm(W)
    if norm <= 0:
        raise ValueError("degenerate Weyl form: sum (W+W)^2 must be positive")
    if isinstance(tau, TauQuadratic):
        tau = tau.value(dps + 20)
    I, hess = _lemma_data(N, int(c1))
    M = m_matrix(W)
    with mpmath.workdps(dps + 20):
        tau = mpmath.mpf(tau)
        S = sphere_area(N).to_mpf(dps + 20)
        hp = hessian_prefactor(N).to_mpf(dps + 20) * S
        fp = f0_prefactor(N).to_mpf(dps + 20) * S * _mpq(norm)
        j1 = _mp_eval(hess.J1.at_lambda(1), tau, dps + 20)
        j2 = _mp_eval(hess.J2.at_lambda(1), tau, dps + 20)
        d2I = _mp_eval(I.d_lambda(2).at_lambda(1), tau, dps + 20)
        I1 = _mp_eval(I.at_lambda(1), tau, dps + 20)
        H = mpmath.zeros(N + 1, N + 1)
        for p in range(N):
            for q in range(N):
                H[p, q] = hp * (j1 * _mpq(M[p][q]) + (j2 * _mpq(norm) if p == q else 0))
        H[N, N] = fp * d2I
        ev = mpmath.eigsy(H, eigvals_only=True)
        evs = tuple(sorted(ev[i] for i in range(N + 1)))
        F01 = fp * I1
    with mpmath.workdps(dps):
        evs = tuple(+e for e in evs)
        return HessianResult(N, H, evs, evs[0], evs[0] > 0, +F01, True)


def _mpq(x) -> mpmath.mpf:
    x = Fraction(x)
    return mpmath.mpf(x.numerator) / x.denominator


# scan along lambda'

@dataclass(frozen=True)
class ScanResult:
    N: int
    grid: tuple
    values: tuple           # F(0, lambda') / (|S| sum (W+W)^2)
    argmin: float
    local_min_at_one: bool  # both grid neighbours of 1 lie strictly above F(0, 1)
    monotone_radius: float  # F increases strictly away from 1 up to this distance
    F01: mpmath.mpf
    monotone_on_grid: bool


def scan_F0(N: int, tau, grid=None, c1=DEFAULT_C1, dps: int = 64) -> ScanResult:
    """F(0, lambda') / (|S| sum (W+W)^2) on a grid inside (1/2, 3/2) that contains 1."""
    _require_n(N, "scan_F0")
    if grid is None:
        grid = [Fraction(1000 + k, 1000) for k in range(-100, 101)]
    grid = sorted(Fraction(g) for g in grid)
    if any(not (Fraction(1, 2) < g < Fraction(3, 2)) for g in grid):
        raise ValueError("grid must lie inside (1/2, 3/2)")
    if 1 not in grid:
        raise ValueError("grid must contain lambda' = 1")
    if isinstance(tau, TauQuadratic):
        tau = tau.value(dps + 20)
    I = assemble_F0(N, c1).poly
    with mpmath.workdps(dps + 20):
        pref = f0_prefactor(N).to_mpf(dps + 20)
        tau = mpmath.mpf(tau)
        vals = [pref * _mp_eval(I.at_lambda(g), tau, dps) for g in grid]
    i1 = grid.index(1)
    i = min(range(len(vals)), key=lambda k: vals[k])
    local = 0 < i1 < len(grid) - 1 and vals[i1 - 1] > vals[i1] < vals[i1 + 1]
    lo = i1
    while lo > 0 and vals[lo - 1] > vals[lo]:
        lo -= 1
    hi = i1
    while hi < len(grid) - 1 and vals[hi + 1] > vals[hi]:
        hi += 1
    radius = float(min(1 - grid[lo], grid[hi] - 1))
    full = lo == 0 and hi == len(grid) - 1
    with mpmath.workdps(dps):
        return ScanResult(N, tuple(float(g) for g in grid), tuple(+v for v in vals),
                          float(grid[i]), local, radius, +vals[i1], full)


# gluing schedule

@dataclass(frozen=True)
class GluingReport:
    n: int
    N: int
    cube: Fraction          # (rho^{4-N} mu^{-2} eps^{N-24})^3, exact
    log2_value: float
    decreasing: bool        # value(n+1) < value(n)
    disjoint: bool          # glued balls around 1/n and 1/(n+1) are separated


def _schedule_cube(n: int, N: int) -> Fraction:
    # mu = 2^{-n/3}, eps = 2^{-n}, rho = 1/(4n^2); cube to stay rational
    rho_pow = Fraction(4 * n * n) ** (3 * (N - 4))
    return rho_pow * Fraction(2) ** (2 * n) * Fraction(2) ** (-3 * n * (N - 24))


def gluing_schedule_check(n: int, N: int = 25, margin=1) -> GluingReport:
    """Smallness of rho^{4-N} mu^{-2} eps^{N-24} along the schedule, exactly."""
    if N < MIN_N:
        raise DimensionError(f"gluing schedule needs N >= {MIN_N}, got {N}")
    if n < 1:
        raise ValueError("n must be positive")
    c0, c1 = _schedule_cube(n, N), _schedule_cube(n + 1, N)
    log2 = (N - 4) * math.log2(4 * n * n) + 2 * n / 3 - n * (N - 24)
    sep = Fraction(1, n * (n + 1))
    disjoint = sep > 2 * Fraction(1, 4 * n * n) * Fraction(margin)
    return GluingReport(n, N, c0, log2, c1 < c0, disjoint)


def gluing_decreasing_from(N: int = 25, n_max: int = 100000) -> int:
    """Smallest n0 such that the schedule quantity decreases for every n >= n0.

    The consecutive log-ratio 2(N-4) log2(1+1/n) + 2/3 - (N-24) is decreasing
    in n, so the first decreasing step is followed only by decreasing steps.
    """
    for n in range(1, n_max):
        if _schedule_cube(n + 1, N) < _schedule_cube(n, N):
            return n
    raise ArithmeticError(f"no decrease found below n={n_max}")
