"""Verification suites, report records and their serialisations."""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import platform
import time
import traceback
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .errors import VerificationError

__all__ = [
    "SCHEMA_VERSION",
    "SUITES",
    "DEFAULT_TOLERANCES",
    "ConfigError",
    "RunConfig",
    "CheckRecord",
    "VerificationReport",
    "load_config",
    "run",
    "emit",
    "parse_json",
    "sign_table",
]

SCHEMA_VERSION = 1

SUITES = ("critical-point", "sphere-lemmas", "bubble", "curvature", "residual-decay",
          "convolution", "gluing-schedule")

DEFAULT_TOLERANCES = {
    "tau_digits": 50.0,          # agreement of the printed tau route
    "tau_residual": 1e-30,       # |I'(1)| at the root, 64 digits
    "bubble_residual": 1e-9,     # relative flat residual
    "bubble_fd": 1e-6,           # closed forms vs finite differences
    "det": 1e-12,                # |det g - 1|
    "trace": 1e-10,              # |g^{ij} Ric_ij - S| (independent route)
    "flat_paneitz": 1e-9,        # h = 0 against the flat bilaplacian
    "scaling_spread": 1.5,       # max/min of the mu-scaled error ratios
    "eps_ratio": 0.15,           # relative deviation from 2^10
    "decay_slope": 0.75,         # absolute deviation from -(N-10)
    "convolution": 0.15,         # exponent deviation
    "ball": 0.2,                 # r^k exponent deviation
    "log_case_spread": 2.0,      # max/min of the t = N ratios
    "gluing_start": 10.0,        # schedule must decrease from this n on
}


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    n_range: tuple = tuple(range(25, 41))
    lam_grid: tuple = ()                   # empty: 1 +- k/1000, |k| <= 100
    tolerances: tuple = ()                 # (key, value) overrides
    samples: int = 1_000_000
    seed: int = 0
    suites: tuple = SUITES
    out: str | None = None
    fmt: str = "json"
    hessian_n: tuple = (25,)
    sphere_n: tuple = (5, 6, 7)
    bubble_n: tuple = (5, 25)
    bubble_points: int = 100
    curvature_n: int = 6
    residual_n: int = 25
    gluing_n: int = 25
    weyl_seeds: int = 3
    jobs: int = 1                          # worker processes, one suite each
    timings: bool = True                   # False: runtimes recorded as 0 for byte-stable output

    def __post_init__(self):
        if not self.n_range and "critical-point" in self.suites:
            raise ConfigError("n_range", "empty")
        for n in self.n_range:
            if not (isinstance(n, int) and 1 <= n <= 200):
                raise ConfigError("n_range", f"dimension {n!r} outside [1, 200]")
        for n in self.sphere_n + self.bubble_n + (self.curvature_n, self.residual_n):
            if not (isinstance(n, int) and 5 <= n <= 200):
                raise ConfigError("dimensions", f"cross-check dimension {n!r} must be in [5, 200]")
        for n in self.hessian_n + (self.gluing_n,):
            if not (isinstance(n, int) and 25 <= n <= 200):
                raise ConfigError("dimensions", f"critical-point dimension {n!r} must be in [25, 200]")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigError("suites", f"unknown suite(s) {unknown}; choose from {SUITES}")
        if not (isinstance(self.jobs, int) and self.jobs >= 1):
            raise ConfigError("jobs", "need at least one worker")
        if self.samples < 1000:
            raise ConfigError("samples", "need at least 1000 Monte Carlo samples")
        if self.fmt not in ("json", "csv", "markdown"):
            raise ConfigError("format", f"unknown format {self.fmt!r}")
        for key, value in self.tolerances:
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError("tolerances", f"unknown tolerance {key!r}")
            if not (isinstance(value, (int, float)) and value > 0):
                raise ConfigError("tolerances", f"{key} must be positive")
        if self.lam_grid and Fraction(1) not in self.lam_grid:
            raise ConfigError("lam_grid", "grid must contain 1")

    def tol(self, key: str) -> float:
        return dict(self.tolerances).get(key, DEFAULT_TOLERANCES[key])

    def echo(self) -> dict:
        d = asdict(self)
        d["lam_grid"] = [str(g) for g in self.lam_grid]
        d["tolerances"] = {k: self.tol(k) for k in DEFAULT_TOLERANCES}
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d


def _ints(text: str) -> tuple:
    """'25..40', '25-40', '25,26,30' or a mix."""
    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        for sep in ("..", "-"):
            if sep in part:
                lo, hi = part.split(sep, 1)
                out.extend(range(int(lo), int(hi) + 1))
                break
        else:
            out.append(int(part))
    return tuple(out)


_INT_KEYS = ("samples", "seed", "bubble_points", "curvature_n", "residual_n", "gluing_n", "weyl_seeds",
             "jobs")
_LIST_KEYS = ("n_range", "hessian_n", "sphere_n", "bubble_n")


def load_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Sectioned key = value text: [run], [dimensions], [tolerances]."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", str(exc).splitlines()[0]) from exc
    kw: dict = {}
    tols = dict((base or RunConfig()).tolerances)
    for section in cp.sections():
        for key, value in cp.items(section):
            try:
                if section == "tolerances":
                    tols[key] = float(value)
                elif key in _LIST_KEYS:
                    kw[key] = _ints(value)
                elif key in _INT_KEYS:
                    kw[key] = int(value)
                elif key == "suites":
                    kw[key] = tuple(s.strip() for s in value.split(",") if s.strip())
                elif key == "lam_grid":
                    kw[key] = tuple(Fraction(s.strip()) for s in value.split(",") if s.strip())
                elif key == "timings":
                    kw[key] = cp.getboolean(section, key)
                elif key == "format":
                    kw["fmt"] = value.strip()
                elif key == "out":
                    kw[key] = value.strip() or None
                else:
                    raise ConfigError(f"{section}.{key}", "unknown key")
            except ValueError as exc:
                if isinstance(exc, ConfigError):
                    raise
                raise ConfigError(f"{section}.{key}", f"cannot parse {value!r}") from exc
    kw["tolerances"] = tuple(sorted(tols.items()))
    return replace(base or RunConfig(), **kw)


# records

@dataclass(frozen=True)
class CheckRecord:
    suite: str
    check_id: str
    anchor: str
    status: str              # pass | fail | skipped
    residual: float | None = None
    runtime: float = 0.0
    detail: str = ""
    data: dict = field(default_factory=dict)


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple
    config: dict
    environment: dict
    created: str
    version: int = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.status != "fail" for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "skipped": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "schema": "qverify.report",
            "version": self.version,
            "created": self.created,
            "environment": self.environment,
            "config": self.config,
            "summary": {**self.counts(), "passed": self.passed},
            "checks": [asdict(c) for c in self.checks],
        }


def _environment() -> dict:
    import jax
    import mpmath
    import sympy

    from . import __version__

    return {"qverify": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "mpmath": mpmath.__version__, "sympy": sympy.__version__, "jax": jax.__version__}


# helpers for suites

def _rec(suite, check_id, anchor, ok, residual=None, detail="", data=None) -> CheckRecord:
    if residual is not None:
        residual = float(residual)
        if not math.isfinite(residual):
            residual = None
    return CheckRecord(suite, check_id, anchor, "pass" if ok else "fail", residual, 0.0,
                       detail, data or {})


def _guard(suite: str, check_id: str, anchor: str, fn: Callable[[], CheckRecord | list]) -> list:
    """Run one check; a crash becomes a failed record with its diagnostic."""
    t0 = time.perf_counter()
    try:
        out = fn()
    except VerificationError as exc:
        out = _rec(suite, check_id, anchor, False, detail=f"{type(exc).__name__}: {exc}")
    except Exception as exc:  # noqa: BLE001 - a crashing check must not stop the run
        tb = traceback.format_exception_only(type(exc), exc)[-1].strip()
        out = _rec(suite, check_id, anchor, False, detail=f"internal error: {tb}")
    dt = time.perf_counter() - t0
    recs = out if isinstance(out, list) else [out]
    share = dt / max(len(recs), 1)
    return [replace(r, runtime=round(share, 6)) for r in recs]


def _mp_str(x, digits: int = 30) -> str:
    import mpmath

    return mpmath.nstr(x, digits)


# suites

def _critical_point(cfg: RunConfig) -> list:
    from .reduced_energy import (assemble_F0, assemble_hessian, hessian_matrix, paper_I, paper_J1,
                                 paper_J2, scan_F0, solve_tau, verify_lemma81)
    from .weyl import random_weyl

    s = "critical-point"
    out = []
    for N in cfg.n_range:
        def sign(N=N):
            paper_I(N)            # surfaces a printed pole before anything else
            rep = verify_lemma81(N)
            acc = rep.accepted or rep.roots[-1]
            data = {"N": N, "tau": _mp_str(acc.tau), "I(1)": _mp_str(acc.I1, 10),
                    "I''(1)": _mp_str(acc.d2I1, 10), "J1(1)": _mp_str(acc.J1, 10),
                    "J2(1)": _mp_str(acc.J2, 10), "conditions": acc.conditions,
                    "accepted_roots": rep.n_accepted, "verdict": "pass" if rep.passed else "fail"}
            return _rec(s, f"sign-table/N={N}",
                        "exactly one root of I'(1)=0 with I(1)<0, I''(1)>0, J1(1)>0, J2(1)>0",
                        rep.passed, detail="; ".join(rep.notes), data=data)

        out += _guard(s, f"sign-table/N={N}", "sign conditions", sign)

        def tau(N=N):
            import mpmath

            sol = solve_tau(N)
            if sol.printed_matches is None:
                return _rec(s, f"tau-route/N={N}", "printed closed-form root solves I'(1)=0", False,
                            detail="printed root matches neither derived root")
            with mpmath.workdps(64):
                q = sol.quadratic
                t = sol.printed_value
                res = abs(sum(mpmath.mpf(c.numerator) / c.denominator * t ** k for k, c in enumerate(q)))
            ok = (sol.exact_match or sol.agreement_digits >= cfg.tol("tau_digits")) \
                and res < cfg.tol("tau_residual")
            return _rec(s, f"tau-route/N={N}", "printed closed-form root solves I'(1)=0", ok,
                        residual=res, detail=f"exact surd match: {sol.exact_match}",
                        data={"digits": sol.agreement_digits, "tau": _mp_str(t)})

        out += _guard(s, f"tau-route/N={N}", "printed tau", tau)

        def transcription(N=N):
            okI = assemble_F0(N).poly == paper_I(N)
            h = assemble_hessian(N)
            okJ = h.J1 == paper_J1(N) and h.J2 == paper_J2(N)
            return [
                _rec(s, f"transcription-I/N={N}", "derived F(0,l') polynomial equals the printed I",
                     okI),
                _rec(s, f"transcription-J/N={N}", "derived Hessian polynomials equal the printed J1, J2",
                     okJ, detail="" if okJ else "printed J1/J2 differ from the derived integrals"),
            ]

        out += _guard(s, f"transcription/N={N}", "printed polynomials", transcription)

    for N in cfg.hessian_n:
        def hess(N=N):
            rep = verify_lemma81(N)
            if rep.accepted is None:
                return _rec(s, f"hessian/N={N}", "Hessian at (0,1) positive definite, F(0,1)<0",
                            False, detail="no accepted tau root")
            recs = []
            for k in range(cfg.weyl_seeds):
                W = random_weyl(N, cfg.seed + k)
                H = hessian_matrix(N, rep.accepted.root, W)
                ok = H.positive_definite and H.F01 < 0
                recs.append(_rec(s, f"hessian/N={N}/seed={cfg.seed + k}",
                                 "Hessian at (0,1) positive definite, F(0,1)<0", ok,
                                 residual=float(H.min_eigenvalue),
                                 data={"min_eigenvalue": _mp_str(H.min_eigenvalue, 15),
                                       "F(0,1)": _mp_str(H.F01, 15)}))
            sc = scan_F0(N, rep.accepted.root, grid=cfg.lam_grid or None)
            recs.append(_rec(s, f"local-min/N={N}", "l'=1 is a strict local minimum of F(0,l')",
                             sc.local_min_at_one,
                             detail=f"monotone radius {sc.monotone_radius:g}; argmin on grid {sc.argmin:g}"))
            return recs

        out += _guard(s, f"hessian/N={N}", "Hessian", hess)
    return out


def _gluing(cfg: RunConfig) -> list:
    from .reduced_energy import gluing_decreasing_from, gluing_schedule_check

    s = "gluing-schedule"
    N = cfg.gluing_n
    start = int(cfg.tol("gluing_start"))

    def dec():
        n0 = gluing_decreasing_from(N)
        ok = n0 <= start
        return _rec(s, f"decreasing/N={N}",
                    f"rho^(4-N) mu^-2 eps^(N-24) strictly decreasing for n >= {start}", ok,
                    residual=n0, detail=f"first decreasing step at n={n0}",
                    data={"first_decreasing_n": n0})

    def disjoint():
        bad = [n for n in range(start, start + 200) if not gluing_schedule_check(n, N).disjoint]
        return _rec(s, f"disjoint/N={N}", "glued balls are pairwise disjoint", not bad,
                    detail=f"overlaps at n={bad[:5]}" if bad else "")

    return _guard(s, f"decreasing/N={N}", "schedule", dec) + _guard(s, f"disjoint/N={N}", "balls", disjoint)


def _sphere(cfg: RunConfig) -> list:
    from .crosscheck import mc_sphere, sphere_integrand
    from .weyl import SPHERE_KINDS, random_weyl, sphere_quadratic_matrix

    s = "sphere-lemmas"
    out = []
    for N in cfg.sphere_n:
        for k in range(cfg.weyl_seeds):
            seed = cfg.seed + k
            W = random_weyl(N, seed)
            for kind in SPHERE_KINDS:
                cid = f"{kind}/N={N}/seed={seed}"

                def one(kind=kind, W=W, cid=cid, N=N, seed=seed):
                    lhs, rhs = sphere_quadratic_matrix(W, kind)
                    exact = all(a == b for a, b in zip(lhs.flat, rhs.flat))
                    p, q = (0, 1) if lhs.shape != (1, 1) else (0, 0)
                    est = mc_sphere(N, cfg.samples, sphere_integrand(W, kind, p, q), seed=seed)
                    val = float(rhs[p, q] if lhs.shape != (1, 1) else rhs[0, 0])
                    agree = est.agrees(val)
                    return _rec(s, cid, "sphere integral of the Weyl quadratic equals its closed form",
                                exact and agree, residual=abs(est.mean - val),
                                detail=f"exact={exact} mc={est.mean:.6g}+-{est.stderr:.2g} value={val:.6g}")

                out += _guard(s, cid, "sphere identity", one)
    return out


def _bubble(cfg: RunConfig) -> list:
    from .bubble import BubbleParams, flat_residual, u0_derivative, u0_value
    from .crosscheck import finite_difference

    s = "bubble"
    out = []
    for N in cfg.bubble_n:
        def resid(N=N):
            rng = np.random.default_rng([cfg.seed, N])
            worst = 0.0
            for _ in range(cfg.bubble_points):
                x = [Fraction(int(v), 1000) for v in rng.integers(-3000, 3001, N)]
                xi = [Fraction(int(v), 1000) for v in rng.integers(-1000, 1001, N)]
                lam = Fraction(int(rng.integers(500, 2001)), 1000)
                r = flat_residual(x, BubbleParams(N, lam, tuple(xi)))
                worst = max(worst, float(r.relative))
            return _rec(s, f"flat-equation/N={N}", "bubble solves the flat fourth-order equation",
                        worst <= cfg.tol("bubble_residual"), residual=worst)

        def fd(N=N):
            rng = np.random.default_rng([cfg.seed, N, 1])
            worst = 0.0
            p = BubbleParams(N, Fraction(1), tuple([Fraction(0)] * N))
            for order in (1, 2, 3, 4):
                x = [Fraction(int(v), 100) for v in rng.integers(-150, 151, N)]
                idx = tuple(int(i) for i in rng.integers(0, min(N, 4), order))
                exact = u0_derivative(x, p, idx)
                num = finite_difference(lambda z: u0_value(z, p, dps=60), x, idx)
                worst = max(worst, float(abs(num - exact) / abs(exact)) if exact else float(abs(num)))
            return _rec(s, f"derivatives/N={N}", "closed-form bubble derivatives match finite differences",
                        worst <= cfg.tol("bubble_fd"), residual=worst)

        out += _guard(s, f"flat-equation/N={N}", "bubble", resid)
        out += _guard(s, f"derivatives/N={N}", "bubble derivatives", fd)
    return out


def _curvature(cfg: RunConfig) -> list:
    from .curvature import (MetricField, bubble_function, curvature_at, leading_terms, metric_at,
                            paneitz_apply)
    from .bubble import BubbleParams, bilaplacian
    from .weyl import random_weyl

    s = "curvature"
    N = cfg.curvature_n
    W = random_weyl(N, cfg.seed)
    rng = np.random.default_rng([cfg.seed, N, 2])
    pts = [[Fraction(int(v), 1000) for v in rng.integers(-150, 151, N)] for _ in range(20)]

    def consistency():
        fld = MetricField(W, mu=Fraction(1, 1000), tau=Fraction(3))
        det = tr = 0.0
        for x in pts:
            det = max(det, abs(metric_at(fld, x).det - 1))
            c = curvature_at(fld, x)
            tr = max(tr, abs(c.S - c.S_alt))
        return [
            _rec(s, f"det/N={N}", "det g = 1 for trace-free h", det <= cfg.tol("det"), residual=det),
            _rec(s, f"trace/N={N}", "g^{ij}Ric_ij equals the scalar curvature from an independent route",
                 tr <= cfg.tol("trace"), residual=tr),
        ]

    def flat():
        fld = MetricField(W, mu=Fraction(0))
        worst = 0.0
        for x in pts[:5]:
            u = bubble_function(N)
            ours = paneitz_apply(fld, u, x)
            ref = float(bilaplacian(x, BubbleParams(N, Fraction(1), tuple([Fraction(0)] * N))))
            worst = max(worst, abs(ours - ref) / abs(ref))
        return _rec(s, f"flat-paneitz/N={N}", "with h = 0 the Paneitz operator is the bilaplacian",
                    worst <= cfg.tol("flat_paneitz"), residual=worst)

    def scaling():
        x = pts[0]
        mus = (Fraction(1, 100), Fraction(1, 1000), Fraction(1, 10000))
        ratios = {"Ric": [], "S": [], "DeltaS": [], "Q": []}
        for mu in mus:
            fld = MetricField(W, mu=mu, tau=Fraction(3))
            c, L = curvature_at(fld, x), leading_terms(fld, x)
            m = float(mu)
            ratios["Ric"].append(float(np.abs(c.Ric - L["Ric"]).max()) / m ** 2)
            ratios["S"].append(abs(c.S - L["S"]) / m ** 3)
            ratios["DeltaS"].append(abs(c.DeltaS - L["DeltaS"]) / m ** 3)
            ratios["Q"].append(abs(c.Q - L["Q"]) / m ** 3)
        recs = []
        for key, r in ratios.items():
            spread = max(r) / min(r) if min(r) > 0 else float("inf")
            recs.append(_rec(s, f"leading-{key}/N={N}", f"leading-order {key} with the stated error order",
                             spread <= cfg.tol("scaling_spread"), residual=spread,
                             data={"ratios": r}))
        return recs

    return (_guard(s, f"consistency/N={N}", "metric", consistency) + _guard(s, f"flat-paneitz/N={N}", "flat", flat)
            + _guard(s, f"leading/N={N}", "leading terms", scaling))


def residual_field(N: int, eps: Fraction = Fraction(1, 1000), mu: Fraction = Fraction(1)):
    """The y-scale metric and centre used by the residual-decay suite."""
    import mpmath

    from .curvature import MetricField
    from .reduced_energy import verify_lemma81
    from .weyl import default_weyl

    tau = Fraction(0)
    if N >= 25:
        rep = verify_lemma81(N)
        if rep.accepted is not None:
            tau = Fraction(mpmath.nstr(rep.accepted.tau, 30))
    fld = MetricField(default_weyl(N), mu=mu, eps=eps, rho=Fraction(1, 2), tau=tau, scale="y")
    xi = (0.0, 0.5) + (0.0,) * (N - 2)
    return fld, xi


def _residual(cfg: RunConfig) -> list:
    from .curvature import bubble_function, residual_at, residual_profile

    s = "residual-decay"
    N = cfg.residual_n
    state = {}

    def eps():
        fld, xi = residual_field(N)
        y = np.zeros(N)
        y[0] = 3.0
        u = bubble_function(N, 1.0, xi)
        r1 = residual_at(fld, u, y)
        r2 = residual_at(replace(fld, eps=fld.eps / 2), u, y)
        ratio = abs(r1 / r2)
        dev = abs(ratio / 2 ** 10 - 1)
        return _rec(s, f"eps-scaling/N={N}", "halving eps divides R(y) by 2^10",
                    dev <= cfg.tol("eps_ratio"), residual=dev, data={"ratio": ratio})

    def slope():
        fld, xi = residual_field(N)
        lim = float(fld.rho / fld.eps)
        radii = list(np.geomspace(5, 0.98 * lim, 6))
        pr = residual_profile(fld, xi, radii)
        target = -(N - 10)
        dev = abs(pr.slope - target)
        return _rec(s, f"decay-slope/N={N}", "log|R| against log(1+|y-xi'|) has slope -(N-10)",
                    dev <= cfg.tol("decay_slope"), residual=dev,
                    detail=f"fitted slope {pr.slope:.3f}", data={"slope": pr.slope, "radii": radii,
                                                                  "values": list(pr.values)})

    return _guard(s, f"eps-scaling/N={N}", "eps scaling", eps) + _guard(s, f"decay-slope/N={N}", "decay", slope)


def _convolution(cfg: RunConfig) -> list:
    from .crosscheck import ball_scaling, convolution_log_case, convolution_scaling

    s = "convolution"
    N = 5
    samples = min(cfg.samples, 200_000)
    out = []
    for (sv, tv, target, label) in ((4.0, 6.0, 4.0 - N, "t>N"), (2.0, 4.0, -2.0, "t<N")):
        def one(sv=sv, tv=tv, target=target, label=label):
            fit = convolution_scaling(N, sv, tv, samples=samples, seed=cfg.seed)
            dev = abs(fit.exponent - target)
            return _rec(s, f"{label}/s={sv:g}/t={tv:g}", "convolution decay exponent",
                        dev <= cfg.tol("convolution"), residual=dev,
                        detail=f"exponent {fit.exponent:.3f}, expected {target:g}")
        out += _guard(s, f"{label}", "convolution", one)

    def log_case():
        fit, ratios = convolution_log_case(N, 2.0, samples=samples, seed=cfg.seed)
        spread = max(ratios) / min(ratios)
        return _rec(s, "t=N/s=2", "t = N case bounded against (1+|x|)^(s-N)(1+log(1+|x|))",
                    spread <= cfg.tol("log_case_spread"), residual=spread)

    def ball():
        fit = ball_scaling(N, 2.0, 2.0, samples=samples, seed=cfg.seed)
        dev = abs(fit.exponent - 2.0)
        return _rec(s, "ball/s=2/k=2", "ball-restricted bound carries the r^k prefactor",
                    dev <= cfg.tol("ball"), residual=dev, detail=f"exponent {fit.exponent:.3f}")

    return out + _guard(s, "t=N", "log case", log_case) + _guard(s, "ball", "ball", ball)


_RUNNERS = {
    "critical-point": _critical_point,
    "sphere-lemmas": _sphere,
    "bubble": _bubble,
    "curvature": _curvature,
    "residual-decay": _residual,
    "convolution": _convolution,
    "gluing-schedule": _gluing,
}


def _run_suite(suite: str, cfg: RunConfig) -> list:
    return _guard(suite, "suite", "suite", lambda: _RUNNERS[suite](cfg))


def run(cfg: RunConfig, progress: Callable[[CheckRecord], None] | None = None) -> VerificationReport:
    """Run the selected suites; a crashing suite is recorded as a failure and the run continues.

    With ``cfg.jobs > 1`` suites run in separate processes; records are still
    collected by this process alone and ordered as in SUITES.
    """
    selected = [s for s in SUITES if s in cfg.suites]
    if cfg.jobs > 1 and len(selected) > 1:
        import multiprocessing as mp
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(min(cfg.jobs, len(selected)), mp_context=mp.get_context("spawn")) as ex:
            futures = [ex.submit(_run_suite, s, cfg) for s in selected]
            results = []
            for suite, fut in zip(selected, futures):
                try:
                    results.append(fut.result())
                except Exception as exc:  # noqa: BLE001 - a dead worker is a failed suite
                    results.append([_rec(suite, "suite", "suite", False,
                                         detail=f"internal error: worker died: {type(exc).__name__}: {exc}")])
    else:
        results = (_run_suite(s, cfg) for s in selected)
    checks = []
    for recs in results:
        for r in recs:
            if not cfg.timings:
                r = replace(r, runtime=0.0)
            checks.append(r)
            if progress:
                progress(r)
    return VerificationReport(tuple(checks), cfg.echo(), _environment(),
                              datetime.now(timezone.utc).isoformat(timespec="seconds"))


# serialisation

CSV_COLUMNS = ("suite", "check_id", "anchor", "status", "residual", "runtime", "detail")


def sign_table(report: VerificationReport) -> list:
    return [c.data for c in report.checks if c.check_id.startswith("sign-table/") and c.data]


def emit(report: VerificationReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True, default=str) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in report.checks:
            w.writerow([c.suite, c.check_id, c.anchor, c.status,
                        "" if c.residual is None else repr(c.residual), f"{c.runtime:.3f}", c.detail])
        return buf.getvalue()
    if fmt == "markdown":
        return _markdown(report)
    raise ConfigError("format", f"unknown format {fmt!r}")


def _markdown(report: VerificationReport) -> str:
    n = report.counts()
    lines = ["# Verification report", "",
             f"{n['pass']} passed, {n['fail']} failed, {n['skipped']} skipped "
             f"(schema v{report.version}, {report.created})", ""]
    rows = sign_table(report)
    if rows:
        lines += ["## Sign table", "",
                  "| N | tau | I(1) | I''(1) | J1(1) | J2(1) | verdict |",
                  "|---|---|---|---|---|---|---|"]
        for r in rows:
            cells = [r["N"], r["tau"], r["I(1)"], r["I''(1)"], r["J1(1)"], r["J2(1)"], r["verdict"]]
            lines.append("| " + " | ".join(str(c) for c in cells) + " |")
        lines.append("")
    lines += ["## Checks", "", "| suite | check | status | residual | detail |", "|---|---|---|---|---|"]
    for c in report.checks:
        res = "" if c.residual is None else f"{c.residual:.3g}"
        lines.append(f"| {c.suite} | {c.check_id} | {c.status} | {res} | {c.detail.replace('|', '/')} |")
    return "\n".join(lines) + "\n"


def parse_json(text: str) -> VerificationReport:
    d = json.loads(text)
    if d.get("schema") != "qverify.report":
        raise ValueError("not a qverify report")
    if d.get("version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report version {d.get('version')}")
    checks = tuple(CheckRecord(**c) for c in d["checks"])
    return VerificationReport(checks, d["config"], d["environment"], d["created"], d["version"])
