"""Command-line driver.

Exit codes: 0 all checks pass, 1 a check failed (or nothing ran),
2 usage or configuration error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .report import SUITES, ConfigError, RunConfig, _ints, emit, load_config, run

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

_COMMANDS = {
    "verify-critical-point": ("critical-point", "gluing-schedule"),
    "verify-sphere-lemmas": ("sphere-lemmas",),
    "verify-bubble": ("bubble",),
    "verify-curvature": ("curvature",),
    "verify-residual": ("residual-decay",),
    "verify-convolution": ("convolution",),
    "verify-all": SUITES,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit with 2, as argparse does, but via our path
        self.print_usage(sys.stderr)
        raise ConfigError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", help="dimension(s), e.g. 25 or 25,30")
    common.add_argument("--n-range", help="dimension range, e.g. 25..40")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                        help="tolerance override (repeatable)")
    common.add_argument("--format", choices=("json", "csv", "markdown"), help="report format")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--config", help="sectioned key = value config file")
    common.add_argument("--jobs", type=int, help="run suites in this many worker processes")
    common.add_argument("--no-timings", action="store_true", help="record runtimes as 0 (byte-stable json)")
    common.add_argument("--suites", help="comma-separated suite list (verify-all only)")

    p = _Parser(prog="qverify", description="Verification engine for the reduced-energy construction.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[common])
    sub.add_parser("solve-tau", parents=[common])
    return p


def _config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from exc
        cfg = load_config(text, cfg)
    kw = {}
    try:
        if args.n_range:
            kw["n_range"] = _ints(args.n_range)
        if args.n:
            ns = _ints(args.n)
            kw["n_range"] = ns
            if args.command == "verify-residual":
                kw["residual_n"] = ns[0]
            if args.command == "verify-curvature":
                kw["curvature_n"] = ns[0]
            if args.command == "verify-bubble":
                kw["bubble_n"] = ns
            if args.command == "verify-sphere-lemmas":
                kw["sphere_n"] = ns
    except ValueError as exc:
        raise ConfigError("n", str(exc)) from exc
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.no_timings:
        kw["timings"] = False
    if args.jobs is not None:
        kw["jobs"] = args.jobs
    if args.samples is not None:
        kw["samples"] = args.samples
    if args.format:
        kw["fmt"] = args.format
    if args.out:
        kw["out"] = args.out
    if args.tol:
        tols = dict(cfg.tolerances)
        for item in args.tol:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError("tol", f"expected KEY=VALUE, got {item!r}")
            try:
                tols[key.strip()] = float(value)
            except ValueError as exc:
                raise ConfigError("tol", f"cannot parse {value!r}") from exc
        kw["tolerances"] = tuple(sorted(tols.items()))
    suites = _COMMANDS.get(args.command, ())
    if args.command == "verify-all":
        suites = cfg.suites
        if args.suites is not None:
            suites = tuple(s.strip() for s in args.suites.split(",") if s.strip())
    kw["suites"] = tuple(suites)
    return replace(cfg, **kw)


def _solve_tau(cfg: RunConfig) -> tuple[str, int]:
    import mpmath

    from .reduced_energy import solve_tau, verify_lemma81

    rows = []
    code = EXIT_OK
    for N in cfg.n_range:
        try:
            sol = solve_tau(N)
            rep = verify_lemma81(N)
        except Exception as exc:  # noqa: BLE001 - reported per N
            rows.append({"N": N, "error": f"{type(exc).__name__}: {exc}"})
            code = EXIT_FAIL
            continue
        rows.append({
            "N": N,
            "roots": [mpmath.nstr(v, 40) for v in sol.values],
            "accepted": None if rep.accepted_index is None else rep.accepted_index,
            "printed": mpmath.nstr(sol.printed_value, 40),
            "printed_exact_match": sol.exact_match,
        })
    if cfg.fmt == "json":
        return json.dumps(rows, indent=2) + "\n", code
    lines = ["N,root_minus,root_plus,accepted,printed_exact_match"] if cfg.fmt == "csv" else \
        ["| N | root (-) | root (+) | accepted | printed matches |", "|---|---|---|---|---|"]
    for r in rows:
        if "error" in r:
            cells = [r["N"], r["error"], "", "", ""]
        else:
            cells = [r["N"], *r["roots"], r["accepted"], r["printed_exact_match"]]
        lines.append(",".join(map(str, cells)) if cfg.fmt == "csv" else "| " + " | ".join(map(str, cells)) + " |")
    return "\n".join(lines) + "\n", code


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
    except ConfigError as exc:
        print(f"qverify: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:     # --help
        return int(exc.code or 0)
    try:
        if args.command == "solve-tau":
            text, code = _solve_tau(cfg)
            _write(text, cfg.out)
            return code
        report = run(cfg, progress=lambda r: print(f"[{r.status:4}] {r.suite}: {r.check_id}",
                                                   file=sys.stderr))
        _write(emit(report, cfg.fmt), cfg.out)
        if not report.checks:
            print("qverify: nothing ran", file=sys.stderr)
        return report.exit_code
    except ConfigError as exc:
        print(f"qverify: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"qverify: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
