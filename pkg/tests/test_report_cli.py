from __future__ import annotations

import csv
import io
import json
from dataclasses import replace

import pytest

from qverify.cli import main
from qverify.report import (DEFAULT_TOLERANCES, SCHEMA_VERSION, ConfigError, RunConfig, emit, load_config,
                            parse_json, run, sign_table)

CHEAP = RunConfig(n_range=(24, 25), suites=("critical-point", "gluing-schedule"), hessian_n=(25,),
                  weyl_seeds=1, timings=False)


@pytest.fixture(scope="module")
def report():
    return run(CHEAP)


def _check(rep, check_id):
    hits = [c for c in rep.checks if c.check_id == check_id]
    assert len(hits) == 1, check_id
    return hits[0]


def test_config_validation_names_field():
    with pytest.raises(ConfigError) as e:
        RunConfig(hessian_n=(24,))
    assert e.value.field == "dimensions"
    with pytest.raises(ConfigError) as e:
        RunConfig(suites=("nope",))
    assert e.value.field == "suites"
    with pytest.raises(ConfigError) as e:
        RunConfig(tolerances=(("bogus", 1.0),))
    assert e.value.field == "tolerances"
    with pytest.raises(ConfigError) as e:
        RunConfig(samples=10)
    assert e.value.field == "samples"
    with pytest.raises(ConfigError) as e:
        RunConfig(jobs=0)
    assert e.value.field == "jobs"


def test_cross_check_dimensions_below_25_allowed():
    cfg = RunConfig(sphere_n=(5,), bubble_n=(5,), curvature_n=6)
    assert cfg.sphere_n == (5,)


def test_load_config_sections():
    text = """
[run]
n_range = 25..27
seed = 7
suites = bubble, convolution
format = csv
timings = no

[dimensions]
sphere_n = 5,6

[tolerances]
bubble_fd = 1e-5
"""
    cfg = load_config(text)
    assert cfg.n_range == (25, 26, 27)
    assert cfg.seed == 7
    assert cfg.suites == ("bubble", "convolution")
    assert cfg.fmt == "csv" and cfg.timings is False
    assert cfg.sphere_n == (5, 6)
    assert cfg.tol("bubble_fd") == 1e-5
    assert cfg.tol("det") == DEFAULT_TOLERANCES["det"]


@pytest.mark.parametrize("text, name", [
    ("[run]\nseed = x\n", "run.seed"),
    ("[run]\nwhatever = 1\n", "run.whatever"),
    ("[tolerances]\nbubble_fd = fast\n", "tolerances.bubble_fd"),
    ("no section header\n", "config"),
])
def test_load_config_errors(text, name):
    with pytest.raises(ConfigError) as e:
        load_config(text)
    assert e.value.field == name


def test_pole_dimension_is_isolated(report):
    bad = _check(report, "sign-table/N=24")
    assert bad.status == "fail"
    assert "N-24" in bad.detail
    good = _check(report, "sign-table/N=25")
    assert good.status == "pass"
    assert _check(report, "tau-route/N=25").status == "pass"
    assert _check(report, "transcription-I/N=25").status == "pass"


def test_every_check_appears_once_and_failures_kept(report):
    ids = [(c.suite, c.check_id) for c in report.checks]
    assert len(ids) == len(set(ids))
    assert report.exit_code == 1
    # the printed Hessian polynomials and the gluing onset are genuine failures
    assert _check(report, "transcription-J/N=25").status == "fail"
    assert any(c.suite == "gluing-schedule" and c.status == "fail" for c in report.checks)
    assert report.counts()["fail"] >= 3


def test_hessian_and_local_min(report):
    h = _check(report, "hessian/N=25/seed=0")
    assert h.status == "pass" and h.residual > 0
    assert _check(report, "local-min/N=25").status == "pass"


def test_json_round_trip(report):
    text = emit(report, "json")
    again = parse_json(text)
    assert again == report
    assert emit(again, "json") == text
    d = json.loads(text)
    assert d["version"] == SCHEMA_VERSION
    assert set(d["checks"][0]) == {"suite", "check_id", "anchor", "status", "residual", "runtime",
                                   "detail", "data"}


def test_parse_json_rejects_foreign():
    with pytest.raises(ValueError):
        parse_json('{"schema": "other"}')
    with pytest.raises(ValueError):
        parse_json('{"schema": "qverify.report", "version": 99}')


def test_csv_rows(report):
    text = emit(report, "csv")
    rows = list(csv.reader(io.StringIO(text)))
    assert len(rows) == len(report.checks) + 1
    assert rows[0] == ["suite", "check_id", "anchor", "status", "residual", "runtime", "detail"]


def test_markdown_sign_table(report):
    rows = {r["N"]: r for r in sign_table(report)}
    r25 = rows[25]
    assert r25["verdict"] == "pass"
    assert all(r25["conditions"].values()) if isinstance(r25["conditions"], dict) else all(r25["conditions"])
    assert r25["tau"].startswith("17005.13391062546")
    assert len(r25["tau"].replace(".", "")) == 30
    md = emit(report, "markdown")
    assert "| N | tau | I(1) | I''(1) | J1(1) | J2(1) | verdict |" in md
    assert [ln for ln in md.splitlines() if ln.startswith("| 25 | 17005.")]


def test_unknown_format():
    with pytest.raises(ConfigError):
        emit(run(replace(CHEAP, suites=())), "xml")


def test_empty_selection_nothing_ran():
    rep = run(replace(CHEAP, suites=()))
    assert rep.checks == () and rep.exit_code == 1


def test_reproducible_modulo_timestamp(report):
    again = run(CHEAP)
    a = emit(report, "json").splitlines()
    b = emit(again, "json").splitlines()
    diff = [(x, y) for x, y in zip(a, b) if x != y]
    assert len(a) == len(b)
    assert all('"created"' in x for x, _ in diff)


def test_parallel_matches_serial(report):
    par = run(replace(CHEAP, jobs=2))
    assert [c.check_id for c in par.checks] == [c.check_id for c in report.checks]
    assert [c.status for c in par.checks] == [c.status for c in report.checks]


def test_suite_crash_recorded(monkeypatch):
    from qverify import report as rmod

    def boom(cfg):
        raise RuntimeError("kaput")

    monkeypatch.setitem(rmod._RUNNERS, "convolution", boom)
    rep = run(replace(CHEAP, suites=("convolution", "gluing-schedule")))
    crash = _check(rep, "suite")
    assert crash.status == "fail" and "kaput" in crash.detail
    assert any(c.suite == "gluing-schedule" for c in rep.checks)


# command line

def test_cli_usage_errors(capsys):
    assert main(["verify-bubble", "--tol", "nokey"]) == 2
    assert "tol" in capsys.readouterr().err
    assert main(["verify-bubble", "--tol", "bogus=1"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["verify-critical-point", "--n", "2x"]) == 2
    assert main(["verify-sphere-lemmas", "--n", "3"]) == 2
    assert main(["verify-all", "--config", "/nonexistent/file.ini"]) == 2
    assert main(["verify-all", "--format", "xml"]) == 2


def test_cli_nothing_ran(capsys):
    assert main(["verify-all", "--suites", ""]) == 1
    assert "nothing ran" in capsys.readouterr().err


def test_cli_gluing_and_config_file(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nsuites = gluing-schedule\nformat = json\ntimings = false\n")
    out = tmp_path / "r.json"
    code = main(["verify-all", "--config", str(cfg), "--out", str(out)])
    rep = parse_json(out.read_text())
    assert code == 1 == rep.exit_code
    assert {c.suite for c in rep.checks} == {"gluing-schedule"}
    assert all(c.runtime == 0.0 for c in rep.checks)


def test_cli_internal_error(monkeypatch):
    from qverify import cli

    def boom(*a, **k):
        raise RuntimeError("broken")

    monkeypatch.setattr(cli, "run", boom)
    assert main(["verify-convolution"]) == 3


def test_cli_solve_tau(tmp_path):
    out = tmp_path / "tau.json"
    assert main(["solve-tau", "--n", "25", "--format", "json", "--out", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert rows[0]["N"] == 25 and rows[0]["printed_exact_match"] is True
    assert any(r.startswith("17005.13391062546") for r in rows[0]["roots"])
    assert main(["solve-tau", "--n", "24", "--out", str(tmp_path / "bad.json")]) == 1
