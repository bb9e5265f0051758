import json
import subprocess
import sys

import pytest

from critbound.cli import SCHEMA, load_config, resolve, run


def _run(tmp_path, *args):
    code = run([*args, "-o", str(tmp_path)])
    return code


def _report(tmp_path, command, prefix=""):
    return json.loads((tmp_path / f"{prefix}{command}.json").read_text())


def test_cover_defaults(tmp_path, capsys):
    assert _run(tmp_path, "cover") == 0
    assert capsys.readouterr().out.strip() == "cover: n=1 covered=0.6"
    assert _report(tmp_path, "cover")["result"]["n"] == 1


def test_gaps_golden_five_points(tmp_path):
    assert _run(tmp_path, "gaps") == 0
    result = _report(tmp_path, "gaps")["result"]
    assert result["distinct"] == 2
    assert sum(g["multiplicity"] for g in result["gaps"]) == 5


def test_envelope_worked_example(tmp_path):
    assert _run(tmp_path, "envelope") == 0
    r = _report(tmp_path, "envelope")["result"]
    assert (r["n_d"], r["h"], r["l"]) == (2, 80.0, 84.0)


def test_powerlaw_scan(tmp_path):
    assert _run(tmp_path, "powerlaw") == 0
    r = _report(tmp_path, "powerlaw")["result"]
    assert r["accepted"]["accepted"] and r["j"] == len(r["scan_log"])


def test_simulate_writes_report_and_csv(tmp_path):
    code = _run(tmp_path, "simulate", "-s", "system.y=resonant", "-s", "simulate.steps=300",
                "-s", "simulate.bound=100", "-s", "simulate.visit_h=50")
    assert code == 0
    r = _report(tmp_path, "simulate")["result"]
    assert r["probe"]["first_violation"] == 102
    assert r["recurrence"]["deviation"] <= r["recurrence"]["tolerance"]
    assert r["summary"]["visiting_moments"] == [52]
    assert (tmp_path / "trajectory.csv").read_text().startswith("n,re,im,radius,arg\n")


def test_family_params_sections(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[system]\nphi = sqrt2\nf = radial\ny = decay\n\n[f]\nc = -1.0\n\n"
                   "[y]\np = 1.0\n\n[simulate]\nx1 = 3+4j\nsteps = 50\n\n"
                   "[output]\nprefix = r1_\ncsv = false\n")
    assert run(["simulate", "-c", str(ini), "-o", str(tmp_path)]) == 0
    report = _report(tmp_path, "simulate", "r1_")
    assert report["config"]["f"] == {"c": "-1.0"}
    assert report["result"]["system"]["y"]["params"]["p"] == 1.0
    assert not (tmp_path / "r1_trajectory.csv").exists()


def test_reports_are_byte_identical(tmp_path):
    args = ["certify", "-s", "system.f=radial", "-s", "certify.horizon=200",
            "-s", "certify.grid=64", "-o", str(tmp_path)]
    assert run(args) == 0
    text = (tmp_path / "certify.json").read_text()
    (tmp_path / "certify.json").unlink()
    assert run(args) == 0
    assert (tmp_path / "certify.json").read_text() == text
    data = json.loads(text)
    assert json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n" == text
    assert data["result"]["verdict"] == "pass"


def test_config_round_trip(tmp_path):
    """Feeding a report's resolved config back in reproduces the report."""
    assert _run(tmp_path, "phi", "-s", "system.f=powerlaw", "-s", "phi.grid=64",
                "-s", "output.csv=false") == 0
    first = (tmp_path / "phi.json").read_text()
    cfg = json.loads(first)["config"]
    ini = tmp_path / "again.ini"
    ini.write_text("\n".join(f"[{sec}]\n" + "\n".join(f"{k} = {v}" for k, v in keys.items())
                             for sec, keys in cfg.items()) + "\n")
    (tmp_path / "phi.json").unlink()
    assert run(["phi", "-c", str(ini)]) == 0
    assert (tmp_path / "phi.json").read_text() == first


@pytest.mark.parametrize("args, code", [
    (["cover", "-s", "cover.bogus=1"], 2),
    (["cover", "-s", "nosuch.key=1"], 2),
    (["cover", "-s", "cover.delta=abc"], 2),
    (["simulate", "-s", "system.f=nope"], 2),
    (["counterexample", "-s", "counterexample.kind=other"], 2),
    (["cover", "-s", "cover.delta=0"], 4),
    (["envelope", "-s", "envelope.eps=0.03125"], 4),
    (["powerlaw", "-s", "powerlaw.alpha=0.9"], 4),
    (["simulate", "-s", "system.f=constant", "-s", "f.c=1e308", "-s", "system.y=resonant",
      "-s", "y.c=1e308", "-s", "simulate.steps=10"], 3),
    (["counterexample", "-s", "counterexample.x1=0.5", "-s", "counterexample.steps=50"], 5),
])
def test_exit_codes(tmp_path, args, code, capsys):
    assert _run(tmp_path, *args) == code
    err = capsys.readouterr().err
    if code in (2, 3, 4):
        assert err.startswith("critbound:")


def test_precondition_message_names_constraint(tmp_path, capsys):
    assert _run(tmp_path, "envelope", "-s", "envelope.eps=0.03125") == 4
    assert "[eps < |beta|/16]" in capsys.readouterr().err


def test_property_failure_still_writes_report(tmp_path):
    assert _run(tmp_path, "counterexample", "-s", "counterexample.x1=0.5",
                "-s", "counterexample.steps=50") == 5
    r = _report(tmp_path, "counterexample")["result"]
    assert r["holds"] is False and r["check"]["first_failure"] == 3


@pytest.mark.parametrize("kind, extra", [("decimal-warp", ["-s", "counterexample.x1=2.5"]),
                                         ("orbit-switch", ["-s", "counterexample.x1=1.5"]),
                                         ("slow-drift", ["-s", "counterexample.steps=20000",
                                                         "-s", "counterexample.bounds=10"])])
def test_counterexample_kinds(tmp_path, kind, extra):
    assert _run(tmp_path, "counterexample", "-s", f"counterexample.kind={kind}", *extra) == 0
    assert _report(tmp_path, "counterexample")["result"]["holds"] is True


def test_verify_lemmas(tmp_path, capsys):
    assert _run(tmp_path, "verify-lemmas", "-s", "verify-lemmas.cases=2000") == 0
    out = capsys.readouterr().out
    assert out.startswith("verify-lemmas:") and "2000/2000" in out


def test_resolve_fills_only_relevant_sections():
    cfg = resolve(load_config(None, []), "cover")
    assert cfg["cover"] == SCHEMA["cover"]
    assert "simulate" not in cfg and "system" in cfg


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "critbound.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("critbound ")
