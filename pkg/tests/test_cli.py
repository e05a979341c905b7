import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from dpspec._schema import validate_document
from dpspec.cli import main

DATA = Path(__file__).parent / "data" / "cli"
GOLDEN = Path(__file__).parent / "data" / "golden"

INVOCATIONS = {
    "verify_ok": ["verify", "--mechanism", "rr.json", "--spec", "pure-ln3.json"],
    "verify_fail": ["verify", "--mechanism", "rr.json", "--spec", "pure-eps1.json"],
    "epsilon": ["epsilon", "--mechanism", "rr.json", "--spec-sans-budget", "pure.json"],
    "compose": ["compose", "--spec", "pure-ln3.json", "--spec", "pure-ln2.json"],
    "allocate": ["allocate", "--spec", "pure-ln3.json", "--weight", "a=1", "--weight", "b=2"],
    "universes": ["universes", "--spec", "count4.json", "--statistic", "sum.json"],
    "assess": ["assess", "--regime", "open-data.json"],
    "report": ["report", "--mechanism", "rr.json", "--spec", "pure-ln3.json", "--preset", "synthetic-with-validation"],
}


def run(args, capsys):
    args = [str(DATA / a) if a.endswith(".json") else a for a in args]
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_satisfied(capsys):
    code, out, _ = run(INVOCATIONS["verify_ok"], capsys)
    assert code == 0
    assert out.startswith("satisfied")


def test_verify_not_satisfied_renders_witness(capsys):
    code, out, _ = run(INVOCATIONS["verify_fail"], capsys)
    assert code == 1
    assert "not satisfied" in out and "pair (0, 1)" in out and "ln(3)" in out


def test_epsilon_prints_exact_and_decimal(capsys):
    code, out, _ = run(INVOCATIONS["epsilon"], capsys)
    assert code == 0 and out == "ln(3) ≈ 1.098612\n"


def test_assess_open_data(capsys):
    code, out, _ = run(INVOCATIONS["assess"] + ["--format", "structured"], capsys)
    doc = json.loads(out)
    rows = {r["dimension"]: r["label"] for r in doc["assessment"]["reports"][0]["dimensions"]}
    assert code == 0 and rows["projects"] == rows["settings"] == "none"


@pytest.mark.parametrize("name", sorted(INVOCATIONS))
def test_structured_output_matches_golden_file(name, capsys):
    code, out, _ = run(INVOCATIONS[name] + ["--format", "structured"], capsys)
    assert code == (1 if name == "verify_fail" else 0)
    validate_document(json.loads(out), "report")
    golden = GOLDEN / f"{name}.json"
    if os.environ.get("DPSPEC_REGEN_GOLDEN"):
        golden.parent.mkdir(parents=True, exist_ok=True)
        golden.write_text(out)
    assert out == golden.read_text()
    # byte-stable across runs
    assert run(INVOCATIONS[name] + ["--format", "structured"], capsys)[1] == out


def test_output_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out, _ = run(INVOCATIONS["verify_ok"] + ["--format", "structured", "--output", str(target)], capsys)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["satisfied"] is True


def test_missing_file(capsys):
    code, _, err = run(["verify", "--mechanism", "nope.json", "--spec", "pure-ln3.json"], capsys)
    assert code == 2 and "nope.json: file not found" in err


def test_schema_violation_names_file_and_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"outputs": [0, 1], "rows": {"0": {"0": "x"}}}))
    code, _, err = run(["verify", "--mechanism", str(bad), "--spec", "pure-ln3.json"], capsys)
    assert code == 2 and "bad.json" in err and "$['rows']['0']['0']" in err


def test_non_stochastic_row(tmp_path, capsys):
    bad = tmp_path / "short.json"
    bad.write_text(json.dumps({"outputs": [0, 1], "rows": {"0": {"0": "1/2", "1": "2/5"}, "1": {"0": 1}}}))
    code, _, err = run(["verify", "--mechanism", str(bad), "--spec", "pure-ln3.json"], capsys)
    assert code == 2 and "short.json" in err and "dataset 0" in err


def test_domain_mismatch(tmp_path, capsys):
    spec = json.loads((DATA / "count4.json").read_text())
    spec["budget"] = 1
    path = tmp_path / "four.json"
    path.write_text(json.dumps(spec))
    code, _, err = run(["verify", "--mechanism", "rr.json", "--spec", str(path)], capsys)
    assert code == 2 and "rr.json" in err and "2 rows" in err


def test_invalid_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{")
    code, _, err = run(["assess", "--regime", str(path)], capsys)
    assert code == 2 and "broken.json: line 1" in err


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--mechanism", "x.json"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["epsilon", "--mechanism", "a", "--spec-sans-budget", "b", "--bogus"])
    assert exc.value.code == 2


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dpspec.cli", *INVOCATIONS["epsilon"]],
        cwd=DATA,
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "ln(3) ≈ 1.098612"
