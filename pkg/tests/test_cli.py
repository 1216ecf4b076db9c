from __future__ import annotations

import json
import subprocess
import sys

import pytest

from artifact.classpoly import resolve_path
from artifact.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classpoly_writes_artifacts(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "classpoly", "--config", "ex71_f.json", "--out", str(tmp_path), "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["report"]["expected_match"] and data["report"]["expected_literal_match"]
    assert data["polynomial"]["coefficients"][-1] == [1238160088, 0, 0, 0]
    for suffix in (".txt", ".json", ".report.json"):
        assert (tmp_path / ("ex71_f" + suffix)).exists()
    assert (tmp_path / "ex71_f.txt").read_text().startswith("1238160088 X^3")


def test_classpoly_output_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(capsys, "classpoly", "--config", "ex72_theta.json", "--out", str(a))[0] == 0
    assert run_cli(capsys, "classpoly", "--config", "ex72_theta.json", "--out", str(b))[0] == 0
    for name in ("ex72_theta.txt", "ex72_theta.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_classpoly_paper_format(capsys):
    code, out, _ = run_cli(capsys, "classpoly", "--config", "ex72_theta.json")
    assert code == 0
    assert out.startswith("453647401 X^4")
    assert "real: [1, 4]  conjugate pairs: [[2, 3]]" in out
    assert "expected polynomial: match (literal: yes)" in out


def test_malformed_config_key(capsys, tmp_path):
    cfg = json.loads(open(resolve_path("ex71_f.json")).read())
    cfg["levle"] = cfg.pop("level")
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run_cli(capsys, "classpoly", "--config", str(path), "--format", "json")
    assert code == 2
    err = json.loads(out)
    assert err["error"] == "config" and err["exit_code"] == 2
    assert "levle" in err["message"]


def test_wrong_type_in_config(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"field": [57], "invariant": "igusa_j1"}))
    code, out, err = run_cli(capsys, "classpoly", "--config", str(path))
    assert code == 2
    assert "field" in err


def test_missing_config(capsys, tmp_path):
    code, _, err = run_cli(capsys, "classpoly", "--config", str(tmp_path / "nope.json"))
    assert code == 2
    assert "not found" in err


def test_mismatched_expected_gives_exit_1(capsys, tmp_path):
    cfg = json.loads(open(resolve_path("ex71_j1.json")).read())
    cfg["expected"]["coefficients"][0][0] += 1
    path = tmp_path / "wrong.json"
    path.write_text(json.dumps(cfg))
    code, out, _ = run_cli(capsys, "classpoly", "--config", str(path))
    assert code == 1
    assert "MISMATCH" in out


def test_verify_paper_system(capsys):
    code, out, _ = run_cli(capsys, "verify", "ex73_system.txt")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_verify_tampered_system(capsys, tmp_path):
    text = open(resolve_path("ex73_system.txt")).read().replace("-35w - 19", "-35w - 17")
    path = tmp_path / "tampered.txt"
    path.write_text(text)
    code, out, _ = run_cli(capsys, "verify", str(path), "--format", "json")
    assert code == 1
    rep = json.loads(out)
    assert not rep["ok"] and rep["first_failure"]


def test_verify_labels_failure(capsys, tmp_path):
    text = open(resolve_path("ex71_system.txt")).read().replace("[w + 2, 19, -18w + 57]", "[w + 2, 1, 3]")
    path = tmp_path / "dup.txt"
    path.write_text(text)
    code, out, _ = run_cli(capsys, "verify", str(path))
    assert code == 1
    assert "FAIL  labels distinct" in out


def test_nsystem_then_verify(capsys, tmp_path):
    path = tmp_path / "sys.txt"
    code, out, _ = run_cli(capsys, "nsystem", "--config", "ex73_double.json", "--out", str(path))
    assert code == 0
    assert out.startswith("field: 53 601")
    code, out, _ = run_cli(capsys, "verify", str(path))
    assert code == 0


def test_eval_first_conjugate(capsys):
    code, out, _ = run_cli(capsys, "eval", "--config", "ex71_f.json", "--index", "1")
    assert code == 0
    assert "4.31041770567796242256320" in out
    assert "1.05769871912283540433297" in out


def test_eval_index_out_of_range(capsys):
    code, _, err = run_cli(capsys, "eval", "--config", "ex71_f.json", "--index", "9")
    assert code == 2
    assert "index" in err


def test_selftest(capsys):
    code, out, _ = run_cli(capsys, "selftest", "--seed", "5")
    assert code == 0
    assert "FAIL" not in out


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "artifact.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for cmd in ("classpoly", "nsystem", "verify", "eval", "selftest"):
        assert cmd in res.stdout
