import json
import math
import subprocess
import sys

import pytest

from geocurrents.cli import EXIT_FAILURE, EXIT_OK, EXIT_VIOLATION, run


def _doc(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def test_classify(capsys):
    code, doc = _doc(capsys, ["classify", "a1", "b1"])
    assert code == EXIT_OK and doc["result"]["class"] == "RCross"
    assert doc["exit_code"] == 0


def test_classify_common_power_is_a_failure(capsys):
    code = run(["classify", "a1", "a1 a1"])
    captured = capsys.readouterr()
    assert code == EXIT_FAILURE
    assert "CommonPowerError" in captured.err


def test_intersect_words_and_files(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps([{"word": "a1", "weight": 2.0}]))
    code, doc = _doc(capsys, ["intersect", str(path), "b1", "--oriented"])
    assert code == EXIT_OK
    assert doc["result"]["intersection"] == 2.0 and doc["result"]["right_handed"] == 2.0


def test_axioms_exit_codes(capsys):
    code, doc = _doc(capsys, ["axioms", "--functional", "hyperbolic", "--suite", "smoothing",
                              "--pair-radius", "3", "--pair-cap", "80"])
    assert code == EXIT_OK
    code, doc = _doc(capsys, ["axioms", "--functional", "hyperbolic", "--suite", "lamination",
                              "--pair-radius", "3", "--pair-cap", "80"])
    assert code == EXIT_VIOLATION
    failing = [r for r in doc["result"]["reports"] if not r["passed"]]
    assert failing and failing[0]["witness"] is not None


def test_unknown_functional_is_a_failure(capsys):
    assert run(["axioms", "--functional", "nope"]) == EXIT_FAILURE
    capsys.readouterr()


def test_period_and_recover(capsys):
    code, doc = _doc(capsys, ["period", "--word", "a1"])
    assert code == EXIT_OK
    assert doc["result"]["period"] == pytest.approx(2 * math.acosh(1 + math.sqrt(2) / 2), abs=1e-9)
    code, doc = _doc(capsys, ["period", "--word", "b1", "--curve", "a1", "--sign", "-"])
    assert doc["result"]["period"] == 1
    code, doc = _doc(capsys, ["recover", "--functional", "hyperbolic", "--word", "a1 b1"])
    assert code == EXIT_OK
    assert doc["result"]["recovery"]["value"] == pytest.approx(2 * math.acosh(1 + math.sqrt(2)), abs=1e-6)


def test_box_measure_from_targets(capsys, tmp_path):
    path = tmp_path / "box.json"
    path.write_text(json.dumps({"x": "a1", "targets": [304, 14, 81, 141.5], "degrees": True, "eps": 15}))
    code, doc = _doc(capsys, ["box-measure", "--functional", "hyperbolic", "--box", str(path)])
    assert code == EXIT_OK
    res = doc["result"]
    assert res["estimate"]["converged"]
    assert res["estimate"]["value"] == pytest.approx(res["liouville"], abs=1e-6)


def test_csv_output(capsys):
    code = run(["axioms", "--functional", "zero", "--suite", "positivity", "--format", "csv"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert out.splitlines()[0].startswith("axiom,")


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 5, "tol": 1e-8}))
    code, doc = _doc(capsys, ["--config", str(cfg), "classify", "a1", "b1", "--seed", "7"])
    assert code == EXIT_OK
    assert doc["config"]["seed"] == 7 and doc["config"]["tol"] == 1e-8


def test_reports_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        argv = ["axioms", "--functional", "hyperbolic", "--suite", "all", "--pair-radius", "3",
                "--pair-cap", "60", "--seed", "11", "--out", str(path)]
        run(argv)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "geocurrents", "classify", "a1", "a2"],
                         capture_output=True, text=True)
    assert out.returncode == EXIT_OK
    assert json.loads(out.stdout)["result"]["class"]
