import json
import subprocess
import sys
from pathlib import Path

import pytest

from geo3.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_check_ecs_prints_cotton_component(capsys):
    code, out, _ = run(capsys, "check", DATA / "theorem_sin.spec", "ecs")
    assert code == EXIT_OK
    assert "Ctilde[y,y] = -3" in out


def test_curvature_of_flat_metric_is_zero(capsys):
    code, doc = run_json(capsys, "curvature", DATA / "flat.spec")
    assert code == EXIT_OK
    tensors = doc["inputs"]["tensors"]
    assert tensors["tau"] == "0"
    for name in ("Gamma", "rho", "S", "C", "Ctilde", "Chat"):
        assert tensors[name] == {}


def test_curvature_at_point(capsys):
    code, doc = run_json(capsys, "curvature", DATA / "theorem_sin.spec", "--at", "0,2,0.5")
    assert code == EXIT_OK
    (entry,) = doc["inputs"]["values"].values()
    assert entry["rho"][2][2] == pytest.approx(-6.0)
    assert entry["Ctilde"][2][2] == pytest.approx(-3.0)


def test_json_schema(capsys):
    code, doc = run_json(capsys, "check", DATA / "walker_x4.spec", "parallel-cotton")
    assert code == EXIT_FAIL
    assert set(doc) == {"schema", "command", "inputs", "checks", "wall-time"}
    assert doc["schema"] == "geo3.report/1"
    (check,) = doc["checks"]
    assert set(check) >= {"id", "status", "residuals", "numeric-errors"}
    assert check["status"] == "fail"
    assert check["residuals"] == {"DCtilde[x,y,y]": "-12"}


def test_check_ids_sorted(capsys):
    _, doc = run_json(capsys, "check", DATA / "theorem_sin.spec", "ecs")
    ids = [c["id"] for c in doc["checks"]]
    assert ids == sorted(ids)


def test_nilpotent_and_recurrent(capsys):
    assert run(capsys, "check", DATA / "theorem_sin.spec", "nilpotent", "--expect", "2")[0] == EXIT_OK
    assert run(capsys, "check", DATA / "theorem_sin.spec", "nilpotent", "--expect", "3")[0] == EXIT_FAIL
    code, out, _ = run(capsys, "check", DATA / "theorem_sin.spec", "recurrent-ricci")
    assert code == EXIT_OK and "omega[x] = 1/x" in out


def test_classify_histogram_deterministic(capsys):
    args = ("classify", DATA / "theorem_sin.spec", "--points", 15, "--seed", 3, "--expect", "nilpotent-2")
    code, first = run_json(capsys, *args)
    _, second = run_json(capsys, *args)
    assert code == EXIT_OK
    assert first["inputs"]["histogram"] == {"nilpotent-2": 15}
    assert first["checks"] == second["checks"]


def test_classify_respects_env_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("GEO3_TOL", "1e-6")
    _, doc = run_json(capsys, "classify", DATA / "theorem_sin.spec", "--points", 3)
    assert doc["inputs"]["tol"] == 1e-6
    monkeypatch.setenv("GEO3_TOL", "lots")
    assert run(capsys, "classify", DATA / "theorem_sin.spec")[0] == EXIT_USAGE


def test_soliton_commands(capsys):
    assert run(capsys, "soliton", DATA / "homothetic.spec", "--kind", "homothetic")[0] == EXIT_OK
    assert run(capsys, "soliton", DATA / "gradient_cotton.spec", "--kind", "gradient-cotton")[0] == EXIT_OK
    code, doc = run_json(capsys, "soliton", DATA / "gradient_cotton.spec", "--kind", "gradient-cotton", "--lambda", "1")
    assert code == EXIT_FAIL
    assert doc["checks"][0]["residuals"]


def test_soliton_field_from_separate_file(capsys):
    code, _, _ = run(
        capsys, "soliton", DATA / "homothetic.spec", "--kind", "homothetic", "--field", DATA / "homothetic.spec"
    )
    assert code == EXIT_OK


def test_isometry(capsys):
    ok = run(capsys, "isometry", DATA / "sin_shifted.spec", DATA / "sin.spec", "--map", DATA / "shift.map")
    assert ok[0] == EXIT_OK
    code, doc = run_json(capsys, "isometry", DATA / "sin.spec", DATA / "sin.spec", "--map", DATA / "shift.map")
    assert code == EXIT_FAIL
    assert list(doc["checks"][0]["residuals"]) == ["g[y,y]"]
    assert run(capsys, "isometry", DATA / "sin.spec", DATA / "sin.spec")[0] == EXIT_USAGE


def test_oracle(capsys):
    code, doc = run_json(capsys, "oracle", DATA / "theorem_sin.spec", "--points", 10)
    assert code == EXIT_OK
    ids = {c["id"] for c in doc["checks"]}
    assert ids == {"oracle.christoffel", "oracle.ricci", "oracle.scalar", "oracle.cotton2"}


def test_oracle_tolerance_too_tight_fails(capsys):
    code, _ = run_json(capsys, "oracle", DATA / "theorem_sin.spec", "--points", 5, "--tol-cotton", "1e-14")
    assert code == EXIT_FAIL


@pytest.mark.parametrize("name", ["bad_syntax.spec", "undeclared.spec", "missing.spec"])
def test_parse_errors_exit_2(capsys, name):
    code, _, err = run(capsys, "curvature", DATA / name)
    assert code == EXIT_USAGE
    assert name in err


def test_parse_error_names_line(capsys):
    _, _, err = run(capsys, "curvature", DATA / "bad_syntax.spec")
    assert "bad_syntax.spec:3:" in err


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["check", str(DATA / "flat.spec"), "everything"])
    assert info.value.code == EXIT_USAGE
    assert run(capsys, "oracle", DATA / "flat.spec", "--points", 0)[0] == EXIT_USAGE


def test_output_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, _, _ = run(capsys, "check", DATA / "theorem_sin.spec", "ecs", "-o", target)
    assert code == EXIT_OK
    assert json.loads(target.read_text())["command"] == "check ecs"


def test_builtin_suite_section(capsys):
    code, doc = run_json(capsys, "verify-paper", "--section", "golden")
    assert code == EXIT_OK
    assert all(c["status"] == "pass" for c in doc["checks"])


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "geo3", "check", str(DATA / "theorem_sin.spec"), "ecs"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "[PASS] check.ecs" in proc.stdout
