import csv
import io
import json
import math
import subprocess
import sys

import pytest

from steklov_geom.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, EXIT_SOLVER, main


def _csv(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture
def cyl_json(tmp_path):
    path = tmp_path / "cyl.json"
    path.write_text(json.dumps({"family": "FlatCylinder", "R": 1.0, "T": 1.0}))
    return str(path)


def test_spectrum_flat_cylinder(cyl_json, capsys):
    assert main(["spectrum", "--surface", cyl_json, "--h", "0.05", "--k", "8"]) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    assert len(rows) == 9
    assert abs(float(rows[0]["sigma"])) < 1e-10
    assert float(rows[1]["sigma"]) == pytest.approx(math.tanh(1.0), rel=0.01)


def test_spectrum_outputs(cyl_json, tmp_path):
    out, ef, mat = tmp_path / "s.csv", tmp_path / "u.csv", tmp_path / "k.txt"
    code = main(["spectrum", "--surface", cyl_json, "--h", "0.2", "--k", "2", "-o", str(out),
                 "--eigenfunction", str(ef), "--dump-matrix", str(mat)])
    assert code == EXIT_OK
    assert out.read_text().startswith("k,sigma,residual\n")
    assert ef.read_text().startswith("vertex,s,t,u\n")
    assert len(mat.read_text().splitlines()[0].split()) == 3


@pytest.mark.parametrize("problem", ["N", "D"])
def test_spectrum_mixed_problem(problem, capsys):
    assert main(["spectrum", "--zoo", "cyl-unit", "--h", "0.1", "--k", "2", "--problem", problem]) == EXIT_OK
    assert len(_csv(capsys.readouterr().out)) == 3


def test_malformed_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["spectrum", "--surface", str(bad)]) == EXIT_INPUT
    assert "error" in capsys.readouterr().err


def test_invalid_spec_exits_2(tmp_path):
    p = tmp_path / "neg.json"
    p.write_text(json.dumps({"family": "FlatCylinder", "R": -1.0, "T": 1.0}))
    assert main(["spectrum", "--surface", str(p)]) == EXIT_INPUT
    assert main(["spectrum", "--surface", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert main(["spectrum", "--zoo", "no-such-surface"]) == EXIT_INPUT
    assert main(["spectrum"]) == EXIT_INPUT


def test_huge_h_exits_2(cyl_json):
    assert main(["spectrum", "--surface", cyl_json, "--h", "1e9"]) == EXIT_INPUT
    assert main(["spectrum", "--surface", cyl_json, "--h", "-1"]) == EXIT_INPUT


def test_vertex_cap_exits_2(cyl_json, monkeypatch):
    monkeypatch.setenv("STEKLOV_MAX_VERTICES", "100")
    assert main(["spectrum", "--surface", cyl_json, "--h", "0.05"]) == EXIT_INPUT


def test_solver_error_exits_3(cyl_json, monkeypatch):
    from steklov_geom import cli
    from steklov_geom.dtn_eigen import SolverError

    def boom(*a, **k):
        raise SolverError("residual too large")

    monkeypatch.setattr(cli, "steklov_spectrum", boom)
    assert main(["spectrum", "--surface", cyl_json, "--h", "0.2"]) == EXIT_SOLVER


def test_closed_form_cylinder(capsys):
    assert main(["closed-form", "cylinder", "--R", "1", "--T", "6.2832", "--k", "3"]) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    assert float(rows[1]["sigma"]) == pytest.approx(0.15915, abs=1e-5)
    assert rows[1]["mode"] == "linear"


def test_closed_form_rho(capsys):
    assert main(["closed-form", "rho"]) == EXIT_OK
    assert float(capsys.readouterr().out) == pytest.approx(1.19968, abs=1e-5)


def test_closed_form_collar(capsys):
    assert main(["closed-form", "collar", "--a", "1.7627", "--kind", "N", "--k", "2"]) == EXIT_OK
    rows = _csv(capsys.readouterr().out)
    assert float(rows[1]["sigma"]) == pytest.approx(3.5382, abs=1e-3)


def test_closed_form_invalid(capsys):
    assert main(["closed-form", "cylinder", "--R", "0", "--T", "1"]) == EXIT_INPUT
    assert main(["closed-form", "mixed", "--a", "1", "--L", "-2"]) == EXIT_INPUT


def test_constants(capsys):
    assert main(["constants", "--g", "0", "--b", "4"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["L_gb"] == pytest.approx(76.52, abs=5e-3)
    assert main(["constants", "--g", "1", "--b", "2"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["C2"] == pytest.approx(2.2444, abs=1e-4)
    assert main(["constants", "--g", "1", "--b", "2", "--format", "csv"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("name,value\n")


def test_constants_excluded_signature(capsys):
    assert main(["constants", "--g", "0", "--b", "3"]) == EXIT_INPUT
    assert "g != 0 or b > 3" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["spectrum", "--k", "many"])
    assert exc.value.code == EXIT_INPUT
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == EXIT_INPUT


def test_verify_unknown_suite(tmp_path):
    assert main(["verify", "--suite", "bogus", "--report", str(tmp_path / "r.json")]) == EXIT_INPUT


def test_verify_closed_forms_is_byte_identical(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "--suite", "closed-forms", "--report", str(p), "--quiet"]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()
    doc = json.loads(paths[0].read_text())
    assert doc["summary"]["fail"] == 0
    assert doc["summary"]["total"] == len(doc["records"])
    assert "runtime" not in doc["records"][0]


def test_verify_timings_and_fail_exit(tmp_path, monkeypatch):
    from steklov_geom import verify

    def failing(bench):
        yield verify.CheckRecord("x/broken", "-", None, {}, "fail")

    monkeypatch.setitem(verify.RUNNERS, "constants", failing)
    path = tmp_path / "r.json"
    assert main(["verify", "--suite", "constants", "--report", str(path), "--timings", "--quiet"]) == EXIT_FAIL
    doc = json.loads(path.read_text())
    assert "runtime" in doc["records"][0]


def test_bounds_and_sweep(capsys):
    assert main(["bounds", "--zoo", "cyl-unit", "--h", "0.1", "--k", "4"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["counts"]["violated"] == 0
    assert main(["sweep", "--zoo", "cyl-unit", "--h", "0.1"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("t,perimeter,area,trace,admissible\n")


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "steklov_geom.cli", "closed-form", "rho"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("1.1996")
