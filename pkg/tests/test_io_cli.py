import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conewedge import RunConfig, ValidationError, load_extension, problem_from_json, problem_to_json, validate_problem
from conewedge.cli import run

from conftest import DATA, cl2, pb, sys2x2


def run_capture(argv):
    buf = io.StringIO()
    code = run(argv, out=buf)
    return code, buf.getvalue()


# ---- problem files


@pytest.mark.parametrize("name", ["cl2_l0", "cl2_l1", "cl2_l2", "pb", "sys2x2"])
def test_data_files_validate(name):
    p = validate_problem(DATA / f"{name}.json")
    assert p.m == 2


def test_problem_round_trip():
    for p in (cl2(0), pb(), sys2x2()):
        back = problem_from_json(json.loads(json.dumps(problem_to_json(p))))
        assert back.same_as(p)
        assert back.taylor_depth == p.taylor_depth


def test_missing_order_coefficient():
    obj = problem_to_json(cl2(0))
    obj["coefficients"] = [c for c in obj["coefficients"] if c["k"] != 2]
    with pytest.raises(ValidationError) as exc:
        problem_from_json(obj)
    assert "order coefficient absent" in exc.value.errors


def test_singular_tip_coefficient():
    obj = problem_to_json(sys2x2())
    lead = next(c for c in obj["coefficients"] if c["k"] == 2)
    lead["taylor"][0] = [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]
    with pytest.raises(ValidationError) as exc:
        problem_from_json(obj)
    assert "not c-elliptic at tip" in exc.value.errors


def test_errors_are_enumerated():
    obj = problem_to_json(pb())
    del obj["name"]
    obj["coefficients"][0]["taylor"][0][0][0] = "oops"
    obj["coefficients"].append({"k": 7, "taylor": []})
    with pytest.raises(ValidationError) as exc:
        problem_from_json(obj)
    errs = exc.value.errors
    assert len(errs) >= 3
    assert any("name" in e for e in errs)
    assert any("coefficients[0].taylor[0][0][0]" in e for e in errs)
    assert any("coefficients[2].k" in e for e in errs)


def test_malformed_json_reports_position(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{\n  "name": "x",\n  "order": 2,,\n}\n')
    with pytest.raises(ValidationError, match="line 3"):
        validate_problem(f)


def test_extension_file():
    ext = load_extension(DATA / "friedrichs.json", 1)
    assert ext.mode == "span" and len(ext.basis) == 1 and ext.cutoff_radius == 0.5


def test_run_config_invariants():
    with pytest.raises(ValidationError):
        RunConfig("sweep", "p.json", r_min=10, r_max=1)
    with pytest.raises(ValidationError):
        RunConfig("sweep", "p.json", samples=4)
    assert RunConfig("sweep", "p.json", theta0_deg=-90).theta0_deg == 270.0


@settings(max_examples=30)
@given(st.floats(-1e4, 1e4, allow_nan=False))
def test_angles_normalized(a):
    cfg = RunConfig("sweep", "p.json", theta0_deg=a)
    assert 0 <= cfg.theta0_deg < 360


# ---- command line


def test_spec_b_strip():
    code, out = run_capture(["spec-b", str(DATA / "cl2_l0.json"), "--strip"])
    assert code == 0
    row = out.splitlines()[1].split()
    assert row[0] == "0+0i" and row[1] == "2" and row[-1] == "yes"
    assert "d=2" in out


def test_theta_command():
    code, out = run_capture(["theta", str(DATA / "pb.json"), "--sigma", "0,0.5"])
    assert code == 0
    assert "x^(i*(0+0.5i))  log^0  [1+0i]" in out
    assert "x^(i*(0-0.5i))  log^0  [-1+0i]" in out
    assert "x^(i*(0-0.5i))  log^1  [1+0i]" in out


def test_theta_rejects_point_outside_strip():
    code, _ = run_capture(["theta", str(DATA / "pb.json"), "--sigma", "0,0.3"])
    assert code == 2


def test_index_ladder_command():
    code, out = run_capture(["index-ladder", str(DATA / "pb.json"), "--G", "256"])
    assert code == 0
    assert "ladder=holds" in out


def test_domains_command_nonsimple_is_input_error():
    code, _ = run_capture(["domains", str(DATA / "cl2_l1.json")])
    assert code == 2


def test_unknown_flag_rejected(capsys):
    assert run(["spec-b", str(DATA / "pb.json"), "--bogus"]) == 2


def test_missing_file():
    assert run_capture(["spec-b", "no-such-file.json"])[0] == 2


def test_invalid_problem_file(tmp_path):
    obj = problem_to_json(cl2(0))
    obj["coefficients"] = []
    f = tmp_path / "p.json"
    f.write_text(json.dumps(obj))
    assert run_capture(["spec-b", str(f)])[0] == 2


def test_sweep_csv_and_sidecar(tmp_path):
    out = tmp_path / "sweep.csv"
    argv = ["sweep", str(DATA / "cl2_l0.json"), "--ext", str(DATA / "friedrichs.json"), "--ray", "0",
            "--rmin", "1", "--rmax", "100", "--samples", "8", "--G", "256", "--strategy", "covering", "--out",
            str(out)]
    assert run_capture(argv)[0] == 0
    rows = list(csv.reader(out.open()))
    meta = json.loads(Path(str(out) + ".json").read_text())
    assert rows[0] == ["lambda_re", "lambda_im", "inv_norm", "smin", "det_F_abs", "cond"]
    assert len(rows) - 1 == meta["requested_samples"] - len(meta["excluded"])
    first = out.read_bytes()
    assert run_capture(argv)[0] == 0
    assert out.read_bytes() == first


def test_atau_output_reproducible_with_seed():
    argv = ["atau-check", str(DATA / "pb.json"), "--G", "128", "--taus", "3", "--probes", "3", "--seed", "7"]
    a = run_capture(argv)
    b = run_capture(argv)
    assert a[0] == 0 and a[1] == b[1]


def test_csym_check_command():
    code, out = run_capture(["csym-check", str(DATA / "cl2_l0.json"), "--ray", "180"])
    assert code == 0 and out.startswith("ok")
    code, out = run_capture(["csym-check", str(DATA / "cl2_l0.json"), "--ray", "0"])
    assert code == 0 and out.startswith("violation")


def test_threads_env_does_not_change_results(monkeypatch):
    from conewedge import build_space, minimal_growth_sweep
    from conftest import FRIEDRICHS
    space = build_space(20.0, 128, 2)
    a = minimal_growth_sweep(cl2(0), FRIEDRICHS, np.pi, 1.0, 100.0, 8, space)
    monkeypatch.setenv("CONEWEDGE_THREADS", "4")
    b = minimal_growth_sweep(cl2(0), FRIEDRICHS, np.pi, 1.0, 100.0, 8, space)
    assert a.rows() == b.rows()
