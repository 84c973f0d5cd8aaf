import csv
import io
import json
import subprocess
import sys

import pytest

from tscalc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write_csv(path, rows):
    path.write_text("t,f,g\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))
    return str(path)


GOOD_ROWS = [(0, 0, 0), (1, 1, 1), (2, 4, 2), (3, 9, 3), (4, 16, 4)]


def test_qexp_at_zero(capsys):
    code, out, _ = run(capsys, "qexp", "--q", "0.5", "--x", "0", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["value"] == "1.0" and d["terms_used"] == 1


def test_qexp_outside_radius_is_usage_error(capsys):
    code, out, err = run(capsys, "qexp", "--q", "0.5", "--x", "2")
    assert code == 2 and out == "" and "radius" in err


def test_bad_q_is_usage_error(capsys):
    code, _, err = run(capsys, "qexp", "--q", "1.5", "--x", "0")
    assert code == 2 and "q must lie" in err


def test_missing_argument_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bounds", "--q", "0.5"])
    assert info.value.code == 2


def test_bounds_csv(capsys):
    code, out, _ = run(capsys, "bounds", "--q", "0.5", "--a-exp", "4", "--b-exp", "0", "--n", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4
    assert all(float(r["lower_margin"]) >= -1e-10 and float(r["upper_margin"]) >= -1e-10 for r in rows)


def test_bounds_invalid_problem(capsys):
    code, _, err = run(capsys, "bounds", "--q", "0.5", "--a-exp", "0", "--b-exp", "0", "--n", "2")
    assert code == 2 and err.startswith("tscalc: error:")


def test_bounds_table_and_off_lattice(capsys):
    code, out, _ = run(capsys, "bounds", "--q", "0.5", "--a-exp", "4", "--b-exp", "0", "--n", "3", "--at", "0.3")
    assert code == 0 and "outside the scale" in out and "all_passed" in out


def test_verify_chain(capsys):
    code, out, _ = run(capsys, "verify", "chain", "--q", "0.5", "--a-exp", "3", "--b-exp", "0", "--n", "1", "--format", "json")
    assert code == 0 and json.loads(out)["passed"] is True


def test_scale_info_csv(capsys):
    code, out, _ = run(capsys, "scale", "info", "--scale", "finite 0,1,2,4", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "t,sigma,rho,mu,nu,right,left"
    assert lines[3] == "2,4,1,2,1,scattered,scattered"


def test_scale_info_bad_spec(capsys):
    code, _, _ = run(capsys, "scale", "info", "--scale", "spiral")
    assert code == 2


def test_verify_lhopital_small(capsys):
    code, out, _ = run(capsys, "verify", "lhopital", "--trials", "30", "--seed", "2", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["summary"]["violations"] == 0 and d["summary"]["trials"] == 30


def test_verify_lhopital_nabla_non_strict(capsys):
    code, out, _ = run(capsys, "verify", "lhopital", "--trials", "20", "--seed", "1", "--nabla", "--non-strict", "--format", "json")
    assert code == 0 and json.loads(out)["summary"]["dual_disagreements"] == 0


def test_verify_lhopital_config_file(capsys, tmp_path):
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps({"trials": 12, "seed": 3, "families": ["lattice"]}))
    code, out, _ = run(capsys, "verify", "lhopital", "--config", str(cfg), "--trials", "6", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["summary"]["trials"] == 6


def test_cli_json_is_byte_identical_across_processes():
    argv = [sys.executable, "-m", "tscalc", "verify", "lhopital", "--trials", "40", "--seed", "7", "--format", "json"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"{")


def test_env_overrides(capsys, monkeypatch):
    monkeypatch.setenv("TS_PRECISION", "12")
    _, out, _ = run(capsys, "qexp", "--q", "0.5", "--x", "1", "--format", "json")
    assert json.loads(out)["precision"] == 12
    _, out, _ = run(capsys, "qexp", "--q", "0.5", "--x", "1", "--precision", "20", "--format", "json")
    assert json.loads(out)["precision"] == 20
    monkeypatch.setenv("TS_TOL", "1e-3")
    _, out, _ = run(capsys, "bounds", "--q", "0.5", "--a-exp", "4", "--b-exp", "0", "--n", "2", "--format", "json")
    assert json.loads(out)["tol"] == 1e-3


def test_bad_env_value(capsys, monkeypatch):
    monkeypatch.setenv("TS_PRECISION", "lots")
    code, _, err = run(capsys, "qexp", "--q", "0.5", "--x", "1")
    assert code == 2 and "TS_PRECISION" in err


# --- CSV ingestion -------------------------------------------------------------------

def test_mvt_good_csv(capsys, tmp_path):
    path = write_csv(tmp_path / "good.csv", GOOD_ROWS)
    code, out, _ = run(capsys, "mvt", "--csv", path, "--x", "4", "--format", "json")
    assert code == 0 and json.loads(out)["holds"] is True


def test_mvt_tampered_g_sign(capsys, tmp_path):
    rows = list(GOOD_ROWS)
    rows[2] = (2, 4, "0.5")  # g drops: g^Delta changes sign
    path = write_csv(tmp_path / "tampered.csv", rows)
    code, out, err = run(capsys, "mvt", "--csv", path, "--x", "4")
    assert code == 2 and out == "" and err


def test_verify_rule_counterexample_exits_1(capsys, tmp_path):
    path = write_csv(tmp_path / "gap.csv", [(0, 0, 0), (1, 10, 1), (2, 11, 2), (3, 13, 3), (4, 16, 4)])
    code, out, _ = run(capsys, "verify", "rule", "--csv", path, "--format", "json")
    d = json.loads(out)
    assert code == 1 and d["status"] == "violated" and d["closure_covered"] is False


def test_verify_rule_good_csv(capsys, tmp_path):
    path = write_csv(tmp_path / "good.csv", GOOD_ROWS)
    code, out, _ = run(capsys, "verify", "rule", "--csv", path, "--format", "json")
    assert code == 0 and json.loads(out)["theorem_satisfied"] is True


def test_missing_csv_is_usage_error(capsys, tmp_path):
    code, _, _ = run(capsys, "mvt", "--csv", str(tmp_path / "nope.csv"), "--x", "1")
    assert code == 2
