import json
import subprocess
import sys

import pytest

from infosell import cli


@pytest.fixture
def d_path(tmp_path):
    path = tmp_path / "inst_d.json"
    assert cli.main(["gen", "--family", "inst_d", "--output", str(path)]) == 0
    return path


def test_solve_json(d_path, tmp_path):
    out = tmp_path / "mech.json"
    assert cli.main(["solve", "--input", str(d_path), "--output", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["case"] == "HighTail"
    assert data["pay"] == pytest.approx([2 / 3, 2 / 3, 0.0], abs=1e-11)
    assert data["revenue"] == pytest.approx(4 / 9, abs=1e-11)


def test_solve_csv(d_path, capsys):
    assert cli.main(["solve", "--input", str(d_path), "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "t,theta,pay,P,u,s"
    assert lines[3].startswith("5,-7,0,2,4,")


def test_oracle(d_path, capsys):
    assert cli.main(["oracle", "--input", str(d_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["abs_gap"] <= 1e-6


def test_verify_corrupted(d_path, tmp_path, capsys):
    mech = tmp_path / "mech.json"
    cli.main(["solve", "--input", str(d_path), "--output", str(mech)])
    assert cli.main(["verify", "--input", str(d_path), "--mechanism", str(mech)]) == 0
    data = json.loads(mech.read_text())
    data["pay"][0] += 1.0
    mech.write_text(json.dumps(data))
    capsys.readouterr()
    assert cli.main(["verify", "--input", str(d_path), "--mechanism", str(mech)]) == 1
    err = capsys.readouterr().err
    assert "FAIL ic" in err


def test_single_menu(d_path, capsys):
    assert cli.main(["single-menu", "--input", str(d_path), "--format", "csv"]) == 0
    assert "rev_single" in capsys.readouterr().out


def test_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["sweep", "--seed", "5", "--count", "15", "--output", str(a)]) == 0
    assert cli.main(["sweep", "--seed", "5", "--count", "15", "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    summary = json.loads(a.read_text())
    assert summary["ok"] and summary["count"] == 15


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert cli.main(["gen", "--family", "random", "--seed", "9", "--output", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert cli.main(["gen", "--family", "inst_c3", "--grid", "20", "--format", "csv",
                     "--output", str(a)]) == 0
    assert a.read_text().startswith("kind,id,a,b,c")


def test_usage_errors(tmp_path, capsys):
    assert cli.main(["nope"]) == 2
    assert cli.main(["solve"]) == 2
    assert cli.main(["solve", "--input", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["solve", "--input", str(bad)]) == 2
    bad.write_text(json.dumps({"types": [{"t": 1, "f": 1}], "states": [], "x": 1}))
    assert cli.main(["solve", "--input", str(bad)]) == 2
    assert cli.main(["gen", "--family", "unknown"]) == 2
    assert cli.main(["sweep", "--tol", "-1"]) == 2


def test_module_entry(d_path):
    res = subprocess.run([sys.executable, "-m", "infosell", "solve", "--input", str(d_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["case"] == "HighTail"
