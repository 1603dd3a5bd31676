import json
import os

import pytest

from basinreach.cli import main


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_bench_list(capsys):
    assert main(["bench", "list"]) == 0
    out = capsys.readouterr().out
    for name in ("quad", "double_well", "himmelblau"):
        assert name in out
    assert "local_min" in out and "saddle" in out


def test_bench_json(capsys):
    assert main(["bench", "list", "--json"]) == 0
    catalog = json.loads(capsys.readouterr().out)
    hb = next(c for c in catalog if c["name"] == "himmelblau")
    assert len(hb["critical_points"]) == 9
    assert hb["lipschitz_L"] == pytest.approx(326.79215610874223)


def test_run_gd_outputs(tmp_path, capsys):
    out = str(tmp_path / "run")
    rc = main(["run", "--function", "quad:1", "--x0", "1", "--schedule",
               "constant:0.5", "--gtol", "1e-8", "--out", out])
    assert rc == 0
    csv = read(os.path.join(out, "trajectory.csv"))
    assert csv.splitlines()[0] == b"k,t,x_1,f,gnorm"
    summary = json.loads(read(os.path.join(out, "summary.json")))
    assert summary["status"] == "converged"
    cfg = json.loads(read(os.path.join(out, "config.json")))
    assert cfg["procedure"] == "gd" and cfg["function"] == "quad:1"
    # byte-identical rerun
    before = {n: read(os.path.join(out, n)) for n in os.listdir(out)}
    assert main(["run", "--function", "quad:1", "--x0", "1", "--schedule",
                 "constant:0.5", "--gtol", "1e-8", "--out", out]) == 0
    after = {n: read(os.path.join(out, n)) for n in os.listdir(out)}
    assert before == after


def test_run_flow(tmp_path):
    out = str(tmp_path / "flow")
    rc = main(["run", "--function", "quad:1", "--x0", "1", "--out", out,
               "--h", "0.01", "--t-max", "2.0", "--gtol", "1e-6"]
              + ["--procedure", "flow"])
    assert rc == 0
    rows = read(os.path.join(out, "trajectory.csv")).splitlines()
    assert rows[0] == b"k,t,x_1,f,gnorm"
    assert len(rows) > 100


def test_reach_from_config(tmp_path):
    cfg_path = tmp_path / "dw.json"
    cfg_path.write_text(json.dumps({
        "function": "double_well",
        "schedule": "constant:0.021",
        "target": [1.0],
        "epsilon": 0.4,
        "seed_radius": 1e-3,
        "tol": 1e-4,
    }))
    out = str(tmp_path / "reach")
    rc = main(["reach", "--config", str(cfg_path), "--out", out])
    assert rc == 0
    report = json.loads(read(os.path.join(out, "reach.json")))
    assert report["status"] == "success"
    assert report["final_distance"] <= 1e-4
    assert report["x0"] != [1.0]
    assert os.path.exists(os.path.join(out, report["forward_csv_path"]))
    assert os.path.exists(os.path.join(out, report["reverse_csv_path"]))
    rev = read(os.path.join(out, "reverse.csv")).splitlines()
    assert rev[0].endswith(b",direction") and rev[1].endswith(b",reverse")


def test_reach_config_roundtrip(tmp_path):
    out1 = str(tmp_path / "a")
    rc = main(["reach", "--function", "double_well", "--target", "1",
               "--schedule", "constant:0.021", "--epsilon", "0.4",
               "--seed-radius", "0.001", "--tol", "1e-4", "--out", out1])
    assert rc == 0
    out2 = str(tmp_path / "b")
    rc = main(["reach", "--config", os.path.join(out1, "config.json"), "--out", out2])
    assert rc == 0
    for name in ("reach.json", "forward.csv", "reverse.csv"):
        assert read(os.path.join(out1, name)) == read(os.path.join(out2, name))


def test_reach_continuous_cli(tmp_path):
    out = str(tmp_path / "cont")
    rc = main(["reach", "--function", "quad:1", "--target", "0",
               "--mode", "continuous", "--epsilon", "1.0",
               "--seed-radius", "0.001", "--tol", "1e-5",
               "--h", "0.01", "--t-max", "60", "--gtol", "1e-6", "--out", out])
    assert rc == 0
    report = json.loads(read(os.path.join(out, "reach.json")))
    assert report["status"] == "success"
    assert abs(abs(report["x0"][0]) - 1.0) <= 1e-8
    rev = read(os.path.join(out, "reverse.csv")).splitlines()
    assert rev[0] == b"k,t,x_1,f,gnorm,direction"
    assert rev[-1].endswith(b",reverse")


def test_reach_target_index(tmp_path):
    out = str(tmp_path / "ti")
    rc = main(["reach", "--function", "double_well", "--target-index", "2",
               "--schedule", "constant:0.021", "--epsilon", "0.4",
               "--seed-radius", "0.001", "--tol", "1e-4", "--out", out])
    assert rc == 0


def test_probe_cli(tmp_path):
    out = str(tmp_path / "probe")
    rc = main(["probe", "--function", "double_well", "--target", "1",
               "--epsilon", "0.5", "--schedule", "constant:0.05", "--out", out])
    assert rc == 0
    data = json.loads(read(os.path.join(out, "probe.json")))
    assert data["delta_hat"] >= 0.4


def test_eos_cli(tmp_path, capsys):
    out = str(tmp_path / "eos")
    assert main(["eos", "--function", "quad:1", "--alpha", "2.1", "--out", out]) == 0
    assert "diverges" in capsys.readouterr().out
    data = json.loads(read(os.path.join(out, "eos.json")))
    assert data["verdict"] == "diverges"
    assert main(["eos", "--function", "quad:1", "--alpha", "1.9", "--out", out]) == 0
    assert "converges" in capsys.readouterr().out


def test_check_cli(tmp_path):
    out = str(tmp_path / "check")
    rc = main(["check", "--function", "double_well", "--n-checks", "50", "--out", out])
    assert rc == 0
    data = json.loads(read(os.path.join(out, "check.json")))
    assert data["identity_failures"] == 0 and data["certificate_failures"] == 0


def test_config_errors(tmp_path, capsys):
    assert main(["run", "--function", "nope", "--x0", "1",
                 "--out", str(tmp_path / "x")]) == 2
    assert "nope" in capsys.readouterr().err
    # inadmissible schedule for the regime
    assert main(["reach", "--function", "double_well", "--target", "1",
                 "--schedule", "constant:0.2", "--epsilon", "0.4",
                 "--seed-radius", "0.001", "--tol", "1e-4",
                 "--out", str(tmp_path / "y")]) == 2
    # malformed config file
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "z")]) == 2
    # unknown config field
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps({"stepsize": 0.1}))
    assert main(["run", "--config", str(bad2), "--out", str(tmp_path / "w")]) == 2
    assert "stepsize" in capsys.readouterr().err
    # missing required field
    assert main(["run", "--function", "quad:1", "--out", str(tmp_path / "v")]) == 2


def test_env_output_override(tmp_path, monkeypatch, capsys):
    env_dir = str(tmp_path / "envout")
    monkeypatch.setenv("BASINREACH_OUT", env_dir)
    assert main(["eos", "--function", "quad:1", "--alpha", "2.0"]) == 0
    assert "neutral" in capsys.readouterr().out
    assert os.path.exists(os.path.join(env_dir, "eos.json"))
