import json
import os

import numpy as np
import pytest

from qworkmeter import NumericalCheckError, cli


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def nmr_config(direction="forward", beta=1.0):
    return {
        "protocol": "tmp",
        "model": {"type": "nmr", "nu1": 1.0, "nu2": 1.8, "tau": 0.1,
                  "direction": direction},
        "initial_state": {"type": "thermal", "beta": beta},
        "lambdas": {"start": 0.0, "stop": 2.0, "num": 11},
    }


def test_run_writes_outputs(tmp_path):
    cfg = write_config(tmp_path, "cfg.json", nmr_config())
    out = tmp_path / "out"
    assert cli.main(["--out-dir", str(out), "--steps", "128", "run", cfg]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["files"] == {"dist": "dist.csv", "chi": "chi.csv"}
    assert abs(report["distribution"]["total_weight"] - 1) < 1e-12
    assert report["jarzynski"]["relative_deviation"] < 1e-10
    assert report["resolved"]["tolerance_profile"] == "default"
    # CSV round-trips at full precision (17 significant digits)
    header, data = cli.read_csv(str(out / "dist.csv"))
    assert header == ["w", "weight"]
    assert abs(np.sum(data[:, 1]) - 1) < 1e-14


def test_run_and_verify_roundtrip(tmp_path):
    beta = 1.0
    fwd_dir, bwd_dir = str(tmp_path / "fwd"), str(tmp_path / "bwd")
    for d, direction in ((fwd_dir, "forward"), (bwd_dir, "backward")):
        cfg = write_config(tmp_path, f"{direction}.json", nmr_config(direction, beta))
        assert cli.main(["--out-dir", d, "--steps", "128", "run", cfg]) == 0
    assert cli.main(["--out-dir", str(tmp_path), "verify", fwd_dir, bwd_dir,
                     "--beta", str(beta)]) == 0
    report = json.loads((tmp_path / "verify.json").read_text())
    assert abs(report["crooks"]["slope"] - beta) < 1e-12
    assert report["jarzynski"]["relative_deviation"] < 1e-10
    assert abs(report["deltaF_fit_deviation"]) < 1e-10


def test_verify_rejects_beta_mismatch(tmp_path):
    d = str(tmp_path / "fwd")
    cfg = write_config(tmp_path, "cfg.json", nmr_config())
    assert cli.main(["--out-dir", d, "--steps", "64", "run", cfg]) == 0
    assert cli.main(["verify", d, d, "--beta", "2.0"]) == cli.EXIT_VALIDATION


def test_validation_errors_exit_2(tmp_path):
    bad = write_config(tmp_path, "bad.json", {"protocol": "bogus"})
    assert cli.main(["run", bad]) == cli.EXIT_VALIDATION
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.EXIT_VALIDATION
    notjson = tmp_path / "broken.json"
    notjson.write_text("{nope")
    assert cli.main(["run", str(notjson)]) == cli.EXIT_VALIDATION
    nonherm = write_config(tmp_path, "nh.json", {
        "protocol": "tmp",
        "model": {"type": "custom", "H0": [[0, 1], [0, 0]],
                  "HT": [[1, 0], [0, -1]], "U": [[1, 0], [0, 1]]},
        "initial_state": {"type": "ground"},
    })
    assert cli.main(["run", nonherm]) == cli.EXIT_VALIDATION


def test_numerical_errors_exit_3(tmp_path, monkeypatch):
    cfg = write_config(tmp_path, "cfg.json", nmr_config())

    def boom(*args, **kwargs):
        raise NumericalCheckError("synthetic breach")

    monkeypatch.setattr(cli.workstats, "tmp_distribution_thermal", boom)
    assert cli.main(["--out-dir", str(tmp_path / "o"), "--steps", "64",
                     "run", cfg]) == cli.EXIT_NUMERICAL


def test_ramsey_protocol_run(tmp_path):
    cfg = nmr_config()
    cfg["protocol"] = "ramsey"
    path = write_config(tmp_path, "r.json", cfg)
    out = tmp_path / "out"
    assert cli.main(["--out-dir", str(out), "--steps", "128", "run", path]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["inversion"]["residual"] < 1e-8
    assert (out / "chi.csv").exists()
    assert (out / "dist.csv").exists()


def test_povm_protocol2_run(tmp_path):
    cfg = nmr_config()
    cfg["protocol"] = "povm-protocol2"
    cfg["detector"] = {"lambda": 0.3, "p0": 1.0, "sigma": 0.2}
    path = write_config(tmp_path, "p2.json", cfg)
    out = tmp_path / "out"
    assert cli.main(["--out-dir", str(out), "--steps", "128", "run", path]) == 0
    report = json.loads((out / "report.json").read_text())
    assert abs(report["position"]["total"] - 1) < 1e-6


def test_sample_subcommand_deterministic(tmp_path):
    cfg = nmr_config()
    cfg["shots"] = {"shots": 2000, "seed": 11}
    path = write_config(tmp_path, "s.json", cfg)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["--out-dir", str(out), "--steps", "64",
                         "sample", path]) == 0
        outs.append((out / "dist.csv").read_text())
    assert outs[0] == outs[1]


def test_sweep_subcommand(tmp_path):
    cfg = nmr_config()
    cfg["sweep"] = {"parameter": "sigma", "values": [0.1, 0.3]}
    cfg["protocol"] = "povm-protocol2"
    cfg["detector"] = {"lambda": 0.3, "p0": 1.0, "sigma": 0.1}
    path = write_config(tmp_path, "sw.json", cfg)
    out = tmp_path / "out"
    assert cli.main(["--out-dir", str(out), "--steps", "64", "sweep", path]) == 0
    index = json.loads((out / "sweep.json").read_text())
    assert [p["value"] for p in index["points"]] == [0.1, 0.3]
    for p in index["points"]:
        assert (out / p["dir"] / "report.json").exists()


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "x.json"
    cli.write_json(str(target), {"v": 1.0 / 3.0})
    assert json.loads(target.read_text()) == {"v": 1.0 / 3.0}
    assert os.listdir(tmp_path) == ["x.json"]
