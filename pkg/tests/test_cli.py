import json

import numpy as np

from sllg.cli import run
from sllg.io import config_from_manifest, read_csv, read_snapshots, verify_manifest


def write_config(tmp_path, data, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_verify_default_config(tmp_path, capsys):
    assert run(["verify", "--out", str(tmp_path)]) == 0
    assert "FAIL" not in capsys.readouterr().out


def test_simulate_writes_records(tmp_path):
    cfg = write_config(tmp_path, {"stepper": {"dt": 0.002, "T": 0.02},
                                  "diagnostics": {"snapshot_stride": 5,
                                                  "test_functions": [{"mode": 1}]}})
    out = tmp_path / "run"
    assert run(["simulate", "--config", cfg, "--out", str(out), "--seed", "4"]) == 0
    header, rows = read_csv(out / "timeseries.csv")
    assert header[0] == "time" and len(rows) == 11
    t, states = read_snapshots(out / "snapshots.bin")
    np.testing.assert_allclose(t, [0, 0.01, 0.02])
    assert states.shape == (3, 16, 3)
    assert (out / "weak_residual.csv").exists()
    assert verify_manifest(out / "manifest.json") == []
    assert config_from_manifest(out / "manifest.json").ensemble.base_seed == 4


def test_simulate_zero_steps(tmp_path):
    cfg = write_config(tmp_path, {"stepper": {"steps": 0}})
    assert run(["simulate", "--config", cfg, "--out", str(tmp_path / "z")]) == 0
    _, rows = read_csv(tmp_path / "z" / "timeseries.csv")
    assert len(rows) == 1 and rows[0][0] == 0.0


def test_ensemble_rerun_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, {"domain": {"n_modes": 8}, "stepper": {"dt": 0.01, "T": 0.1},
                                  "ensemble": {"replicas": 4}})
    for name in ("a", "b"):
        assert run(["ensemble", "--config", cfg, "--out", str(tmp_path / name)]) == 0
    for f in ("summary.csv", "replicas.csv", "final_states.bin"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_study_outputs(tmp_path):
    cfg = write_config(tmp_path, {"domain": {"n_modes": 4}, "stepper": {"dt": 0.0625, "T": 0.25},
                                  "model": {"drift": False,
                                            "channels": [{"kind": "constant", "vector": [0, 0, 1]}],
                                            "initial": {"kind": "constant"}},
                                  "ensemble": {"replicas": 2, "study": "order_study",
                                               "reference": "rotation",
                                               "dt_list": [0.0625, 0.03125, 0.015625]}})
    assert run(["study", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    text = (tmp_path / "o" / "order_slopes.csv").read_text().splitlines()
    assert text[0] == "scheme,slope" and len(text) == 4
    _, rows = read_csv(tmp_path / "o" / "order_study.csv")
    assert len(rows) == 9


def test_errors_are_structured(tmp_path, capsys):
    bad = write_config(tmp_path, {"model": {"lambda2": 0}})
    assert run(["simulate", "--config", bad]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and "lambda2" in err["message"]
    assert run(["simulate", "--config", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()
    cfg = write_config(tmp_path, {"stepper": {"dt": 0.1, "T": 1.0}}, "big.json")
    assert run(["simulate", "--config", cfg, "--out", str(tmp_path / "x")]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "StepSizeError"
    plain = write_config(tmp_path, {}, "plain.json")
    assert run(["study", "--config", plain, "--out", str(tmp_path / "p")]) == 2
