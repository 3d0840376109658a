import json
import struct

import numpy as np
import pytest

from sllg.config import ConfigError, RunConfig, parse_config, validate_config
from sllg.io import (MAGIC, config_from_manifest, fmt, read_csv, read_snapshots, verify_manifest,
                     write_csv, write_manifest, write_snapshots)


def test_minimal_config_fills_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{}")
    cfg = parse_config(path)
    assert cfg.diagnostics.beta == 0.3 and cfg.diagnostics.alpha == 0.25
    assert cfg.domain.oversample == 4
    assert cfg.stepper.T == 1.0 and cfg.stepper.steps == 1000


@pytest.mark.parametrize("data, fragment", [
    ({"model": {"lambda2": 0}}, "lambda2 must be > 0"),
    ({"lambda3": 1.0}, "lambda3"),
    ({"model": {"lambda3": 1.0}}, "model.lambda3"),
    ({"diagnostics": {"beta": 0.2}}, "beta must be > 1/4"),
    ({"diagnostics": {"alpha": 0.5}}, "alpha must lie in"),
    ({"stepper": {"dt": 0.3, "T": 1.0}}, "does not divide"),
    ({"stepper": {"dt": 0.1, "T": 1.0, "steps": 5}}, "differs from T"),
    ({"stepper": {"scheme": "rk4"}}, "stepper.scheme"),
])
def test_invalid_configs(data, fragment):
    with pytest.raises(ConfigError, match=fragment):
        validate_config(data)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(bad)


def test_steps_define_horizon_and_overrides():
    cfg = validate_config({"stepper": {"dt": 0.01, "steps": 0}})
    assert cfg.stepper.T == 0.0
    cfg = validate_config({}).with_overrides(seed=9, dt=0.5e-3, n_modes=8, scheme="heun_stratonovich")
    assert cfg.ensemble.base_seed == 9 and cfg.stepper.steps == 2000 and cfg.domain.n_modes == 8
    assert cfg.build_stepper().scheme == "heun_stratonovich"
    assert cfg.build_params().basis.n_modes == 8


def test_builders_produce_model_objects():
    cfg = validate_config({"model": {"anisotropy": {"kind": "uniaxial", "strength": 0.5}},
                           "diagnostics": {"test_functions": [{"mode": 2}]}})
    m = cfg.build_params()
    assert m.anisotropy.strength == 0.5 and m.n_channels == 2
    assert cfg.build_test_functions()[0].mode == 2
    assert cfg.build_ensemble().replicas == 1


def test_fmt_round_trips_doubles(rng):
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-300, 300, 200):
        assert float(fmt(x)) == x
    assert fmt(3) == "3" and fmt(True) == "1" and fmt("a") == "a"


def test_csv_round_trip(tmp_path, rng):
    rows = [tuple(r) for r in rng.standard_normal((5, 3))]
    write_csv(tmp_path / "t.csv", ("a", "b", "c"), rows)
    header, back = read_csv(tmp_path / "t.csv")
    assert header == ["a", "b", "c"] and back == rows


def test_snapshot_format(tmp_path, rng):
    states = rng.standard_normal((3, 4, 3))
    path = tmp_path / "s.bin"
    write_snapshots(path, [0.0, 0.5, 1.0], states)
    raw = path.read_bytes()
    assert raw[:8] == MAGIC
    assert struct.unpack("<IIII", raw[8:24]) == (1, 4, 3, 3)
    assert len(raw) == 24 + 3 * 8 * (1 + 12)
    t, back = read_snapshots(path)
    assert np.array_equal(t, [0.0, 0.5, 1.0]) and np.array_equal(back, states)
    path.write_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(ValueError, match="magic"):
        read_snapshots(path)
    path.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        read_snapshots(path)


def test_manifest_round_trip_and_checksums(tmp_path):
    cfg = validate_config({"stepper": {"dt": 0.01, "T": 0.1}, "out_dir": str(tmp_path)})
    write_csv(tmp_path / "a.csv", ("x",), [(1.0,)])
    mpath = write_manifest(tmp_path, cfg, ["a.csv"], [{"replica": 0}], 0.1)
    assert config_from_manifest(mpath) == cfg
    assert verify_manifest(mpath) == []
    data = json.loads(mpath.read_text())
    assert set(data) >= {"config", "generator", "version", "seeds", "wall_clock_seconds", "files"}
    (tmp_path / "a.csv").write_text("x\n2\n")
    assert verify_manifest(mpath) == ["a.csv"]


def test_config_schema_is_closed():
    assert RunConfig.model_config["extra"] == "forbid"
