"""Configuration schema, invariants and TOML loading."""

import dataclasses

import numpy as np
import pytest

from cfirs.config import (ConfigError, ScenarioConfig, coerce_value,
                          config_from_dict, db_to_linear, dbm_to_watts,
                          load_config)


def test_defaults_are_valid():
    cfg = ScenarioConfig()
    assert (cfg.L, cfg.R, cfg.K, cfg.M, cfg.N) == (4, 4, 4, 8, 64)


@pytest.mark.parametrize("kwargs", [
    {"K": 33},                 # L*M = 32 < K
    {"r_hotspot": 40.0},       # r >= d
    {"r_hotspot": -1.0},
    {"d": 280.0},              # d + r > D
    {"N": 0},
    {"L": 0},
    {"spacing": 0.0},
    {"ue_height": -1.5},
])
def test_invariant_violations_raise(kwargs):
    with pytest.raises(ConfigError):
        ScenarioConfig(**kwargs)


def test_unit_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(20.0) == pytest.approx(0.1)
    assert db_to_linear(0.0) == 1.0
    cfg = ScenarioConfig()
    assert cfg.P_bar_watts == pytest.approx(0.1)
    assert cfg.sigma2_watts == pytest.approx(10.0 ** (-12.7))
    assert cfg.beta_G == pytest.approx(10.0 ** 0.5)
    assert cfg.beta_d == pytest.approx(10.0 ** (-0.5))


def test_replace_and_hash():
    cfg = ScenarioConfig()
    other = cfg.replace(N=32)
    assert other.N == 32 and cfg.N == 64
    assert cfg.hash() == ScenarioConfig().hash()
    assert cfg.hash() != other.hash()
    assert dataclasses.is_dataclass(cfg) and cfg.to_dict()["N"] == 64


def test_config_from_dict_flat_and_nested():
    cfg = config_from_dict({"N": 16, "geometry": {"d": 60.0}})
    assert cfg.N == 16 and cfg.d == 60.0


@pytest.mark.parametrize("tree", [
    {"unknown_key": 1},
    {"a": {"N": 8}, "b": {"N": 16}},   # duplicate leaf
    {"N": 8.5},                         # non-integer count
    {"N": True},                        # boolean rejected
    {"d": "forty"},
])
def test_config_from_dict_rejects(tree):
    with pytest.raises(ConfigError):
        config_from_dict(tree)


def test_coerce_value_strings():
    assert coerce_value("N", "64") == 64
    assert isinstance(coerce_value("N", "64"), int)
    assert coerce_value("d", "40") == pytest.approx(40.0)
    with pytest.raises(ConfigError):
        coerce_value("nope", 1)


def test_load_config_round_trip(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text('N = 8\nM = 4\n\n[geometry]\nd = 50.0\nr_hotspot = 20.0\n')
    cfg = load_config(path)
    assert (cfg.N, cfg.M, cfg.d, cfg.r_hotspot) == (8, 4, 50.0, 20.0)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("N = [unterminated")
    with pytest.raises(ConfigError):
        load_config(bad)
