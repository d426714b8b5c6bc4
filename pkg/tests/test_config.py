import json

import pytest

from sasakian_tw.config import ConfigError, from_dict, load_config, schema


def test_minimal_config_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"m": 1, "f": "x+z", "level": 0}))
    cfg = load_config(path)
    assert (cfg.samples, cfg.seed, cfg.strategy, cfg.k_branch, cfg.orientation) == (50, 42, "jet", "auto", 1)
    assert cfg.tolerances.second_order == 1e-6


def test_fd_strategy_loosens_second_order_default():
    assert from_dict({"m": 1, "strategy": "fd"}).tolerances.second_order == 1e-4
    assert from_dict({"m": 1, "strategy": "fd", "tolerances": {"second_order": 1e-5}}).tolerances.second_order == 1e-5


def test_all_errors_reported_at_once():
    with pytest.raises(ConfigError) as info:
        from_dict({"m": 0, "extra": 1, "strategy": "symbolic", "tolerances": {"geometry": 0}})
    paths = sorted(e.split(":")[0] for e in info.value.errors)
    assert paths == ["/", "/m", "/strategy", "/tolerances/geometry"]


def test_bad_expression_is_a_config_error():
    with pytest.raises(ConfigError) as info:
        from_dict({"m": 1, "f": "x + * z"})
    assert info.value.errors[0].startswith("/f: syntax error at line 1, column 5")


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{m: 1}")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_overrides_round_trip():
    cfg = from_dict({"m": 2, "f": "x1 + z", "tolerances": {"geometry": 1e-9}})
    out = cfg.with_overrides(seed=7, samples=3)
    assert (out.seed, out.samples, out.tolerances.geometry) == (7, 3, 1e-9)


def test_schema_is_published():
    s = schema("config")
    assert s["additionalProperties"] is False
    assert set(s["properties"]) == {"m", "f", "level", "samples", "seed", "tolerances", "strategy", "orientation", "k_branch"}
