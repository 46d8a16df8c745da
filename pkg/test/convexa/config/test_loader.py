"""
Tests for loading and validating the JSON configuration.
"""
import json
from unittest.mock import patch

import pytest

from convexa.config.loader import Settings, load_config, settings_from_dict
from convexa.errors import ConfigError


def _write(path, data):
    path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
    return path


def test_defaults():
    settings = Settings()
    assert settings.numerics.grid_cells == 1024
    assert settings.suite.minor_sign == 1
    assert settings.suite.checks == ()


def test_settings_from_dict():
    settings = settings_from_dict({
        "numerics": {"grid_cells": 256},
        "suite": {"seed": 3, "checks": ["total-curvature"]},
    })
    assert settings.numerics.grid_cells == 256
    assert settings.numerics.zero_tol == 1e-9
    assert settings.suite.seed == 3
    assert settings.suite.checks == ("total-curvature",)


@pytest.mark.parametrize("data", [
    [],
    {"plotting": {}},
    {"numerics": 3},
    {"numerics": {"grid": 10}},
])
def test_settings_from_dict_rejects_unknown_input(data):
    with pytest.raises(ConfigError):
        settings_from_dict(data)


def test_with_overrides_keeps_other_values():
    settings = Settings().with_overrides("topology", sphere_alpha=8)
    assert settings.topology.sphere_alpha == 8
    assert settings.topology.sphere_theta == 256
    assert Settings().topology.sphere_alpha == 128


def test_load_config_from_a_file(tmp_path):
    path = _write(tmp_path / "config.json", {"families": {"spread_search_max": 64}})
    assert load_config(path).families.spread_search_max == 64


def test_load_config_without_a_file_uses_defaults(tmp_path):
    with patch("convexa.config.loader.default_search_paths", return_value=[tmp_path / "absent.json"]):
        assert load_config() == Settings()


@pytest.mark.parametrize("content", ["{not json", json.dumps({"bogus": {}}), json.dumps({"suite": {"checks": 5}})])
def test_malformed_config_exits_with_status_2(tmp_path, content):
    path = _write(tmp_path / "config.json", content)
    with pytest.raises(SystemExit) as info:
        load_config(path)
    assert info.value.code == 2


def test_missing_explicit_config_exits_with_status_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        load_config(tmp_path / "nowhere.json")
    assert info.value.code == 2
