import json

import numpy as np
import pytest
import yaml

from cosserat_stability.config import (
    DEFAULT_SETTINGS,
    THREADS_ENV,
    AnalysisSettings,
    get_settings,
    resolve_settings,
)
from cosserat_stability.utils import (
    atomic_write,
    dump_json,
    filter_empty_dict,
    get_param_hash,
    get_settings_cache,
    load_config,
    merge_dicts,
    sanitise_name,
    to_jsonable,
)


def test_defaults():
    settings = resolve_settings()
    assert settings == AnalysisSettings()
    assert get_settings(None) is DEFAULT_SETTINGS
    assert get_settings(settings) is settings


def test_overrides_ignore_none():
    settings = resolve_settings(sweep_density=128, tolerance=None)
    assert settings.sweep_density == 128
    assert settings.tolerance == AnalysisSettings().tolerance


def test_unknown_override():
    with pytest.raises(ValueError, match="Unknown settings"):
        resolve_settings(density=3)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"tolerance": 0.0},
        {"sweep_density": 4},
        {"refine_rounds": -1},
        {"threads": 0},
    ],
)
def test_invalid_settings(kwargs):
    with pytest.raises(ValueError):
        AnalysisSettings(**kwargs)


def test_threads_from_environment(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert resolve_settings().threads == 3
    assert resolve_settings(threads=5).threads == 5
    monkeypatch.setenv(THREADS_ENV, "many")
    assert resolve_settings().threads is None


def test_saved_settings_are_reloaded():
    AnalysisSettings(sweep_density=300, band=1e-4).save()
    _, path = get_settings_cache()
    assert yaml.safe_load(path.read_text())["sweep_density"] == 300
    settings = resolve_settings()
    assert settings.sweep_density == 300
    assert settings.band == 1e-4
    assert resolve_settings(use_user_settings=False).sweep_density == 4096


def test_with_overrides():
    settings = AnalysisSettings().with_overrides(band=None, threads=2)
    assert settings.threads == 2
    assert settings.band == AnalysisSettings().band


def test_merge_dicts():
    merged = merge_dicts({"a": 1, "b": {"c": 2, "d": 3}}, {"b": {"c": 4}})
    assert merged == {"a": 1, "b": {"c": 4, "d": 3}}
    assert merge_dicts({"a": 1}, None) == {"a": 1}


def test_filter_empty_dict():
    assert filter_empty_dict(
        {"a": None, "b": {}, "c": {"d": None}, "e": 0}
    ) == {"e": 0}


def test_to_jsonable():
    out = to_jsonable(
        {
            1: np.array([1.0, 2.0]),
            "z": np.complex128(1 + 2j),
            "flag": np.bool_(True),
            "n": np.int64(3),
        }
    )
    assert out == {"1": [1.0, 2.0], "z": [1.0, 2.0], "flag": True, "n": 3}
    json.dumps(out)


def test_dump_json_and_atomic_write(tmp_path):
    path = tmp_path / "nested" / "out.json"
    text = dump_json({"x": np.float64(0.5)}, path)
    assert json.loads(path.read_text()) == {"x": 0.5}
    assert path.read_text() == text
    assert list(path.parent.iterdir()) == [path]
    atomic_write(path, "replaced")
    assert path.read_text() == "replaced"


def test_load_config(tmp_path):
    path = tmp_path / "c.yml"
    path.write_text("a: 1\n")
    assert load_config(path) == {"a": 1}
    with pytest.raises(ValueError, match="not JSON or YAML"):
        load_config(atomic_write(tmp_path / "c.ini", "a = 1"))


def test_param_hash():
    a = np.eye(3)
    assert get_param_hash(a) == get_param_hash(a.copy())
    assert get_param_hash(a) != get_param_hash(2 * a)
    assert get_param_hash(a) == get_param_hash(a + 1e-16)


def test_sanitise_name():
    assert sanitise_name(" Wp Not E ") == "wp-not-e"
