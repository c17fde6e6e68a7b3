import numpy as np
import pytest

from cosserat_stability.acoustic import dispersion_table
from cosserat_stability.antiplane import antiplane_conditions
from cosserat_stability.material_io import load_material
from cosserat_stability.presets import (
    PRESETS,
    export_preset,
    get_preset,
    list_presets,
)
from cosserat_stability.stability import full_report

THREE_D = [name for name, p in PRESETS.items() if p.kind == "3d"]
ANTIPLANE = [name for name, p in PRESETS.items() if p.kind == "antiplane"]


def test_preset_catalogue():
    assert len(PRESETS) == 6
    assert set(ANTIPLANE) == {"wp-not-e", "ec-h-boundary"}


def test_list_presets():
    table = list_presets()
    assert list(table.columns) == [
        "name", "kind", "moduli", "expected", "reference"
    ]
    assert list(table.name) == list(PRESETS)


def test_unknown_preset():
    with pytest.raises(ValueError, match="available"):
        get_preset("granite")


@pytest.mark.parametrize("name", THREE_D)
def test_3d_presets_match_documented_verdicts(name, fast_settings):
    preset = get_preset(name)
    material = preset.material()
    verdicts = full_report(material.C, material.B, fast_settings).verdicts
    for condition, expected in preset.expected.items():
        assert verdicts[condition] == expected, condition


@pytest.mark.parametrize("name", ANTIPLANE)
def test_antiplane_presets_match_documented_verdicts(name):
    preset = get_preset(name)
    conditions = antiplane_conditions(preset.material().antiplane).as_dict()
    for condition, expected in preset.expected.items():
        assert conditions[condition] == expected, condition


@pytest.mark.parametrize("suffix", [".json", ".yaml"])
def test_export_preset(tmp_path, suffix):
    path = export_preset("ec-h-boundary", tmp_path / f"ec-h{suffix}")
    material = load_material(path)
    assert material.name == "ec-h-boundary"
    expected = get_preset("ec-h-boundary").material().antiplane
    assert material.antiplane == expected


@pytest.mark.parametrize("name", ["shear-defective", "purely-cosserat"])
def test_extreme_presets_wave_speeds(name):
    preset = get_preset(name)
    material = preset.material()
    lam = preset.data["cauchy"]["lambda"]
    eta = preset.data["cosserat"]["eta"]
    rho = material.require_density()
    table = dispersion_table(
        material.C, material.B, rho, [0.0, 0.0, 1.0], [0.0, 0.5, 2.0]
    )
    static = table[table.k == 0]
    assert static.V.max() == pytest.approx(np.sqrt(lam / rho), abs=1e-12)

    waves = table[table.k > 0]
    longitudinal = waves[waves.d3.abs() > 0.5]
    transverse = waves[waves.d3.abs() < 0.5]
    assert len(longitudinal) == 2 and len(transverse) == 4
    # mu = 0: V_p does not disperse and V_s grows linearly with k
    np.testing.assert_allclose(
        longitudinal.omega_sq, lam / rho * longitudinal.k**2, atol=1e-12
    )
    np.testing.assert_allclose(
        transverse.V / transverse.k, np.sqrt(eta / rho), atol=1e-12
    )
