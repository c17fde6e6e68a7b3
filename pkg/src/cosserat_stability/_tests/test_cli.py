import json

import numpy as np
import pandas as pd
import pytest

from cosserat_stability import __version__
from cosserat_stability.cli import main
from cosserat_stability.material_io import load_material
from cosserat_stability.utils import load_settings

FAST = ["--sweep-density", "256"]


def test_check_stable_preset(capsys):
    assert main(["check", "preset:isotropic-reference", *FAST]) == 0
    out = capsys.readouterr().out
    assert "isotropic-reference" in out
    assert "| WP | True |" in out


def test_check_failing_preset():
    assert main(["check", "preset:shear-defective", *FAST]) == 1


def test_check_selected_conditions():
    args = ["check", "preset:shear-defective", *FAST, "--conditions"]
    assert main(args + ["E", "WP"]) == 0
    assert main(args + ["PD_C"]) == 1
    assert main(args + ["XYZ"]) == 2


def test_check_json(capsys):
    assert main(["check", "preset:isotropic-reference", *FAST,
                 "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["kind"] == "3d"
    assert report["holds"]
    assert report["settings"]["sweep_density"] == 256
    assert set(report["conditions"]) == {
        "PD_C", "PD_B", "SE_C", "SE_B", "SSE_C", "SSE_B", "E", "WP"
    }


def test_check_verbose_symbols(capsys):
    assert main(["check", "preset:isotropic-reference", *FAST, "--json",
                 "--verbose-symbols"]) == 0
    symbols = json.loads(capsys.readouterr().out)["symbols"]
    assert symbols["verdict"]
    assert len(symbols["diagnostics"]) == 1


def test_check_writes_report(tmp_path):
    path = tmp_path / "report.json"
    assert main(["check", "preset:isotropic-reference", *FAST, "--out",
                 str(path)]) == 0
    assert json.loads(path.read_text())["material"] == "isotropic-reference"


def test_check_antiplane_preset(capsys):
    assert main(["check", "preset:wp-not-e"]) == 1
    assert main(["check", "preset:wp-not-e", "--conditions", "WP"]) == 0
    capsys.readouterr()
    main(["check", "preset:ec-h-boundary", "--json"])
    report = json.loads(capsys.readouterr().out)
    assert report["kind"] == "antiplane"
    assert report["regime"]["label"] == "EC/H-boundary"


def test_input_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{\n  \"density\": ,\n}\n")
    assert main(["check", str(broken)]) == 2
    assert main(["check", str(tmp_path / "absent.yaml")]) == 2
    assert main(["check", "preset:granite"]) == 2
    assert main(["check"]) == 2
    assert main([]) == 2


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_config_flag_stores_settings():
    assert main(["check", "preset:isotropic-reference", *FAST,
                 "--config"]) == 0
    assert load_settings()["sweep_density"] == 256


def test_sweep(tmp_path):
    stem = tmp_path / "map"
    assert main(["sweep", "--out", str(stem), "--resolution", "21"]) == 0
    df = pd.read_csv(stem.with_suffix(".csv"))
    assert len(df) == 21 * 21
    assert stem.with_suffix(".svg").exists()


def test_dispersion(tmp_path):
    path = tmp_path / "waves.csv"
    assert main(["dispersion", "preset:isotropic-reference", "--direction",
                 "0", "0", "1", "--k-range", "1", "2", "2", "--out",
                 str(path)]) == 0
    df = pd.read_csv(path)
    assert list(df.columns) == [
        "k", "branch_index", "omega_sq", "V", "d1", "d2", "d3"
    ]
    np.testing.assert_allclose(
        df[df.k == 1].omega_sq.sort_values(), [2, 2, 3], atol=1e-9
    )
    np.testing.assert_allclose(
        df[df.k == 2].omega_sq.sort_values(), [12, 20, 20], atol=1e-9
    )


def test_dispersion_single_branch(capsys):
    assert main(["dispersion", "preset:isotropic-reference", "--direction",
                 "0", "0", "1", "--k-range", "1", "2", "2", "--branch",
                 "0"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert main(["dispersion", "preset:isotropic-reference", "--direction",
                 "0", "0", "1", "--branch", "3"]) == 2


def test_antiplane_dispersion(capsys):
    assert main(["dispersion", "preset:ec-h-boundary", "--direction", "1",
                 "0", "--k-range", "1", "1", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "k,V_s,A33"
    assert len(lines) == 2


def test_dispersion_rejects_bad_direction():
    assert main(["dispersion", "preset:isotropic-reference", "--direction",
                 "0", "0", "0"]) == 2
    assert main(["dispersion", "preset:isotropic-reference", "--direction",
                 "1", "0"]) == 2


def test_discontinuity_at_loss(capsys):
    assert main(["discontinuity", "preset:wp-not-e", "--normal", "1", "0",
                 "--reduced"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["reduced"]["unknowns"] == [
        "g1_1", "g1_2", "g1_3", "g2_2", "t3"
    ]
    assert len(out["full"]["matrix"]) == 6


def test_discontinuity_while_elliptic(capsys):
    args = ["discontinuity", "preset:isotropic-reference", "--normal", "0",
            "0", "1"]
    assert main(args) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["reduced"] is None
    assert out["lambda2"] > 0
    assert main(args + ["--reduced"]) == 1
    assert main(["discontinuity", "preset:isotropic-reference"]) == 2


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    assert "wp-not-e" in capsys.readouterr().out
    assert main(["presets", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert len(rows) == 6


def test_presets_export(tmp_path):
    path = tmp_path / "negative.yaml"
    assert main(["presets", "--export", "negative-shear", "--out",
                 str(path)]) == 0
    assert load_material(path).name == "negative-shear"
    assert main(["presets", "--export", "granite"]) == 2


@pytest.mark.parametrize("density", ["0", "-8"])
def test_invalid_density_override(density):
    assert main(["check", "preset:isotropic-reference", "--sweep-density",
                 density]) == 2
