"""
Built-in materials with known stability verdicts.
"""
from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Union

import pandas as pd

from cosserat_stability.material_io import (
    MaterialFile,
    material_from_dict,
    save_material,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    reference: str
    data: dict
    # Condition name -> documented verdict
    expected: dict

    @property
    def kind(self) -> str:
        return "antiplane" if "antiplane" in self.data else "3d"

    def material(self) -> MaterialFile:
        return material_from_dict({"name": self.name, **self.data})


def _iso(lam, mu, eta, eta_prime=0.0, density=1.0) -> dict:
    return {
        "density": density,
        "cauchy": {"type": "isotropic", "lambda": lam, "mu": mu},
        "cosserat": {
            "type": "isotropic",
            "eta": eta,
            "eta_prime": eta_prime,
        },
    }


def _anti(c44, c55, b1, b2, b3, b4, density=1.0) -> dict:
    return {
        "density": density,
        "antiplane": {
            "c44": c44,
            "c55": c55,
            "b1": b1,
            "b2": b2,
            "b3": b3,
            "b4": b4,
        },
    }


PRESETS = {
    p.name: p
    for p in (
        Preset(
            name="isotropic-reference",
            description="lambda = mu = eta = 1, eta' = 0",
            reference="isotropic closed forms",
            data=_iso(1.0, 1.0, 1.0),
            expected={
                "PD_C": True,
                "PD_B": True,
                "SE_C": True,
                "SE_B": True,
                "SSE_C": True,
                "SSE_B": True,
                "E": True,
                "WP": True,
            },
        ),
        Preset(
            name="purely-cosserat",
            description="null Cauchy stiffness, eta = 1",
            reference="extreme materials: null Cauchy stiffness",
            data=_iso(0.0, 0.0, 1.0),
            expected={
                "PD_C": False,
                "PD_B": True,
                "SE_C": False,
                "SE_B": True,
                "E": False,
                "WP": False,
            },
        ),
        Preset(
            name="shear-defective",
            description="lambda = 1, mu = 0, eta = 1",
            reference="extreme materials: null shear stiffness",
            data=_iso(1.0, 0.0, 1.0),
            expected={
                "PD_C": False,
                "SE_C": False,
                "E": True,
                "WP": True,
            },
        ),
        Preset(
            name="negative-shear",
            description="lambda = 2, mu = -0.1, eta = 1",
            reference="ellipticity without wave propagation",
            data=_iso(2.0, -0.1, 1.0),
            expected={
                "PD_C": False,
                "SE_C": False,
                "E": True,
                "WP": False,
            },
        ),
        Preset(
            name="wp-not-e",
            description="antiplane b2 = 0, b0 = 1, b4 = 1, c55 = 1, c44 = 0",
            reference="antiplane: wave propagation without ellipticity",
            data=_anti(0.0, 1.0, 1.0, 0.0, 0.0, 1.0),
            expected={"PD": False, "SE": False, "E": False, "WP": True},
        ),
        Preset(
            name="ec-h-boundary",
            description="antiplane b2 = 4, b4 = 1, b0 = -2 (b1 = 1, b3 = 3)",
            reference="antiplane: EC/H ellipticity boundary",
            data=_anti(1.0, 1.0, 1.0, 4.0, 3.0, 1.0),
            expected={"PD": False, "SE": False, "E": False, "WP": True},
        ),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"Unknown preset {name!r}; available: {', '.join(PRESETS)}"
        ) from None


def list_presets() -> pd.DataFrame:
    rows = []
    for preset in PRESETS.values():
        rows.append(
            {
                "name": preset.name,
                "kind": preset.kind,
                "moduli": preset.description,
                "expected": ", ".join(
                    f"{k}={v}" for k, v in preset.expected.items()
                ),
                "reference": preset.reference,
            }
        )
    return pd.DataFrame(rows)


def export_preset(name: str, path: Union[str, Path]) -> Path:
    preset = get_preset(name)
    path = save_material({"name": preset.name, **preset.data}, path)
    logger.info("Exported preset %s to %s", name, path)
    return path
