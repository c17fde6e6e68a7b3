"""
Material files (JSON or YAML).

A 3D material::

    {
      "name": "isotropic-reference",
      "density": 1.0,
      "cauchy": {"type": "isotropic", "lambda": 1.0, "mu": 1.0},
      "cosserat": {"type": "isotropic", "eta": 1.0, "eta_prime": 0.0}
    }

``cauchy`` may instead be ``{"type": "matrix", "values": <6x6 Voigt>}`` and
``cosserat`` either ``{"type": "orthotropic", "B1111": ..., ...}`` (the 12
independent entries) or ``{"type": "matrix", "values": <9x9>}``.

An antiplane material replaces both blocks with
``"antiplane": {"c44", "c55", "b1", "b2", "b3", "b4"}``.
"""
from dataclasses import dataclass, field
import json
import logging
from pathlib import Path
import re
from typing import Optional, Union

import numpy as np
import yaml

from cosserat_stability.antiplane import AntiplaneMaterial, embed_antiplane
from cosserat_stability.tensor_core import (
    ORTHOTROPIC_KEYS,
    CauchyTensor,
    CosseratTensor,
    isotropic_cauchy,
    isotropic_cosserat,
    orthotropic_cosserat,
)
from cosserat_stability.utils import atomic_write, dump_json, load_config

logger = logging.getLogger(__name__)

ANTIPLANE_KEYS = ("c44", "c55", "b1", "b2", "b3", "b4")
TOP_LEVEL_KEYS = {
    "name",
    "notes",
    "density",
    "cauchy",
    "cosserat",
    "antiplane",
}


class MaterialFileError(ValueError):
    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
    ):
        self.reason = message
        location = []
        if field is not None:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.field = field
        self.line = line


@dataclass(frozen=True)
class MaterialFile:
    data: dict
    C: CauchyTensor
    B: CosseratTensor
    antiplane: Optional[AntiplaneMaterial] = None
    path: Optional[Path] = field(default=None, compare=False)

    @property
    def name(self) -> str:
        return self.data.get("name") or (
            self.path.stem if self.path else "material"
        )

    @property
    def notes(self) -> Optional[str]:
        return self.data.get("notes")

    @property
    def density(self) -> Optional[float]:
        return self.data.get("density")

    @property
    def is_antiplane(self) -> bool:
        return self.antiplane is not None

    def require_density(self) -> float:
        if self.density is None:
            raise MaterialFileError(
                "Wave commands need a density", field="density"
            )
        return self.density


def _number(value, field_name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MaterialFileError(
            f"Expected a number, got {value!r}", field=field_name
        )
    if not np.isfinite(value):
        raise MaterialFileError("Value must be finite", field=field_name)
    return float(value)


def _matrix(value, shape: tuple, field_name: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise MaterialFileError(
            "Matrix entries must be numbers", field=field_name
        ) from None
    if arr.shape != shape:
        raise MaterialFileError(
            f"Expected a {shape[0]}x{shape[1]} matrix, got shape {arr.shape}",
            field=field_name,
        )
    if not np.all(np.isfinite(arr)):
        raise MaterialFileError("Entries must be finite", field=field_name)
    return arr


def _block(data: dict, key: str) -> dict:
    block = data.get(key)
    if not isinstance(block, dict):
        raise MaterialFileError("Missing or malformed block", field=key)
    return block


def _check_keys(block: dict, allowed, prefix: str):
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise MaterialFileError(
            f"Unknown keys {unknown}", field=f"{prefix}.{unknown[0]}"
        )


def _parse_cauchy(block: dict) -> CauchyTensor:
    kind = block.get("type")
    if kind == "isotropic":
        _check_keys(block, ("type", "lambda", "mu"), "cauchy")
        return isotropic_cauchy(
            _number(block.get("lambda"), "cauchy.lambda"),
            _number(block.get("mu"), "cauchy.mu"),
        )
    if kind == "matrix":
        _check_keys(block, ("type", "values"), "cauchy")
        return CauchyTensor.from_voigt(
            _matrix(block.get("values"), (6, 6), "cauchy.values")
        )
    raise MaterialFileError(
        f"Unknown type {kind!r} (isotropic or matrix)", field="cauchy.type"
    )


def _parse_cosserat(block: dict) -> CosseratTensor:
    kind = block.get("type")
    if kind == "isotropic":
        _check_keys(block, ("type", "eta", "eta_prime"), "cosserat")
        return isotropic_cosserat(
            _number(block.get("eta"), "cosserat.eta"),
            _number(block.get("eta_prime", 0.0), "cosserat.eta_prime"),
        )
    if kind == "orthotropic":
        _check_keys(block, ("type",) + ORTHOTROPIC_KEYS, "cosserat")
        entries = {
            key: _number(block[key], f"cosserat.{key}")
            for key in ORTHOTROPIC_KEYS
            if key in block
        }
        return orthotropic_cosserat(entries)
    if kind == "matrix":
        _check_keys(block, ("type", "values"), "cosserat")
        return CosseratTensor.from_matrix(
            _matrix(block.get("values"), (9, 9), "cosserat.values")
        )
    raise MaterialFileError(
        f"Unknown type {kind!r} (isotropic, orthotropic or matrix)",
        field="cosserat.type",
    )


def _parse_antiplane(block: dict) -> AntiplaneMaterial:
    _check_keys(block, ANTIPLANE_KEYS, "antiplane")
    missing = [k for k in ANTIPLANE_KEYS if k not in block]
    if missing:
        raise MaterialFileError(
            f"Missing moduli {missing}", field=f"antiplane.{missing[0]}"
        )
    return AntiplaneMaterial(
        **{k: _number(block[k], f"antiplane.{k}") for k in ANTIPLANE_KEYS}
    )


def material_from_dict(
    data: dict, path: Optional[Path] = None
) -> MaterialFile:
    if not isinstance(data, dict):
        raise MaterialFileError("Material file must contain a mapping")
    _check_keys(data, TOP_LEVEL_KEYS, "material")
    data = dict(data)
    if "density" in data and data["density"] is not None:
        data["density"] = _number(data["density"], "density")
        if data["density"] <= 0:
            raise MaterialFileError("Density must be positive", "density")

    if "antiplane" in data:
        if "cauchy" in data or "cosserat" in data:
            raise MaterialFileError(
                "An antiplane material cannot also define 3D blocks",
                field="antiplane",
            )
        antiplane = _parse_antiplane(_block(data, "antiplane"))
        C, B = embed_antiplane(antiplane)
        return MaterialFile(data, C, B, antiplane=antiplane, path=path)

    C = _parse_cauchy(_block(data, "cauchy"))
    B = _parse_cosserat(_block(data, "cosserat"))
    return MaterialFile(data, C, B, path=path)


def _line_of(text: str, field_name: Optional[str]) -> Optional[int]:
    """First line mentioning the innermost key of a dotted field name."""
    if not field_name:
        return None
    key = re.escape(field_name.split(".")[-1])
    pattern = re.compile(rf"(\"{key}\"|'{key}'|^\s*{key}\s*:)")
    for i, line in enumerate(text.splitlines(), start=1):
        if pattern.search(line):
            return i
    return None


def load_material(path: Union[str, Path]) -> MaterialFile:
    path = Path(path)
    if not path.exists():
        raise MaterialFileError(f"No such material file: {path}")
    try:
        data = load_config(path)
    except json.JSONDecodeError as e:
        raise MaterialFileError(f"Malformed JSON: {e.msg}", line=e.lineno)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise MaterialFileError(
            "Malformed YAML",
            line=mark.line + 1 if mark is not None else None,
        )
    except ValueError as e:
        raise MaterialFileError(str(e)) from None
    try:
        material = material_from_dict(data, path)
    except MaterialFileError as e:
        if e.line is None and e.field is not None:
            line = _line_of(path.read_text(), e.field)
            raise MaterialFileError(
                e.reason, field=e.field, line=line
            ) from None
        raise
    except ValueError as e:
        raise MaterialFileError(str(e)) from None
    logger.info("Loaded material %s from %s", material.name, path)
    return material


def save_material(
    material: Union[MaterialFile, dict], path: Union[str, Path]
) -> Path:
    data = material.data if isinstance(material, MaterialFile) else material
    path = Path(path)
    if path.suffix in (".yaml", ".yml"):
        return atomic_write(path, yaml.safe_dump(data, sort_keys=False))
    if path.suffix == ".json":
        dump_json(data, path)
        return path
    raise ValueError(f"Material file (path: {path}) is not JSON or YAML!")
