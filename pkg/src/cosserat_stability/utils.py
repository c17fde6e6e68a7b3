import hashlib
import json
import logging
import os
from pathlib import Path
import tempfile
from typing import Optional, Union

import numpy as np
from platformdirs import user_cache_dir
import yaml

logger = logging.getLogger(__name__)


def sanitise_name(name: str) -> str:
    """
    Sanitise preset/material names for use in filenames.
    """
    return name.strip().replace(" ", "-").lower()


def merge_dicts(d1: dict, d2: Optional[dict] = None) -> dict:
    """
    Merge two dictionaries recursively. d2 will overwrite d1 where specified.

    Keys only present in d2 are added.
    """
    # Short-circuit if d2 is None
    if d2 is None:
        return d1
    # Otherwise recursively merge
    for k, v in d2.items():
        if isinstance(v, dict) and isinstance(d1.get(k), dict):
            d1[k] = merge_dicts(d1[k], v)
        else:
            d1[k] = v
    return d1


def filter_empty_dict(d: dict) -> dict:
    """
    Filter out None values and empty dicts from a nested dict.
    """
    new_dict = {}
    for k, v in d.items():
        if isinstance(v, dict):
            v = filter_empty_dict(v)
        if v is not None and not (isinstance(v, dict) and not v):
            new_dict[k] = v
    return new_dict


def get_param_hash(*arrays: np.ndarray) -> str:
    """
    Fingerprint of a set of tensors, stable across runs and platforms.
    """
    payload = [
        np.round(np.asarray(a, dtype=float), 14).ravel().tolist()
        for a in arrays
    ]
    return hashlib.md5(
        json.dumps(payload, sort_keys=True).encode("utf-8")
    ).hexdigest()


def load_config(config_path: Union[str, Path]) -> dict:
    config_path = Path(config_path)
    with open(config_path, "r") as f:
        if config_path.suffix == ".json":
            config = json.load(f)
        elif config_path.suffix in (".yaml", ".yml"):
            config = yaml.safe_load(f)
        else:
            raise ValueError(
                f"Config file (path: {config_path}) is not JSON or YAML!"
            )
    return config


def get_settings_cache() -> tuple[Path, Path]:
    cache_dir = Path(user_cache_dir("cosserat-stability"))
    cache_dir.mkdir(parents=True, exist_ok=True)
    settings_path = cache_dir / "cosserat_settings.yaml"
    return cache_dir, settings_path


def load_settings() -> dict:
    _, settings_path = get_settings_cache()

    if settings_path.exists():
        with open(settings_path, "r") as f:
            settings = yaml.safe_load(f)
    else:
        settings = {}
    return settings or {}


def atomic_write(path: Union[str, Path], text: str) -> Path:
    """
    Write text to path via a temporary file in the same directory and a rename,
    so readers never see a partially written file.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(
        dir=path.parent, prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s", path)
    return path


def to_jsonable(obj):
    """
    Recursively convert numpy scalars/arrays (complex included) into JSON-safe
    Python objects. Complex numbers become [real, imag] pairs.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dump_json(obj, path: Optional[Union[str, Path]] = None) -> str:
    text = json.dumps(to_jsonable(obj), indent=2, allow_nan=True) + "\n"
    if path is not None:
        atomic_write(path, text)
    return text
