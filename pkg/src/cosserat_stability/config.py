"""
Analysis settings shared by every sweep-based check.

Settings are layered: built-in defaults, then the user settings file in the
platform cache directory, then the ``COSSERAT_THREADS`` environment variable,
then explicit overrides (e.g. CLI flags).
"""
from dataclasses import asdict, dataclass, fields, replace
import logging
import os
from typing import Optional

import yaml

from cosserat_stability.utils import (
    filter_empty_dict,
    get_settings_cache,
    load_settings,
    merge_dicts,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "COSSERAT_THREADS"


@dataclass(frozen=True)
class AnalysisSettings:
    # Relative tolerance for every "> 0" / "!= 0" decision
    tolerance: float = 1e-10
    # Fibonacci lattice size for direction sweeps
    sweep_density: int = 4096
    # Local refinement around the best lattice cells
    refine_cells: int = 8
    refine_rounds: int = 3
    # Seeds for the longitudinal-direction search
    seeding_density: int = 512
    # Margins closer to zero than this are flagged as boundary cases
    band: float = 1e-6
    # Normalized lambda_2 below which ellipticity counts as lost at n
    loss_tolerance: float = 1e-8
    threads: Optional[int] = None

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError(
                f"tolerance must be positive, got {self.tolerance}"
            )
        if self.sweep_density < 8:
            raise ValueError(
                f"sweep_density must be at least 8, got {self.sweep_density}"
            )
        if self.refine_rounds < 0 or self.refine_cells < 0:
            raise ValueError("Refinement counts cannot be negative!")
        if self.threads is not None and self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")

    def as_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **overrides) -> "AnalysisSettings":
        return replace(self, **filter_empty_dict(overrides))

    def save(self):
        _, settings_path = get_settings_cache()
        with open(settings_path, "w") as f:
            yaml.safe_dump(filter_empty_dict(self.as_dict()), f)
        logger.info("Saved settings to %s", settings_path)


def _threads_from_env() -> Optional[int]:
    value = os.environ.get(THREADS_ENV)
    if not value:
        return None
    try:
        return max(1, int(value))
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", THREADS_ENV, value)
        return None


def resolve_settings(
    use_user_settings: bool = True, **overrides
) -> AnalysisSettings:
    """
    Build the effective settings. Overrides set to None are ignored.
    """
    known = {f.name for f in fields(AnalysisSettings)}
    settings = AnalysisSettings().as_dict()
    if use_user_settings:
        user = {k: v for k, v in load_settings().items() if k in known}
        settings = merge_dicts(settings, user)
    env_threads = _threads_from_env()
    if env_threads is not None:
        settings["threads"] = env_threads
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"Unknown settings: {sorted(unknown)}")
    settings = merge_dicts(settings, filter_empty_dict(overrides))
    return AnalysisSettings(**settings)


DEFAULT_SETTINGS = AnalysisSettings()


def get_settings(settings: Optional[AnalysisSettings]) -> AnalysisSettings:
    # Library calls without explicit settings use the pure defaults
    return DEFAULT_SETTINGS if settings is None else settings
