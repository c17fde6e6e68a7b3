import numpy as np
import pytest

from cosserat_stability.config import AnalysisSettings
from cosserat_stability.tensor_core import (
    DEV_BASIS,
    MANDEL_WEIGHTS,
    CauchyTensor,
    CosseratTensor,
    isotropic_cauchy,
    isotropic_cosserat,
)


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    # Keep user settings written by the CLI out of the real cache directory
    cache = tmp_path / "cache"
    monkeypatch.setattr(
        "cosserat_stability.utils.user_cache_dir", lambda name: str(cache)
    )
    monkeypatch.delenv("COSSERAT_THREADS", raising=False)
    return cache


@pytest.fixture
def fast_settings():
    return AnalysisSettings(sweep_density=256, refine_cells=2, refine_rounds=2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_cauchy(rng, shift: float = 0.0) -> CauchyTensor:
    g = rng.normal(size=(6, 6))
    mandel = g.T @ g - shift * np.eye(6)
    w = MANDEL_WEIGHTS
    return CauchyTensor.from_voigt(mandel / (w[:, None] * w[None, :]))


def random_cosserat(rng, shift: float = 0.0) -> CosseratTensor:
    g = rng.normal(size=(8, 8))
    m = g.T @ g - shift * np.eye(8)
    return CosseratTensor(
        np.einsum("ab,aij,bkl->ijkl", m, DEV_BASIS, DEV_BASIS)
    )


def random_unit(rng, size=None) -> np.ndarray:
    v = rng.normal(size=(3,) if size is None else (size, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


@pytest.fixture
def random_materials(rng):
    """Positive definite and indefinite tensor pairs."""
    return [
        (random_cauchy(rng), random_cosserat(rng)),
        (random_cauchy(rng), random_cosserat(rng)),
        (random_cauchy(rng, shift=3.0), random_cosserat(rng, shift=3.0)),
    ]


@pytest.fixture
def isotropic_reference():
    return isotropic_cauchy(1.0, 1.0), isotropic_cosserat(1.0, 0.0)
