import numpy as np
import pytest

from cosserat_stability.config import AnalysisSettings
from cosserat_stability.sphere import (
    canonical_sign,
    check_unit,
    fibonacci_sphere,
    sweep_minimum,
    tangent_frame,
)

from .conftest import random_unit


def test_fibonacci_points_are_unit_and_spread():
    points = fibonacci_sphere(500)
    assert points.shape == (500, 3)
    np.testing.assert_allclose(np.linalg.norm(points, axis=1), 1.0)
    # Roughly balanced between hemispheres
    assert abs(np.mean(points[:, 2])) < 1e-2


def test_tangent_frame_is_right_handed(rng):
    n = random_unit(rng, 20)
    t, s = tangent_frame(n)
    np.testing.assert_allclose(np.sum(t * n, axis=1), 0, atol=1e-14)
    np.testing.assert_allclose(np.sum(s * t, axis=1), 0, atol=1e-14)
    np.testing.assert_allclose(np.cross(t, s), n, atol=1e-14)


def test_tangent_frame_single_vector():
    t, s = tangent_frame(np.array([0.0, 0.0, 1.0]))
    assert t.shape == (3,)
    np.testing.assert_allclose(np.cross(t, s), [0, 0, 1])


def test_canonical_sign():
    flipped = canonical_sign(np.array([0.0, -1.0, 2.0]))
    np.testing.assert_allclose(flipped, [0, 1, -2])
    kept = canonical_sign(np.array([1e-13, 2.0, 0.0]))
    np.testing.assert_allclose(kept, [1e-13, 2, 0])


def test_check_unit():
    with pytest.raises(ValueError, match="unit"):
        check_unit([1.0, 1.0, 0.0])
    with pytest.raises(ValueError, match="3-vector"):
        check_unit([1.0, 0.0])


@pytest.mark.parametrize("threads", [None, 2])
def test_sweep_minimum_refines_off_lattice(rng, threads):
    axis = random_unit(rng)
    settings = AnalysisSettings(
        sweep_density=128, refine_cells=2, refine_rounds=3, threads=threads
    )

    def func(directions):
        return 1.0 - (directions @ axis) ** 2

    result = sweep_minimum(func, settings)
    assert result.value < 1e-8
    assert result.value <= np.min(result.values)
    assert abs(result.direction @ axis) == pytest.approx(1.0, abs=1e-6)


def test_sweep_minimum_extra_directions():
    axis = np.array([0.0, 0.6, 0.8])
    settings = AnalysisSettings(sweep_density=64, refine_rounds=0)
    result = sweep_minimum(
        lambda d: 1.0 - (d @ axis) ** 2, settings, extra_directions=axis[None]
    )
    assert result.value == pytest.approx(0.0, abs=1e-14)
    assert len(result.directions) == 65
