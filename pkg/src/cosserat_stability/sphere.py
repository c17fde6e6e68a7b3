"""
Direction sweeps: Fibonacci lattice on the unit sphere plus local
golden-section refinement of the best cells.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from cosserat_stability.config import AnalysisSettings, get_settings

logger = logging.getLogger(__name__)

GOLDEN = (1.0 + 5.0**0.5) / 2.0

# Vectorized objective: (N, 3) unit vectors -> (N,) values
DirectionFunction = Callable[[np.ndarray], np.ndarray]


def fibonacci_sphere(npoints: int) -> np.ndarray:
    """
    Quasi-uniform points on the unit sphere, shape (npoints, 3).
    """
    indices = np.arange(0, npoints, dtype=float) + 0.5
    phi = np.arccos(1.0 - 2.0 * indices / npoints)
    theta = 2.0 * np.pi * indices / GOLDEN

    x = np.cos(theta) * np.sin(phi)
    y = np.sin(theta) * np.sin(phi)
    z = np.cos(phi)
    return np.stack([x, y, z], axis=-1)


def tangent_frame(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Deterministic right-handed orthonormal pair (t, s) orthogonal to n.

    t comes from the coordinate axis along which n has its smallest component.
    Works on a single vector or a stack of shape (N, 3).
    """
    n = np.asarray(n, dtype=float)
    single = n.ndim == 1
    n = np.atleast_2d(n)
    pivot = np.argmin(np.abs(n), axis=1)
    e = np.zeros_like(n)
    e[np.arange(len(n)), pivot] = 1.0
    t = e - np.sum(e * n, axis=1, keepdims=True) * n
    t /= np.linalg.norm(t, axis=1, keepdims=True)
    s = np.cross(n, t)
    if single:
        return t[0], s[0]
    return t, s


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip v so that its first non-negligible component is positive."""
    v = np.asarray(v)
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if len(idx) and np.real(v[idx[0]]) < 0:
        return -v
    return v


def check_unit(n, name: str = "n", atol: float = 1e-12) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {n.shape}")
    if abs(np.linalg.norm(n) - 1.0) > atol:
        raise ValueError(
            f"{name} must be a unit vector (|{name}| = {np.linalg.norm(n)})"
        )
    return n


@dataclass(frozen=True)
class SweepResult:
    value: float
    direction: np.ndarray
    # All evaluated lattice directions and values (before refinement)
    directions: np.ndarray
    values: np.ndarray


def _refine_seed(
    func: DirectionFunction, seed: np.ndarray, width: float, rounds: int
) -> tuple[float, np.ndarray]:
    best_n = seed
    best_v = float(func(seed[None, :])[0])
    for _ in range(rounds):
        t, s = tangent_frame(best_n)
        centre = best_n

        def at(a, b):
            n = np.cos(a) * np.cos(b) * centre
            n = n + np.sin(a) * np.cos(b) * t + np.sin(b) * s
            return n / np.linalg.norm(n)

        # Coordinate-wise golden-section along the two local angles
        res_a = minimize_scalar(
            lambda a: float(func(at(a, 0.0)[None, :])[0]),
            bounds=(-width, width),
            method="bounded",
            options={"xatol": 1e-10},
        )
        a = res_a.x if res_a.fun < best_v else 0.0
        res_b = minimize_scalar(
            lambda b: float(func(at(a, b)[None, :])[0]),
            bounds=(-width, width),
            method="bounded",
            options={"xatol": 1e-10},
        )
        candidate = at(a, res_b.x)
        value = float(func(candidate[None, :])[0])
        if value < best_v:
            best_v, best_n = value, candidate
        width /= 2
    return best_v, best_n


def sweep_minimum(
    func: DirectionFunction,
    settings: Optional[AnalysisSettings] = None,
    extra_directions: Optional[np.ndarray] = None,
) -> SweepResult:
    """
    Global minimum of ``func`` over unit directions.

    The lattice is evaluated in one vectorized call; the best
    ``refine_cells`` points are then refined locally.
    """
    settings = get_settings(settings)
    directions = fibonacci_sphere(settings.sweep_density)
    if extra_directions is not None and len(extra_directions):
        directions = np.vstack([directions, extra_directions])
    values = np.asarray(func(directions), dtype=float)
    order = np.argsort(values, kind="stable")
    best_v = float(values[order[0]])
    best_n = directions[order[0]]

    n_cells = min(settings.refine_cells, len(order))
    if settings.refine_rounds > 0 and n_cells > 0:
        # Roughly one lattice spacing
        width = 2.0 * np.sqrt(4 * np.pi / settings.sweep_density)
        seeds = [directions[i] for i in order[:n_cells]]

        def refine(seed):
            return _refine_seed(func, seed, width, settings.refine_rounds)

        if settings.threads and settings.threads > 1:
            with ThreadPoolExecutor(max_workers=settings.threads) as pool:
                refined = list(pool.map(refine, seeds))
        else:
            refined = [refine(seed) for seed in seeds]
        for value, n in refined:
            if value < best_v:
                best_v, best_n = value, n
        logger.debug(
            "Sweep minimum %.6e (lattice %.6e)", best_v, values[order[0]]
        )
    return SweepResult(
        value=best_v,
        direction=canonical_sign(best_n),
        directions=directions,
        values=values,
    )
