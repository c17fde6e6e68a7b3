"""
Acoustic tensor of a couple-stress solid and plane-wave propagation.

For a plane wave with direction n and wavenumber k the propagation condition
involves A(k, n) = k^2 A_C(n) + k^4 A_B(n), where

    A_C_qn = C_pqmn n_p n_m
    A_B_qn = 1/4 e_pqk e_smn n_m n_p n_t n_r B_rkts

Micro-rotational inertia is neglected.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
from typing import Iterable, Optional

import numpy as np
from numpy.lib import scimath
import pandas as pd
from scipy.linalg import eigh as scipy_eigh
from scipy.optimize import least_squares
from tqdm import tqdm

from cosserat_stability.config import AnalysisSettings, get_settings
from cosserat_stability.sphere import (
    canonical_sign,
    check_unit,
    fibonacci_sphere,
    tangent_frame,
)
from cosserat_stability.tensor_core import (
    LEVI_CIVITA,
    CauchyTensor,
    CosseratTensor,
)

logger = logging.getLogger(__name__)


def _components(tensor) -> np.ndarray:
    return getattr(tensor, "components", tensor)


def acoustic_cauchy_many(C, directions: np.ndarray) -> np.ndarray:
    """A_C for a stack of directions, shape (N, 3, 3)."""
    return np.einsum(
        "pqmn,Np,Nm->Nqn", _components(C), directions, directions
    )


def cosserat_christoffel_many(B, directions: np.ndarray) -> np.ndarray:
    """B_hat(n)_ks = n_r n_t B_rkts, shape (N, 3, 3)."""
    return np.einsum("rkts,Nr,Nt->Nks", _components(B), directions, directions)


def acoustic_cosserat_many(B, directions: np.ndarray) -> np.ndarray:
    """A_B for a stack of directions, shape (N, 3, 3)."""
    # N_qk = e_pqk n_p; A_B = 1/4 N B_hat N^T
    cross = np.einsum("pqk,Np->Nqk", LEVI_CIVITA, directions)
    b_hat = cosserat_christoffel_many(B, directions)
    return 0.25 * np.einsum("Nqk,Nks,Nns->Nqn", cross, b_hat, cross)


def acoustic_cauchy(C: CauchyTensor, n) -> np.ndarray:
    n = check_unit(n)
    return acoustic_cauchy_many(C, n[None, :])[0]


def acoustic_cosserat(B: CosseratTensor, n) -> np.ndarray:
    n = check_unit(n)
    return acoustic_cosserat_many(B, n[None, :])[0]


@dataclass(frozen=True)
class AcousticPair:
    n: np.ndarray
    A_C: np.ndarray
    A_B: np.ndarray

    def tangent_eigenvalues(self) -> tuple[float, float]:
        """
        Eigenvalues lambda_2 <= lambda_3 of A_B restricted to the plane
        orthogonal to n.
        """
        lam, _ = tangent_eigen(self.A_B[None], self.n[None])
        return float(lam[0, 0]), float(lam[0, 1])

    @property
    def tau_nu(self) -> float:
        return float(self.n @ self.A_C @ self.n)


def acoustic_pair(C: CauchyTensor, B: CosseratTensor, n) -> AcousticPair:
    n = check_unit(n)
    return AcousticPair(n, acoustic_cauchy(C, n), acoustic_cosserat(B, n))


def tangent_eigen(
    A_B: np.ndarray, directions: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigenvalues (ascending) and 3D eigenvectors of the 2x2 restriction of
    A_B to the (t, s) tangent frame of each direction.
    """
    t, s = tangent_frame(directions)
    frame = np.stack([t, s], axis=1)  # (N, 2, 3)
    restricted = np.einsum("Nai,Nij,Nbj->Nab", frame, A_B, frame)
    restricted = (restricted + np.swapaxes(restricted, 1, 2)) / 2
    lam, vec = np.linalg.eigh(restricted)
    vectors = np.einsum("Nai,Nab->Nbi", frame, vec)
    return lam, vectors


def total_acoustic(pair: AcousticPair, k: float) -> np.ndarray:
    return k**2 * pair.A_C + k**4 * pair.A_B


def _sorted_eigenpairs(omega_sq: np.ndarray, vectors: np.ndarray):
    scale = max(1.0, float(np.max(np.abs(omega_sq))))
    amps = [canonical_sign(vectors[:, i]) for i in range(3)]
    keys = [
        (-round(omega_sq[i] / scale, 12), tuple(-amps[i])) for i in range(3)
    ]
    order = sorted(range(3), key=lambda i: keys[i])
    return omega_sq[order], np.array([amps[i] for i in order])


@dataclass(frozen=True)
class WaveSolution:
    n: np.ndarray
    k: float
    rho: float
    # Descending omega^2 per branch, amplitudes as rows
    omega_sq: np.ndarray
    amplitudes: np.ndarray
    residual: float = field(default=0.0, compare=False)

    @property
    def phase_velocity(self) -> np.ndarray:
        """V = omega / k; complex where omega^2 < 0."""
        return scimath.sqrt(self.omega_sq) / abs(self.k)

    @property
    def complex_flags(self) -> np.ndarray:
        return self.omega_sq < 0


def wave_solve(
    C: CauchyTensor, B: CosseratTensor, rho: float, n, k: float
) -> WaveSolution:
    if rho <= 0:
        raise ValueError(f"Density must be positive, got rho = {rho}")
    if k == 0:
        raise ValueError("Wavenumber must be non-zero")
    pair = acoustic_pair(C, B, n)
    A = total_acoustic(pair, k)
    A = (A + A.T) / 2
    norm = max(float(np.linalg.norm(A, 2)), np.finfo(float).tiny)

    eigval, eigvec = np.linalg.eigh(A)
    residual = np.linalg.norm(A @ eigvec - eigvec * eigval, axis=0).max()
    if residual >= 1e-10 * norm:
        logger.debug("numpy eigh residual %.3e, retrying LAPACK ev", residual)
        eigval, eigvec = scipy_eigh(A, driver="ev")
        residual = np.linalg.norm(A @ eigvec - eigvec * eigval, axis=0).max()
        if residual >= 1e-10 * norm:
            raise RuntimeError(
                f"Eigen-solve rejected: residual {residual:.3e} for |A| = "
                f"{norm:.3e}"
            )
    omega_sq, amplitudes = _sorted_eigenpairs(eigval / rho, eigvec)
    if np.any(omega_sq < 0):
        logger.warning(
            "Negative omega^2 at n=%s, k=%g: complex phase velocity",
            np.round(pair.n, 6),
            k,
        )
    return WaveSolution(
        n=pair.n,
        k=float(k),
        rho=float(rho),
        omega_sq=omega_sq,
        amplitudes=amplitudes,
        residual=float(residual),
    )


@dataclass(frozen=True)
class IsotropicDispersion:
    V_s: complex
    omega_sq: float
    # |k| at which the shear branch is cut off, None when absent
    cutoff_k_magnitude: Optional[float]


def isotropic_dispersion(
    mu: float, eta: float, rho: float, k: float
) -> IsotropicDispersion:
    """Shear branch of an isotropic couple-stress solid."""
    if rho <= 0:
        raise ValueError(f"Density must be positive, got rho = {rho}")
    vs_sq = (mu + eta * k**2) / rho
    cutoff = float(np.sqrt(mu / eta)) if eta > 0 and mu >= 0 else None
    V_s = scimath.sqrt(vs_sq)
    return IsotropicDispersion(
        V_s=complex(V_s) if np.iscomplexobj(V_s) else float(V_s),
        omega_sq=float(k**2 * vs_sq),
        cutoff_k_magnitude=cutoff,
    )


def dispersion_table(
    C: CauchyTensor,
    B: CosseratTensor,
    rho: float,
    n,
    ks: Iterable[float],
    branch: Optional[int] = None,
) -> pd.DataFrame:
    """
    All branches (or one) for each k. k = 0 rows give the long-wave classical
    speeds with omega^2 = 0. Complex speeds are written as NaN.
    """
    if rho <= 0:
        raise ValueError(f"Density must be positive, got rho = {rho}")
    n = check_unit(n)
    rows = []
    for k in ks:
        if k == 0:
            lam, vec = np.linalg.eigh(acoustic_cauchy(C, n))
            speeds_sq, amps = _sorted_eigenpairs(lam / rho, vec)
            omega_sq = np.zeros(3)
        else:
            sol = wave_solve(C, B, rho, n, k)
            omega_sq, amps = sol.omega_sq, sol.amplitudes
            speeds_sq = omega_sq / k**2
        for i in range(3):
            if branch is not None and i != branch:
                continue
            rows.append(
                {
                    "k": float(k),
                    "branch_index": i,
                    "omega_sq": float(omega_sq[i]),
                    "V": (
                        float(np.sqrt(speeds_sq[i]))
                        if speeds_sq[i] >= 0
                        else np.nan
                    ),
                    "d1": float(amps[i][0]),
                    "d2": float(amps[i][1]),
                    "d3": float(amps[i][2]),
                }
            )
    columns = ["k", "branch_index", "omega_sq", "V", "d1", "d2", "d3"]
    return pd.DataFrame(rows, columns=columns)


@dataclass(frozen=True)
class LongitudinalResult:
    directions: list
    residuals: list
    all_longitudinal: bool = False
    notes: list = field(default_factory=list)


def _alignment_residual(C, directions: np.ndarray) -> np.ndarray:
    a_c = acoustic_cauchy_many(C, directions)
    an = np.einsum("Nqn,Nn->Nq", a_c, directions)
    tau = np.sum(an * directions, axis=1, keepdims=True)
    norm = np.linalg.norm(a_c, ord=2, axis=(1, 2))
    norm = np.where(norm > 0, norm, 1.0)
    return np.linalg.norm(an - tau * directions, axis=1) / norm


def _polish_longitudinal(C, seed: np.ndarray) -> tuple[np.ndarray, float]:
    t, s = tangent_frame(seed)

    def at(x):
        n = np.cos(x[0]) * np.cos(x[1]) * seed
        n = n + np.sin(x[0]) * np.cos(x[1]) * t + np.sin(x[1]) * s
        return n / np.linalg.norm(n)

    def residual(x):
        n = at(x)
        a_c = acoustic_cauchy_many(C, n[None])[0]
        an = a_c @ n
        norm = np.linalg.norm(a_c, 2) or 1.0
        return (an - (n @ an) * n) / norm

    fit = least_squares(
        residual, np.zeros(2), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    n = at(fit.x)
    return n, float(_alignment_residual(C, n[None])[0])


def longitudinal_directions(
    C: CauchyTensor,
    settings: Optional[AnalysisSettings] = None,
    residual_tolerance: float = 1e-8,
    progress: bool = False,
) -> LongitudinalResult:
    """
    Directions n where A_C(n) n is parallel to n, i.e. the critical points of
    n . A_C(n) n on the sphere. Seeds from a Fibonacci lattice are polished by
    Levenberg-Marquardt; results are deduplicated up to sign.
    """
    settings = get_settings(settings)
    seeds = fibonacci_sphere(settings.seeding_density)
    seeds = seeds[seeds[:, 2] >= 0]  # +-n are equivalent
    initial = _alignment_residual(C, seeds)
    if np.all(initial < residual_tolerance):
        logger.info("Every direction is longitudinal")
        axes = [np.eye(3)[i] for i in range(3)]
        return LongitudinalResult(
            directions=axes,
            residuals=[0.0, 0.0, 0.0],
            all_longitudinal=True,
            notes=["all directions longitudinal"],
        )

    def polish(seed):
        return _polish_longitudinal(C, seed)

    iterator = tqdm(seeds, desc="Longitudinal seeds", disable=not progress)
    if settings.threads and settings.threads > 1:
        with ThreadPoolExecutor(max_workers=settings.threads) as pool:
            polished = list(pool.map(polish, iterator))
    else:
        polished = [polish(seed) for seed in iterator]

    found, residuals = [], []
    for n, res in sorted(polished, key=lambda p: p[1]):
        if res >= residual_tolerance:
            continue
        n = canonical_sign(n)
        if any(np.arccos(min(1.0, abs(n @ m))) < 1e-3 for m in found):
            continue
        found.append(n)
        residuals.append(res)
    notes = []
    if len(found) < 3:
        notes.append(
            f"only {len(found)} longitudinal directions found at seeding "
            f"density {settings.seeding_density}"
        )
        logger.warning(notes[-1])
    return LongitudinalResult(
        directions=found, residuals=residuals, notes=notes
    )
