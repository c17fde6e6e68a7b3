"""
Discontinuity surfaces in a couple-stress solid.

Across a plane Sigma with normal n the displacement is continuous while its
gradients may jump:

    [u_j,i]   = n_i g1_j
    [u_j,ic]  = n_i n_c g2_j + (n_c D_i + n_i D_c) g1_j
    [u_j,icr] = n_i n_c n_r g3_j + (surface derivatives of g1, g2)

with D_i the surface gradient. Jumps are represented by a single tangential
Fourier mode, D_m -> i kappa_t_m, which turns continuity of tractions into a
linear system on (g1, g2, g3):

    [A_C + H2, -H1_tilde, -A_B] . (g1, g2, g3) = 0
    [H1,        A_B,       0  ] . (g1, g2, g3) = 0

Continuity of rotations is not imposed.
"""
from dataclasses import dataclass, field
import logging
from typing import Optional

import numpy as np
from scipy.linalg import null_space

from cosserat_stability.acoustic import (
    acoustic_cauchy_many,
    acoustic_cosserat_many,
    tangent_eigen,
)
from cosserat_stability.config import AnalysisSettings, get_settings
from cosserat_stability.sphere import check_unit
from cosserat_stability.tensor_core import (
    LEVI_CIVITA,
    CauchyTensor,
    CosseratTensor,
)

logger = logging.getLogger(__name__)

RANK_THRESHOLD = 1e-10


class EllipticityNotLostError(ValueError):
    def __init__(self, message: str, lambda2: float):
        super().__init__(message)
        self.lambda2 = lambda2


def _check_tangential(kappa_t, n: np.ndarray) -> np.ndarray:
    kappa_t = np.asarray(kappa_t, dtype=float)
    if kappa_t.shape != (3,):
        raise ValueError(
            f"kappa_t must be a 3-vector, got shape {kappa_t.shape}"
        )
    if abs(kappa_t @ n) > 1e-12 * max(1.0, np.linalg.norm(kappa_t)):
        raise ValueError(
            f"kappa_t must be tangential to the surface (kappa_t.n = "
            f"{kappa_t @ n:g})"
        )
    return kappa_t


def _jump_maps(n: np.ndarray, kappa_t: np.ndarray):
    """
    Jumps of the first three displacement gradients as linear maps of the
    unknowns x = (g1, g2, g3), shapes (3, 3, 9), (3, 3, 3, 9), (3, 3, 3, 3, 9).
    Index order follows u_j,icr -> [j, i, c, r].
    """
    d = 1j * kappa_t
    dd = -np.outer(kappa_t, kappa_t)  # D_a D_b
    eye = np.eye(3)
    g = [np.zeros((3, 9), dtype=complex) for _ in range(3)]
    for m in range(3):
        g[m][:, 3 * m : 3 * m + 3] = eye

    j1 = np.einsum("i,jx->jix", n, g[0])

    j2 = np.einsum("i,c,jx->jicx", n, n, g[1])
    j2 = j2 + np.einsum("c,i,jx->jicx", n, d, g[0])
    j2 = j2 + np.einsum("i,c,jx->jicx", n, d, g[0])

    j3 = np.einsum("i,c,r,jx->jicrx", n, n, n, g[2])
    j3 = j3 + np.einsum("r,c,i,jx->jicrx", n, n, d, g[1])
    j3 = j3 + np.einsum("r,i,c,jx->jicrx", n, n, d, g[1])
    j3 = j3 + np.einsum("c,i,r,jx->jicrx", n, n, d, g[1])
    j3 = j3 + np.einsum("c,ri,jx->jicrx", n, dd, g[0])
    j3 = j3 + np.einsum("r,ic,jx->jicrx", n, dd, g[0])
    j3 = j3 + np.einsum("i,cr,jx->jicrx", n, dd, g[0])
    return j1, j2, j3


def _traction_rows(c, b, n, kappa_t) -> tuple[np.ndarray, np.ndarray]:
    """Jumps of force and couple tractions as (3, 9) linear maps."""
    e = LEVI_CIVITA
    j1, j2, j3 = _jump_maps(n, kappa_t)

    m_jump = 0.5 * np.einsum("abcd,dij,jicx->abx", b, e, j2)
    div_m = 0.5 * np.einsum("rkcd,dij,jicrx->kx", b, e, j3)
    grad_m = 0.5 * np.einsum("abcd,dij,jickx->abkx", b, e, j3)

    force = np.einsum("pqmn,p,nmx->qx", c, n, j1)
    force = force - 0.5 * np.einsum("pqk,p,kx->qx", e, n, div_m)
    force = force - 0.5 * np.einsum(
        "qpk,p,a,b,abkx->qx", e, n, n, n, grad_m
    )
    couple = 0.5 * np.einsum("pqk,p,r,rkx->qx", e, n, n, m_jump)
    return force, couple


def surface_operators(
    B: CosseratTensor, n, kappa_t
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (H1, H1_tilde, H2) for one Fourier mode of the surface derivatives.

    H1 and H1_tilde are homogeneous of degree one in kappa_t, H2 of degree
    two, and all three are annihilated by n from the left.
    """
    n = check_unit(n)
    kappa_t = _check_tangential(kappa_t, n)
    # H operators do not involve the classical stiffness
    force, couple = _traction_rows(
        np.zeros((3, 3, 3, 3)), B.components, n, kappa_t
    )
    return couple[:, :3], -force[:, 3:6], force[:, :3]


def effective_rank(
    matrix: np.ndarray, threshold: float = RANK_THRESHOLD
) -> tuple[int, np.ndarray]:
    sv = np.linalg.svd(matrix, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0, sv
    return int(np.sum(sv > threshold * sv[0])), sv


@dataclass(frozen=True)
class DiscontinuitySystem:
    n: np.ndarray
    kappa_t: np.ndarray
    A_C: np.ndarray
    A_B: np.ndarray
    H1: np.ndarray
    H1_tilde: np.ndarray
    H2: np.ndarray
    matrix: np.ndarray
    rank: int
    singular_values: np.ndarray

    @property
    def underdetermined(self) -> bool:
        return self.rank < self.matrix.shape[1]

    @property
    def annihilation_residual(self) -> float:
        """Largest |n . X| over the three surface operators."""
        return float(
            max(
                np.max(np.abs(self.n @ h))
                for h in (self.H1, self.H1_tilde, self.H2)
            )
        )

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "kappa_t": self.kappa_t,
            "H1": self.H1,
            "H1_tilde": self.H1_tilde,
            "H2": self.H2,
            "matrix": self.matrix,
            "rank": self.rank,
            "unknowns": self.matrix.shape[1],
            "underdetermined": self.underdetermined,
            "singular_values": self.singular_values,
        }


def assemble_full_system(
    C: CauchyTensor, B: CosseratTensor, n, kappa_t
) -> DiscontinuitySystem:
    n = check_unit(n)
    kappa_t = _check_tangential(kappa_t, n)
    force, couple = _traction_rows(
        C.components, B.components, n, kappa_t
    )
    a_c = acoustic_cauchy_many(C, n[None])[0]
    a_b = acoustic_cosserat_many(B, n[None])[0]
    matrix = np.vstack([force, couple])
    rank, sv = effective_rank(matrix)
    logger.debug(
        "Discontinuity system at n=%s, kappa_t=%s: rank %d of 9", n, kappa_t,
        rank,
    )
    return DiscontinuitySystem(
        n=n,
        kappa_t=kappa_t,
        A_C=a_c,
        A_B=a_b,
        H1=couple[:, :3],
        H1_tilde=-force[:, 3:6],
        H2=force[:, :3] - a_c,
        matrix=matrix,
        rank=rank,
        singular_values=sv,
    )


@dataclass(frozen=True)
class JumpDecomposition:
    normal: np.ndarray
    tangential: np.ndarray
    # |A_B g_n| and |H1_tilde g_n + i A_B kappa_t (g.n)|, when B is given
    residuals: dict = field(default_factory=dict)


def decompose_jump(
    g,
    n,
    B: Optional[CosseratTensor] = None,
    kappa_t=None,
) -> JumpDecomposition:
    """
    Split g into (g.n) n and its tangential remainder. With B and kappa_t,
    also evaluate the identities satisfied by the normal part.
    """
    n = check_unit(n)
    g = np.asarray(g)
    normal = (g @ n) * n
    residuals = {}
    if B is not None:
        kappa_t = np.zeros(3) if kappa_t is None else kappa_t
        kappa_t = _check_tangential(kappa_t, n)
        a_b = acoustic_cosserat_many(B, n[None])[0]
        _, h1_tilde, _ = surface_operators(B, n, kappa_t)
        scale = B.scale * max(1.0, np.linalg.norm(kappa_t))
        residuals["A_B"] = float(np.linalg.norm(a_b @ normal)) / B.scale
        lhs = h1_tilde @ normal
        rhs = -1j * (a_b @ kappa_t) * (g @ n)
        residuals["H1_tilde"] = float(np.linalg.norm(lhs - rhs)) / scale
    return JumpDecomposition(
        normal=normal, tangential=g - normal, residuals=residuals
    )


@dataclass(frozen=True)
class ReducedSystem:
    n: np.ndarray
    kappa_t: np.ndarray
    # Rows: n, e2 (null tangent eigenvector of A_B), e3
    frame: np.ndarray
    # Unknowns (g1_1, g1_2, g1_3, g2_2, t3) in the frame
    matrix: np.ndarray
    determinant: complex
    null_space: np.ndarray
    lambda2: float
    lambda3: float

    @property
    def singular(self) -> bool:
        return self.null_space.shape[1] > 0

    def as_dict(self) -> dict:
        return {
            "frame": self.frame,
            "unknowns": ["g1_1", "g1_2", "g1_3", "g2_2", "t3"],
            "matrix": self.matrix,
            "determinant": self.determinant,
            "null_space": self.null_space,
            "lambda2": self.lambda2,
            "lambda3": self.lambda3,
        }


def reduced_system_at_loss(
    C: CauchyTensor,
    B: CosseratTensor,
    n,
    kappa_t,
    settings: Optional[AnalysisSettings] = None,
) -> ReducedSystem:
    """
    Determinate 5x5 system at a direction where A_B has a second null
    eigenvalue. The tangential part of g2 is then confined to the null
    eigenvector e2, and t3 = g3_3 - i kappa_3 g2_1 absorbs the normal part.
    """
    settings = get_settings(settings)
    n = check_unit(n)
    kappa_t = _check_tangential(kappa_t, n)
    a_b = acoustic_cosserat_many(B, n[None])
    lam, vec = tangent_eigen(a_b, n[None])
    lambda2, lambda3 = lam[0] / B.scale
    if abs(lambda2) >= settings.loss_tolerance:
        raise EllipticityNotLostError(
            f"Ellipticity is not lost at n = {n}: normalized lambda_2 = "
            f"{lambda2:.3e}",
            float(lambda2),
        )
    if abs(lambda3) < settings.loss_tolerance:
        logger.warning(
            "Both tangent eigenvalues of A_B vanish at n = %s; the reduced "
            "system is degenerate",
            n,
        )
    e2 = vec[0, 0]
    frame = np.stack([n, e2, np.cross(n, e2)])

    system = assemble_full_system(C, B, n, kappa_t)

    def rotate(m):
        return frame @ m @ frame.T

    a_c, a_b1 = rotate(system.A_C), rotate(system.A_B)
    h1, h1t, h2 = (rotate(system.H1), rotate(system.H1_tilde),
                   rotate(system.H2))

    matrix = np.zeros((5, 5), dtype=complex)
    matrix[0, :3] = a_c[0]
    matrix[1:3, :3] = (a_c + h2)[1:3]
    matrix[1:3, 3] = -h1t[1:3, 1]
    matrix[1:3, 4] = -a_b1[1:3, 2]
    matrix[3:5, :3] = h1[1:3]
    matrix[3:5, 3] = a_b1[1:3, 1]

    rank, sv = effective_rank(matrix)
    basis = (
        null_space(matrix, rcond=RANK_THRESHOLD)
        if rank < 5
        else np.zeros((5, 0), dtype=complex)
    )
    det = complex(np.linalg.det(matrix))
    logger.info(
        "Reduced system at n=%s: det %.3e, null space dim %d",
        n,
        abs(det),
        basis.shape[1],
    )
    return ReducedSystem(
        n=n,
        kappa_t=kappa_t,
        frame=frame,
        matrix=matrix,
        determinant=det,
        null_space=basis,
        lambda2=float(lambda2),
        lambda3=float(lambda3),
    )
