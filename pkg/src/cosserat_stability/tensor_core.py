"""
Elasticity tensors of a couple-stress solid and the fields they act on.

Canonical storage is always the full 3x3x3x3 array. Matrix forms exist for I/O
and eigen-solves only:

* Voigt stiffness (engineering shear), 6x6, order (11, 22, 33, 23, 13, 12)
* reduced matrix on tensor-component strain 6-vectors
  (e11, e22, e33, e23, e13, e12), defined so that e . M . e equals the full
  quadratic form (normal/shear blocks carry a factor 2, shear/shear 4)
* Mandel matrix (sqrt(2) weights), orthonormal, used for eigenvalues
* 9x9 couple-stress matrix on the row-major curvature 9-vector
  (k11, k12, k13, k21, ..., k33)

Levi-Civita convention: e_123 = +1.
"""
from dataclasses import dataclass, field
import logging
from typing import Mapping, Optional

import numpy as np

logger = logging.getLogger(__name__)

LEVI_CIVITA = np.zeros((3, 3, 3))
LEVI_CIVITA[0, 1, 2] = LEVI_CIVITA[1, 2, 0] = LEVI_CIVITA[2, 0, 1] = 1.0
LEVI_CIVITA[0, 2, 1] = LEVI_CIVITA[2, 1, 0] = LEVI_CIVITA[1, 0, 2] = -1.0

IDENTITY = np.eye(3)

# Flattened 3x3 positions of the Voigt components, and the inverse map
VOIGT_INDICES = [0, 4, 8, 5, 2, 1]
UNVOIGT_INDICES = [0, 5, 4, 5, 1, 3, 4, 3, 2]
# Tensor-component 6-vector weights that make the reduced form exact
REDUCED_WEIGHTS = np.array([1.0, 1.0, 1.0, 2.0, 2.0, 2.0])
MANDEL_WEIGHTS = np.sqrt(REDUCED_WEIGHTS)

# Independent orthotropic couple-stress moduli, in matrix (curvature) order
ORTHOTROPIC_KEYS = (
    "B1111",
    "B1122",
    "B2222",
    "B1212",
    "B1221",
    "B2121",
    "B1313",
    "B1331",
    "B3131",
    "B2323",
    "B2332",
    "B3232",
)


def _orthonormal_basis(kind: str) -> np.ndarray:
    """
    Orthonormal (Frobenius) basis of symmetric (6) or deviatoric (8) tensors.
    """
    basis = []
    if kind == "sym":
        for i in range(3):
            e = np.zeros((3, 3))
            e[i, i] = 1.0
            basis.append(e)
        for i, j in ((1, 2), (0, 2), (0, 1)):
            e = np.zeros((3, 3))
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            basis.append(e)
    elif kind == "dev":
        basis.append(np.diag([1.0, -1.0, 0.0]) / np.sqrt(2))
        basis.append(np.diag([1.0, 1.0, -2.0]) / np.sqrt(6))
        for i in range(3):
            for j in range(3):
                if i != j:
                    e = np.zeros((3, 3))
                    e[i, j] = 1.0
                    basis.append(e)
    else:
        raise ValueError(f"Unknown basis kind {kind}")
    return np.array(basis)


SYM_BASIS = _orthonormal_basis("sym")
DEV_BASIS = _orthonormal_basis("dev")
# Deviatoric projector acting on an index pair
DEV_PROJECTOR = np.einsum("ik,jl->ijkl", IDENTITY, IDENTITY) - np.einsum(
    "ij,kl->ijkl", IDENTITY, IDENTITY
) / 3


def _as_tensor4(components, name: str) -> np.ndarray:
    arr = np.array(components, dtype=float)
    if arr.shape != (3, 3, 3, 3):
        raise ValueError(
            f"{name} components must have shape (3, 3, 3, 3), got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} components must be finite!")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def tensor_scale(arr: np.ndarray) -> float:
    """Largest absolute component, or 1 for a null tensor."""
    scale = float(np.max(np.abs(arr))) if np.size(arr) else 0.0
    return scale if scale > 0 else 1.0


def contract(tensor: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Apply a fourth-order tensor to a second-order one: T_pqmn x_mn."""
    return np.einsum("pqmn,mn->pq", tensor, x)


def quadratic_form(tensor: np.ndarray, x: np.ndarray) -> float:
    return float(np.einsum("pq,pqmn,mn->", x, tensor, x))


@dataclass(frozen=True)
class CauchyTensor:
    """
    Classical elasticity tensor with major and minor symmetries.

    Input is symmetrized on construction; the discarded part is kept in
    ``symmetry_residual``.
    """

    components: np.ndarray
    symmetry_residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        c = _as_tensor4(self.components, "Cauchy")
        sym = (c + c.transpose(1, 0, 2, 3)) / 2
        sym = (sym + sym.transpose(0, 1, 3, 2)) / 2
        sym = (sym + sym.transpose(2, 3, 0, 1)) / 2
        residual = float(np.max(np.abs(sym - c)))
        if residual > 1e-12 * tensor_scale(c):
            logger.warning(
                "Cauchy tensor symmetrized (max residual %.3e)", residual
            )
        object.__setattr__(self, "components", _freeze(sym))
        object.__setattr__(self, "symmetry_residual", residual)

    @property
    def scale(self) -> float:
        return tensor_scale(self.components)

    def apply(self, strain: np.ndarray) -> np.ndarray:
        return contract(self.components, strain)

    def form(self, strain: np.ndarray) -> float:
        return quadratic_form(self.components, strain)

    def to_voigt(self) -> np.ndarray:
        return self.components.reshape(9, 9)[VOIGT_INDICES][
            :, VOIGT_INDICES
        ].copy()

    @classmethod
    def from_voigt(cls, matrix) -> "CauchyTensor":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (6, 6):
            raise ValueError(
                f"Voigt stiffness must be 6x6, got shape {matrix.shape}"
            )
        full = matrix[UNVOIGT_INDICES][:, UNVOIGT_INDICES]
        return cls(full.reshape(3, 3, 3, 3))

    def reduced_matrix(self) -> np.ndarray:
        w = REDUCED_WEIGHTS
        return w[:, None] * self.to_voigt() * w[None, :]

    @classmethod
    def from_reduced(cls, matrix) -> "CauchyTensor":
        w = REDUCED_WEIGHTS
        return cls.from_voigt(np.asarray(matrix) / (w[:, None] * w[None, :]))

    def mandel_matrix(self) -> np.ndarray:
        w = MANDEL_WEIGHTS
        return w[:, None] * self.to_voigt() * w[None, :]


@dataclass(frozen=True)
class CosseratTensor:
    """
    Couple-stress tensor B_pqmn with major symmetry and vanishing traces on
    both index pairs. Input is projected onto the deviatoric-deviatoric
    subspace; ``projection_residual`` records what was removed.
    """

    components: np.ndarray
    projection_residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        b = _as_tensor4(self.components, "Cosserat")
        sym = (b + b.transpose(2, 3, 0, 1)) / 2
        proj = np.einsum(
            "pqab,abcd,cdmn->pqmn", DEV_PROJECTOR, sym, DEV_PROJECTOR
        )
        residual = float(np.max(np.abs(proj - b)))
        if residual > 1e-12 * tensor_scale(b):
            logger.warning(
                "Cosserat tensor projected to trace-free form "
                "(max residual %.3e)",
                residual,
            )
        object.__setattr__(self, "components", _freeze(proj))
        object.__setattr__(self, "projection_residual", residual)

    @property
    def scale(self) -> float:
        return tensor_scale(self.components)

    def apply(self, curvature: np.ndarray) -> np.ndarray:
        return contract(self.components, curvature)

    def form(self, curvature: np.ndarray) -> float:
        return quadratic_form(self.components, curvature)

    def matrix(self) -> np.ndarray:
        return self.components.reshape(9, 9).copy()

    @classmethod
    def from_matrix(cls, matrix) -> "CosseratTensor":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (9, 9):
            raise ValueError(
                f"Couple-stress matrix must be 9x9, got shape {matrix.shape}"
            )
        return cls(matrix.reshape(3, 3, 3, 3))

    def orthotropic_entries(self) -> dict:
        b = self.components
        return {
            key: float(b[tuple(int(c) - 1 for c in key[1:])])
            for key in ORTHOTROPIC_KEYS
        }


@dataclass(frozen=True)
class KinematicState:
    strain: np.ndarray
    rotation: np.ndarray
    curvature: np.ndarray

    def __add__(self, other: "KinematicState") -> "KinematicState":
        return KinematicState(
            self.strain + other.strain,
            self.rotation + other.rotation,
            self.curvature + other.curvature,
        )

    def __mul__(self, a: float) -> "KinematicState":
        return KinematicState(
            a * self.strain, a * self.rotation, a * self.curvature
        )

    __rmul__ = __mul__


@dataclass(frozen=True)
class StressState:
    tau: np.ndarray
    m: np.ndarray
    alpha: np.ndarray

    @property
    def sigma(self) -> np.ndarray:
        return self.tau + self.alpha


def isotropic_cauchy(lam: float, mu: float) -> CauchyTensor:
    """lambda d_pq d_mn + mu (d_pm d_qn + d_pn d_qm)."""
    d = IDENTITY
    c = lam * np.einsum("pq,mn->pqmn", d, d) + mu * (
        np.einsum("pm,qn->pqmn", d, d) + np.einsum("pn,qm->pqmn", d, d)
    )
    return CauchyTensor(c)


def isotropic_cosserat(eta: float, eta_prime: float) -> CosseratTensor:
    """
    4 eta d_ik d_jl + 4 eta' d_il d_jk - 4 (eta + eta') / 3 d_ij d_kl, so that
    m = 4 eta kappa + 4 eta' kappa^T on trace-free curvatures.
    """
    d = IDENTITY
    b = (
        4 * eta * np.einsum("ik,jl->ijkl", d, d)
        + 4 * eta_prime * np.einsum("il,jk->ijkl", d, d)
        - 4 * (eta + eta_prime) / 3 * np.einsum("ij,kl->ijkl", d, d)
    )
    return CosseratTensor(b)


def orthotropic_cosserat(
    b: Optional[Mapping[str, float]] = None, **entries: float
) -> CosseratTensor:
    """
    Assemble an orthotropic couple-stress tensor from its 12 independent
    entries (keys ``B1111``, ``B1122``, ... as in ``ORTHOTROPIC_KEYS``;
    missing keys are zero). B1133, B2233 and B3333 follow from the trace
    constraints.
    """
    values = dict(b or {})
    values.update(entries)
    unknown = set(values) - set(ORTHOTROPIC_KEYS)
    if unknown:
        raise ValueError(f"Unknown orthotropic entries: {sorted(unknown)}")
    values = {k: float(values.get(k, 0.0)) for k in ORTHOTROPIC_KEYS}
    bad = [k for k, v in values.items() if not np.isfinite(v)]
    if bad:
        raise ValueError(f"Orthotropic entries must be finite: {bad}")

    full = np.zeros((3, 3, 3, 3))

    def put(i, j, k, l, v):
        full[i, j, k, l] = v
        full[k, l, i, j] = v

    for key, v in values.items():
        put(*(int(c) - 1 for c in key[1:]), v)
    b1133 = -(values["B1111"] + values["B1122"])
    b2233 = -(values["B1122"] + values["B2222"])
    put(0, 0, 2, 2, b1133)
    put(1, 1, 2, 2, b2233)
    put(2, 2, 2, 2, -(b1133 + b2233))

    trace_error = max(
        np.max(np.abs(np.einsum("ppmn->mn", full))),
        np.max(np.abs(np.einsum("pqmm->pq", full))),
    )
    if trace_error > 1e-12 * tensor_scale(full):
        raise RuntimeError(
            f"Orthotropic assembly is not trace-free ({trace_error:.3e})"
        )
    return CosseratTensor(full)


def kinematics(grad_u, grad_grad_u) -> KinematicState:
    """
    Strain, rotation and curvature from the displacement gradient
    ``grad_u[k, p] = u_k,p`` and second gradient
    ``grad_grad_u[k, p, r] = u_k,pr``.
    """
    grad_u = np.asarray(grad_u, dtype=float)
    ggu = np.asarray(grad_grad_u, dtype=float)
    if grad_u.shape != (3, 3) or ggu.shape != (3, 3, 3):
        raise ValueError("Expected a 3x3 gradient and a 3x3x3 second gradient")
    asym = np.max(np.abs(ggu - ggu.transpose(0, 2, 1)))
    if asym > 1e-12 * max(1.0, np.max(np.abs(ggu))):
        raise ValueError(
            "Second displacement gradient must be symmetric in its "
            f"derivative indices (asymmetry {asym:.3e})"
        )
    strain = (grad_u + grad_u.T) / 2
    rotation = 0.5 * np.einsum("qpk,kp->q", LEVI_CIVITA, grad_u)
    # kappa_pq = omega_q,p
    curvature = 0.5 * np.einsum("qjk,kjp->pq", LEVI_CIVITA, ggu)
    return KinematicState(strain, rotation, curvature)


def constitutive(
    C: CauchyTensor,
    B: CosseratTensor,
    state: KinematicState,
    div_m=None,
    Y=None,
) -> StressState:
    """
    Symmetric stress, couple-stress deviator and the antisymmetric stress
    alpha_pq = -1/2 e_pqk (m_rk,r + Y_k). ``div_m`` is the 3-vector m_rk,r.
    """
    div_m = np.zeros(3) if div_m is None else np.asarray(div_m, dtype=float)
    Y = np.zeros(3) if Y is None else np.asarray(Y, dtype=float)
    if div_m.shape != (3,) or Y.shape != (3,):
        raise ValueError("div_m and Y must be 3-vectors")
    tau = C.apply(state.strain)
    m = B.apply(state.curvature)
    alpha = -0.5 * np.einsum("pqk,k->pq", LEVI_CIVITA, div_m + Y)
    return StressState(tau, m, alpha)


@dataclass(frozen=True)
class PDResult:
    verdict: bool
    min_eigenvalue: float
    # min_eigenvalue over the largest tensor component, as the SE margins
    margin: float


def _pd_on_basis(tensor: np.ndarray, basis: np.ndarray, tolerance: float):
    form = np.einsum("aij,ijkl,bkl->ab", basis, tensor, basis)
    form = (form + form.T) / 2
    eig = np.linalg.eigvalsh(form)
    norm = float(np.max(np.abs(eig)))
    min_eig = float(eig[0])
    return PDResult(
        verdict=bool(min_eig > tolerance * max(1.0, norm)),
        min_eigenvalue=min_eig,
        margin=min_eig / tensor_scale(tensor),
    )


def check_pd_cauchy(C: CauchyTensor, tolerance: float = 1e-10) -> PDResult:
    """Positive definiteness over the 6-dimensional symmetric subspace."""
    return _pd_on_basis(C.components, SYM_BASIS, tolerance)


def check_pd_cosserat(B: CosseratTensor, tolerance: float = 1e-10) -> PDResult:
    """Positive definiteness over the 8-dimensional trace-free subspace."""
    return _pd_on_basis(B.components, DEV_BASIS, tolerance)
