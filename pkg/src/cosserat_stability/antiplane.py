"""
Antiplane strain of an orthotropic couple-stress solid.

With a single out-of-plane displacement w(x, y) equilibrium reduces to

    c55 w_xx + c44 w_yy - 1/4 (b2 w_xxxx + 2 b0 w_xxyy + b4 w_yyyy)
        + X_z + 1/2 (Y_y,x - Y_x,y) = 0,        b0 = b1 - b3.

Solutions of the principal part have the form F(x + Psi y) with
Psi^4 + 2 gamma Psi^2 + beta = 0, beta = b2/b4 and gamma = b0/b4. The position
of (beta, gamma) decides the regime of the operator:

    EI  elliptic imaginary  beta > 0, gamma >= sqrt(beta)
    EC  elliptic complex    beta > 0, |gamma| < sqrt(beta)
    H   hyperbolic          beta > 0, gamma <= -sqrt(beta)
    P   parabolic           beta <= 0
"""
from dataclasses import asdict, dataclass, field
import logging
from typing import Optional

import numpy as np
from numpy.lib import scimath
import pandas as pd
from scipy.optimize import linear_sum_assignment

from cosserat_stability.tensor_core import (
    CauchyTensor,
    CosseratTensor,
    orthotropic_cosserat,
    tensor_scale,
)

logger = logging.getLogger(__name__)

REGIMES = ("EI", "EC", "H", "P")
BOUNDARIES = ("EI/P-boundary", "EC/H-boundary", "EI/EC-boundary")
BOUNDARY_TOLERANCE = 1e-8


class UnsupportedParameterizationError(ValueError):
    """b4 <= 0: relabel the axes so that b4 > 0."""


class AssumptionViolationError(ValueError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class AntiplaneMaterial:
    c44: float = 0.0
    c55: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    b3: float = 0.0
    b4: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value):
                raise ValueError(f"Antiplane modulus {name} must be finite")
            object.__setattr__(self, name, float(value))

    @property
    def b0(self) -> float:
        return self.b1 - self.b3

    def _require_b4(self):
        if self.b4 <= 0:
            raise UnsupportedParameterizationError(
                f"b4 = {self.b4} <= 0: the regime analysis assumes b4 > 0; "
                "swap the x and y axes (b2 <-> b4, c44 <-> c55)"
            )

    @property
    def beta(self) -> float:
        self._require_b4()
        return self.b2 / self.b4

    @property
    def gamma(self) -> float:
        self._require_b4()
        return self.b0 / self.b4

    def as_dict(self) -> dict:
        return asdict(self)


def isotropic_antiplane(
    mu: float, eta: float, eta_prime: float = 0.0
) -> AntiplaneMaterial:
    return AntiplaneMaterial(
        c44=mu,
        c55=mu,
        b1=4 * eta + 4 * eta_prime,
        b2=4 * eta,
        b3=4 * eta_prime,
        b4=4 * eta,
    )


def _orthotropic_mask() -> np.ndarray:
    idx = np.indices((3, 3, 3, 3)).reshape(4, -1).T
    allowed = [
        all(np.count_nonzero(row == axis) % 2 == 0 for axis in range(3))
        for row in idx
    ]
    return np.array(allowed).reshape(3, 3, 3, 3)


ORTHOTROPIC_MASK = _orthotropic_mask()


def from_orthotropic(
    B: CosseratTensor,
    c44: float = 0.0,
    c55: float = 0.0,
    strict: bool = False,
    tolerance: float = 1e-10,
) -> AntiplaneMaterial:
    """
    Antiplane moduli of an orthotropic couple-stress tensor.

    Since kappa_xx = -kappa_yy in antiplane strain, B1122 enters only through
    b1 = B1111 - B1122, which requires B1111 = B2222. ``strict=True``
    additionally demands the null secondary torsional stiffness B1122 = 0.
    The general case with B1111 != B2222 is not supported.
    """
    b = B.components
    scale = tensor_scale(b)
    off = float(np.max(np.abs(np.where(ORTHOTROPIC_MASK, 0.0, b))))
    if off > tolerance * scale:
        raise AssumptionViolationError(
            f"Tensor is not orthotropic in the given axes (residual {off:g})",
            off,
        )
    residual = abs(b[0, 0, 0, 0] - b[1, 1, 1, 1])
    if strict:
        residual = max(residual, abs(b[0, 0, 1, 1]))
    if residual > tolerance * scale:
        raise AssumptionViolationError(
            "Antiplane reduction needs B1111 = B2222"
            + (" and B1122 = 0" if strict else "")
            + f" (residual {residual:g}); the general six-constant law is "
            "out of scope",
            residual,
        )
    return AntiplaneMaterial(
        c44=c44,
        c55=c55,
        b1=b[0, 0, 0, 0] - b[0, 0, 1, 1],
        b2=b[0, 1, 0, 1],
        b3=b[0, 1, 1, 0],
        b4=b[1, 0, 1, 0],
    )


def embed_antiplane(
    material: AntiplaneMaterial, filler: float = 1.0
) -> tuple[CauchyTensor, CosseratTensor]:
    """
    Full 3D tensors reproducing ``material`` for antiplane fields.

    Moduli that antiplane fields never excite are set to ``filler``: the
    in-plane classical stiffness (C1111 = C2222 = C3333 = 2 filler,
    C1212 = filler) and the off-plane torsional entries B1313, B3131, B2323,
    B3232. For in-plane n the out-of-plane eigenvalue of A_B is
    lambda3(n) / 4.
    """
    voigt = np.diag(
        [
            2 * filler,
            2 * filler,
            2 * filler,
            material.c44,
            material.c55,
            filler,
        ]
    )
    C = CauchyTensor.from_voigt(voigt)
    B = orthotropic_cosserat(
        B1111=material.b1,
        B2222=material.b1,
        B1212=material.b2,
        B1221=material.b3,
        B2121=material.b4,
        B1313=filler,
        B3131=filler,
        B2323=filler,
        B3232=filler,
    )
    return C, B


def lambda3(material: AntiplaneMaterial, n) -> np.ndarray:
    """b2 n_x^4 + 2 b0 n_x^2 n_y^2 + b4 n_y^4 for one or many 2-vectors."""
    n = np.asarray(n, dtype=float)
    nx, ny = n[..., 0], n[..., 1]
    return (
        material.b2 * nx**4
        + 2 * material.b0 * nx**2 * ny**2
        + material.b4 * ny**4
    )


# Regime classification ------------------------------------------------------


def regime_labels(beta, gamma, tolerance: float = BOUNDARY_TOLERANCE):
    """
    Vectorized regime and boundary labels. Boundary labels are "" away from
    the boundaries.
    """
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    root = np.sqrt(np.clip(beta, 0.0, None))
    regime = np.where(
        beta <= 0,
        "P",
        np.where(gamma >= root, "EI", np.where(gamma <= -root, "H", "EC")),
    )
    tol = tolerance * (1 + np.abs(beta) + np.abs(gamma))
    boundary = np.full(beta.shape, "", dtype=object)
    ei_ec = (beta > 0) & (np.abs(gamma - root) < tol)
    ec_h = (beta > 0) & (np.abs(gamma + root) < tol)
    ei_p = (np.abs(beta) < tol) & (gamma > 0)
    boundary = np.where(ei_ec, "EI/EC-boundary", boundary)
    boundary = np.where(ec_h, "EC/H-boundary", boundary)
    boundary = np.where(ei_p, "EI/P-boundary", boundary)
    return regime.astype(object), boundary


def quartic_roots(beta: float, gamma: float) -> np.ndarray:
    """Roots of Psi^4 + 2 gamma Psi^2 + beta (companion-matrix eigenvalues)."""
    roots = np.roots([1.0, 0.0, 2.0 * gamma, 0.0, beta])
    return np.sort_complex(roots.astype(complex))


def _sqrt0(x: float) -> float:
    return float(np.sqrt(max(x, 0.0)))


def _split(larger_sq: float, product: float) -> tuple[float, float]:
    """
    Square roots of the two values with the given larger one and product,
    the smaller taken by division to avoid cancellation.
    """
    if larger_sq <= 0:
        return 0.0, 0.0
    return _sqrt0(larger_sq), _sqrt0(product / larger_sq)


def closed_form_roots(
    beta: float, gamma: float, regime: str
) -> tuple[np.ndarray, dict]:
    """Regime-specific closed-form roots and their named parameters."""
    disc = _sqrt0(gamma**2 - beta)
    if regime == "EI":
        c1, c2 = _split(gamma + disc, beta)
        roots = [1j * c1, -1j * c1, 1j * c2, -1j * c2]
        params = {"c1": c1, "c2": c2}
    elif regime == "EC":
        root = _sqrt0(beta)
        f, c = _sqrt0((root - gamma) / 2), _sqrt0((root + gamma) / 2)
        roots = [f + 1j * c, -f + 1j * c, f - 1j * c, -f - 1j * c]
        params = {"f": f, "c": c}
    elif regime == "H":
        e1, e2 = _split(-gamma + disc, beta)
        roots = [e1, -e1, e2, -e2]
        params = {"e1": e1, "e2": e2}
    elif regime == "P":
        if gamma >= 0:
            c, f = _split(gamma + disc, -beta)
        else:
            f, c = _split(-gamma + disc, -beta)
        roots = [f, -f, 1j * c, -1j * c]
        params = {"f": f, "c": c}
    else:
        raise ValueError(f"Unknown regime {regime}")
    return np.sort_complex(np.array(roots, dtype=complex)), params


def match_roots(a: np.ndarray, b: np.ndarray) -> float:
    """Largest distance between two root sets after matching by value."""
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _normals_from_t(ts) -> list:
    """Unit 2-vectors (all sign combinations) with tan^2(phi) = t."""
    normals = []
    for t in ts:
        nx, ny = 1 / np.sqrt(1 + t), np.sqrt(t / (1 + t))
        for sx in (1, -1):
            for sy in (1, -1):
                n = np.array([sx * nx, sy * ny])
                if not any(np.allclose(n, m, atol=1e-14) for m in normals):
                    normals.append(n)
    return normals


def _normals(beta: float, gamma: float, regime: str, boundary: str) -> list:
    if boundary == "EC/H-boundary":
        return _normals_from_t([np.sqrt(beta)])
    if boundary == "EI/P-boundary":
        return _normals_from_t([0.0])
    if regime in ("H", "P"):
        # lambda3 vanishes where t^2 + 2 gamma t + beta = 0, t = tan^2(phi)
        disc = gamma**2 - beta
        if disc < 0:
            return []
        ts = sorted(
            {t for t in (-gamma + np.sqrt(disc), -gamma - np.sqrt(disc))
             if t >= 0}
        )
        return _normals_from_t(ts)
    return []


@dataclass(frozen=True)
class RegimeResult:
    beta: float
    gamma: float
    regime: str
    boundary: Optional[str]
    roots: np.ndarray
    parameters: dict
    normals: list = field(default_factory=list)
    margins: dict = field(default_factory=dict)
    root_mismatch: float = 0.0

    @property
    def label(self) -> str:
        return self.boundary or self.regime

    @property
    def elliptic(self) -> bool:
        return self.regime in ("EI", "EC") and self.boundary not in (
            "EI/P-boundary",
            "EC/H-boundary",
        )


def classify(
    beta: float, gamma: float, tolerance: float = BOUNDARY_TOLERANCE
) -> RegimeResult:
    if not (np.isfinite(beta) and np.isfinite(gamma)):
        raise ValueError("beta and gamma must be finite")
    regime, boundary = regime_labels(beta, gamma, tolerance)
    regime, boundary = str(regime), str(boundary) or None
    roots = quartic_roots(beta, gamma)
    closed, params = closed_form_roots(beta, gamma, regime)
    mismatch = match_roots(roots, closed)
    scale = max(1.0, abs(beta), gamma**2)
    if mismatch > 1e-6 * np.sqrt(scale):
        logger.warning(
            "Closed-form and companion roots differ by %.3e at "
            "(beta=%g, gamma=%g)",
            mismatch,
            beta,
            gamma,
        )
    root = np.sqrt(max(beta, 0.0))
    margins = {
        "EI/P": float(beta) if gamma > 0 else None,
        "EC/H": float(gamma + root) if beta > 0 else None,
        "EI/EC": float(gamma - root) if beta > 0 else None,
    }
    return RegimeResult(
        beta=float(beta),
        gamma=float(gamma),
        regime=regime,
        boundary=boundary,
        roots=closed,
        parameters=params,
        normals=_normals(beta, gamma, regime, boundary),
        margins=margins,
        root_mismatch=mismatch,
    )


def root_pattern(roots: np.ndarray, atol: float = 1e-10) -> str:
    """Symmetry pattern of a root set: the regime it is consistent with."""
    real = np.abs(roots.imag) < atol
    imag = np.abs(roots.real) < atol
    n_real, n_imag = int(np.sum(real & ~imag)), int(np.sum(imag & ~real))
    n_zero = int(np.sum(real & imag))
    if n_real + n_imag + n_zero < 4:
        return "EC"
    if n_imag + n_zero == 4 and n_real == 0:
        return "EI"
    if n_real + n_zero == 4 and n_imag == 0:
        return "H"
    return "P"


def discontinuity_normals(material: AntiplaneMaterial) -> list:
    """
    Normals of admissible discontinuity surfaces: directions where lambda3
    vanishes. Empty inside the elliptic region.
    """
    return classify(material.beta, material.gamma).normals


# Conditions ------------------------------------------------------------------


@dataclass(frozen=True)
class AntiplaneConditions:
    PD_C: bool
    PD_B: bool
    SE_C: bool
    SE_B: bool
    E: bool
    WP: bool

    @property
    def PD(self) -> bool:
        return self.PD_C and self.PD_B

    @property
    def SE(self) -> bool:
        return self.SE_C and self.SE_B

    def as_dict(self) -> dict:
        out = asdict(self)
        out.update(PD=self.PD, SE=self.SE)
        return out


def antiplane_conditions(
    material: AntiplaneMaterial, tolerance: float = 1e-12
) -> AntiplaneConditions:
    m = material
    m._require_b4()
    scale = max(abs(m.b1), abs(m.b2), abs(m.b3), abs(m.b4))
    tol = tolerance * scale
    c_scale = max(abs(m.c44), abs(m.c55), 1e-300)
    c_tol = tolerance * c_scale
    root = np.sqrt(max(m.b2, 0.0) * m.b4)

    classical_pd = m.c55 > c_tol and m.c44 > c_tol
    pd_b = (
        m.b1 > tol
        and m.b2 > tol
        and m.b4 > tol
        and m.b2 * m.b4 - m.b3**2 > tol * scale
    )
    se_b = (
        m.b1 > tol
        and m.b2 > tol
        and m.b4 > tol
        and abs(m.b3) < m.b1 + root - tol
    )
    elliptic = m.b2 > tol and m.b0 > -root + tol

    # WP: both forms semidefinite and never simultaneously zero
    classical_psd = m.c55 >= -c_tol and m.c44 >= -c_tol
    quartic_psd = m.b2 >= -tol and m.b0 >= -root - tol
    quartic_zero_t = []
    if quartic_psd:
        beta, gamma = m.b2 / m.b4, m.b0 / m.b4
        disc = gamma**2 - beta
        if abs(beta) <= tolerance:
            quartic_zero_t.append(0.0)
        if disc >= -tolerance * max(1.0, gamma**2):
            t = -gamma
            if t > 0:
                quartic_zero_t.append(t)
    classical_zero_all = abs(m.c55) <= c_tol and abs(m.c44) <= c_tol
    common_zero = False
    if classical_zero_all:
        common_zero = bool(quartic_zero_t)
    elif abs(m.c55) <= c_tol:
        # Classical form vanishes only along (1, 0), i.e. t = 0
        common_zero = 0.0 in quartic_zero_t
    wp = classical_psd and quartic_psd and not common_zero
    return AntiplaneConditions(
        PD_C=classical_pd,
        PD_B=pd_b,
        SE_C=classical_pd,
        SE_B=se_b,
        E=elliptic,
        WP=wp,
    )


# Dispersion and the discrete operator ----------------------------------------


@dataclass(frozen=True)
class SHDispersion:
    V_s: complex
    V_s_sq: float
    A33: float

    @property
    def complex_flag(self) -> bool:
        return self.V_s_sq < 0


def _unit2(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    if n.shape != (2,) or abs(np.linalg.norm(n) - 1) > 1e-12:
        raise ValueError(f"n must be a unit 2-vector, got {n}")
    return n


def sh_dispersion(
    material: AntiplaneMaterial, rho: float, n, k: float
) -> SHDispersion:
    if rho <= 0:
        raise ValueError(f"Density must be positive, got rho = {rho}")
    n = _unit2(n)
    m = material
    vs_sq = (
        m.c55 * n[0] ** 2 + m.c44 * n[1] ** 2 + k**2 / 4 * lambda3(m, n)
    ) / rho
    if vs_sq < 0:
        logger.warning("V_s^2 = %g < 0 at k = %g: complex speed", vs_sq, k)
    V_s = scimath.sqrt(vs_sq)
    return SHDispersion(
        V_s=complex(V_s) if np.iscomplexobj(V_s) else float(V_s),
        V_s_sq=float(vs_sq),
        A33=float(rho * k**2 * vs_sq),
    )


def sh_dispersion_table(
    material: AntiplaneMaterial, rho: float, n, ks
) -> pd.DataFrame:
    rows = []
    for k in ks:
        sh = sh_dispersion(material, rho, n, k)
        rows.append(
            {
                "k": float(k),
                "V_s": np.nan if sh.complex_flag else float(sh.V_s),
                "A33": sh.A33,
            }
        )
    return pd.DataFrame(rows, columns=["k", "V_s", "A33"])


def _d2(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    f = np.moveaxis(f, axis, 0)
    out = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    return np.moveaxis(out, 0, axis)


def _d4(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    f = np.moveaxis(f, axis, 0)
    out = (f[4:] - 4 * f[3:-1] + 6 * f[2:-2] - 4 * f[1:-3] + f[:-4]) / h**4
    return np.moveaxis(out, 0, axis)


def _d1(f: np.ndarray, axis: int, h: float) -> np.ndarray:
    f = np.moveaxis(f, axis, 0)
    out = (f[2:] - f[:-2]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def _interior(f: np.ndarray, width: int) -> np.ndarray:
    return f[width:-width, width:-width]


def apply_operator(
    material: AntiplaneMaterial,
    w: np.ndarray,
    h: float,
    X_z: Optional[np.ndarray] = None,
    Y_x: Optional[np.ndarray] = None,
    Y_y: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Central-difference residual of the antiplane equilibrium equation on a
    uniform grid, ``w[i, j] = w(x_i, y_j)``.

    Fourth derivatives need two neighbours on each side, so the two outermost
    grid layers act as Dirichlet data and the result covers interior nodes
    only, shape ``(nx - 4, ny - 4)``.
    """
    if h <= 0:
        raise ValueError(f"Grid spacing must be positive, got h = {h}")
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or min(w.shape) < 5:
        raise ValueError(f"w must be a 2D grid of at least 5x5, got {w.shape}")
    fields = {"X_z": X_z, "Y_x": Y_x, "Y_y": Y_y}
    for name, f in fields.items():
        if f is not None and np.shape(f) != w.shape:
            raise ValueError(
                f"{name} grid {np.shape(f)} does not match w grid {w.shape}"
            )
    m = material
    w_xx = _d2(w, 0, h)[1:-1, 2:-2]
    w_yy = _d2(w, 1, h)[2:-2, 1:-1]
    w_xxxx = _d4(w, 0, h)[:, 2:-2]
    w_yyyy = _d4(w, 1, h)[2:-2, :]
    w_xxyy = _d2(_d2(w, 0, h), 1, h)[1:-1, 1:-1]

    residual = m.c55 * w_xx + m.c44 * w_yy - 0.25 * (
        m.b2 * w_xxxx + 2 * m.b0 * w_xxyy + m.b4 * w_yyyy
    )
    if X_z is not None:
        residual = residual + _interior(np.asarray(X_z, dtype=float), 2)
    if Y_y is not None:
        dYy_dx = _d1(np.asarray(Y_y, dtype=float), 0, h)[1:-1, 2:-2]
        residual = residual + 0.5 * dYy_dx
    if Y_x is not None:
        dYx_dy = _d1(np.asarray(Y_x, dtype=float), 1, h)[2:-2, 1:-1]
        residual = residual - 0.5 * dYx_dy
    return residual
