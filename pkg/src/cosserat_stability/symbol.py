"""
Symbols of the couple-stress equilibrium operator.

The total symbol is the acoustic tensor A(k, n). Its principal part k^4 A_B
is singular (A_B n = 0), so ellipticity is judged instead through

* the large-k behaviour det A / k^10 -> tau_nu lambda_2 lambda_3,
* the modified principal symbol k^4 (A_B - a n (x) A_C n), whose
  determinant is -a k^12 tau_nu lambda_2 lambda_3,
* the Douglis-Nirenberg symbol with weights (3, 5, 5), whose determinant is
  -i k^13 tau_nu lambda_2 lambda_3.

All three vanish exactly where one of tau_nu, lambda_2, lambda_3 does.
"""
from dataclasses import dataclass
import logging
from typing import Optional

import numpy as np
import pandas as pd

from cosserat_stability.acoustic import (
    acoustic_cauchy_many,
    acoustic_cosserat_many,
    tangent_eigen,
)
from cosserat_stability.config import AnalysisSettings, get_settings
from cosserat_stability.sphere import (
    check_unit,
    fibonacci_sphere,
    tangent_frame,
)
from cosserat_stability.stability import ConsistencyError, check_ellipticity
from cosserat_stability.tensor_core import CauchyTensor, CosseratTensor

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SymbolEvaluation:
    n: np.ndarray
    k: float
    total: np.ndarray
    det_total: float
    tau_nu: float
    lambda2: float
    lambda3: float
    det_modified: Optional[float] = None
    det_dn: Optional[complex] = None

    @property
    def product(self) -> float:
        return self.tau_nu * self.lambda2 * self.lambda3


def _frame_data(C, B, directions: np.ndarray):
    """
    Acoustic parts in the intrinsic frame (n, e2, e3), e2/e3 being the
    tangent eigenvectors of A_B with lambda_2 <= lambda_3.
    """
    a_c = acoustic_cauchy_many(C, directions)
    a_b = acoustic_cosserat_many(B, directions)
    lam, vec = tangent_eigen(a_b, directions)
    rot = np.concatenate([directions[:, None, :], vec], axis=1)
    m = np.einsum("Nai,Nij,Nbj->Nab", rot, a_c, rot)
    return a_c, a_b, m, lam


def _det_total_stack(m: np.ndarray, lam: np.ndarray, k: float) -> np.ndarray:
    """
    det(k^2 M + k^4 diag(0, l2, l3)) expanded in powers of k:
    k^6 det M + k^8 (l2 m22 + l3 m33) + k^10 l2 l3 M_11.
    """
    minor_2 = m[:, 0, 0] * m[:, 2, 2] - m[:, 0, 2] * m[:, 2, 0]
    minor_3 = m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]
    l2, l3 = lam[:, 0], lam[:, 1]
    return (
        k**6 * np.linalg.det(m)
        + k**8 * (l2 * minor_2 + l3 * minor_3)
        + k**10 * l2 * l3 * m[:, 0, 0]
    )


def total_symbol(
    C: CauchyTensor, B: CosseratTensor, n, k: float
) -> SymbolEvaluation:
    n = check_unit(n)
    a_c, a_b, m, lam = _frame_data(C, B, n[None])
    total = k**2 * a_c[0] + k**4 * a_b[0]
    return SymbolEvaluation(
        n=n,
        k=float(k),
        total=total,
        det_total=float(_det_total_stack(m, lam, k)[0]),
        tau_nu=float(m[0, 0, 0]),
        lambda2=float(lam[0, 0]),
        lambda3=float(lam[0, 1]),
    )


def _modified_stack(a_c, a_b, directions, k, a) -> np.ndarray:
    an = np.einsum("Nqn,Nn->Nq", a_c, directions)
    sym = k**4 * (a_b - a * np.einsum("Ni,Nj->Nij", directions, an))
    return np.linalg.det(sym)


def modified_symbol_det(
    C: CauchyTensor, B: CosseratTensor, n, k: float, a: float
) -> float:
    """det of k^4 (A_B - a n (x) A_C n); equals -a k^12 tau_nu l2 l3."""
    if a == 0:
        raise ValueError("The modified-symbol constant a must be non-zero")
    n = check_unit(n)
    a_c = acoustic_cauchy_many(C, n[None])
    a_b = acoustic_cosserat_many(B, n[None])
    return float(_modified_stack(a_c, a_b, n[None], k, a)[0])


def _dn_stack(a_c, a_b, directions, k) -> tuple[np.ndarray, np.ndarray]:
    t, s = tangent_frame(directions)
    frame = np.stack([directions, t, s], axis=1)
    c_rows = np.einsum("Nj,Njk,Nbk->Nb", directions, a_c, frame)
    b_block = np.einsum("Nai,Nij,Nbj->Nab", frame[:, 1:], a_b, frame[:, 1:])
    mats = np.zeros((len(directions), 3, 3), dtype=complex)
    mats[:, 0, :] = c_rows
    mats[:, 1:, 1:] = -(k**2) * b_block
    mats *= 1j * k**3
    return mats, np.linalg.det(mats)


def dn_symbol(
    C: CauchyTensor, B: CosseratTensor, n, k: float
) -> tuple[np.ndarray, complex]:
    """
    Douglis-Nirenberg principal symbol in the (n, t, s) frame:

        i k^3 [[n.A_C n, n.A_C t, n.A_C s],
               [0, -k^2 t.A_B t, -k^2 t.A_B s],
               [0, -k^2 s.A_B t, -k^2 s.A_B s]]
    """
    if k <= 0:
        raise ValueError(f"Wavenumber must be positive, got k = {k}")
    n = check_unit(n)
    a_c = acoustic_cauchy_many(C, n[None])
    a_b = acoustic_cosserat_many(B, n[None])
    mats, det = _dn_stack(a_c, a_b, n[None], k)
    return mats[0], complex(det[0])


def evaluate_symbols(
    C: CauchyTensor, B: CosseratTensor, n, k: float, a: float = 1.0
) -> SymbolEvaluation:
    base = total_symbol(C, B, n, k)
    _, det_dn = dn_symbol(C, B, n, k) if k > 0 else (None, None)
    return SymbolEvaluation(
        n=base.n,
        k=base.k,
        total=base.total,
        det_total=base.det_total,
        tau_nu=base.tau_nu,
        lambda2=base.lambda2,
        lambda3=base.lambda3,
        det_modified=modified_symbol_det(C, B, n, k, a),
        det_dn=det_dn,
    )


def asymptotic_error(
    C: CauchyTensor, B: CosseratTensor, n, k: float
) -> float:
    """Relative deviation of det A / k^10 from tau_nu lambda_2 lambda_3."""
    ev = total_symbol(C, B, n, k)
    return abs(ev.det_total / k**10 - ev.product) / abs(ev.product)


@dataclass(frozen=True)
class SymbolVerdict:
    verdict: bool
    routes: dict
    margin: float
    witness: np.ndarray
    boundary: bool = False


EXTRAPOLATION_KS = (1.0, 2.0, 4.0)


def leading_coefficient(a_c: np.ndarray, a_b: np.ndarray) -> np.ndarray:
    """
    Limit of det A(k, n) / k^10 for k -> infinity.

    det A / k^10 is a quadratic polynomial in 1/k^2, so three evaluations of
    the assembled total symbol determine its constant term exactly.
    """
    ks = np.array(EXTRAPOLATION_KS)
    x = 1.0 / ks**2
    vander = np.stack([np.ones_like(x), x, x**2], axis=1)
    samples = np.stack(
        [np.linalg.det(k**2 * a_c + k**4 * a_b) / k**10 for k in ks]
    )
    return np.linalg.solve(vander, samples)[0]


def route_quantities(
    C: CauchyTensor,
    B: CosseratTensor,
    directions: np.ndarray,
    a: float = 1.0,
) -> dict:
    """
    Per-direction normalized factors and the three determinant routes, each
    route divided by its k/a power and the tensor scales so that it
    reproduces tau_nu lambda_2 lambda_3 (normalized).
    """
    s_c, s_b = C.scale, B.scale
    a_c, a_b, m, lam = _frame_data(C, B, directions)
    unit = s_c * s_b**2
    total = leading_coefficient(a_c, a_b) / unit
    modified = -_modified_stack(a_c, a_b, directions, 1.0, a) / a / unit
    _, dn = _dn_stack(a_c, a_b, directions, 1.0)
    return {
        "tau": m[:, 0, 0] / s_c,
        "lambda2": lam[:, 0] / s_b,
        "lambda3": lam[:, 1] / s_b,
        "total": total,
        "modified": modified,
        "dn": np.abs(dn) / unit,
    }


def symbol_diagnostics(
    C: CauchyTensor,
    B: CosseratTensor,
    directions: np.ndarray,
    a: float = 1.0,
) -> pd.DataFrame:
    q = route_quantities(C, B, directions, a)
    df = pd.DataFrame(directions, columns=["n1", "n2", "n3"])
    for key, values in q.items():
        df[key] = values
    return df


def ellipticity_via_symbols(
    C: CauchyTensor,
    B: CosseratTensor,
    settings: Optional[AnalysisSettings] = None,
    a: float = 1.0,
) -> SymbolVerdict:
    """
    Ellipticity judged through the three symbol determinants.

    Each route determinant, divided by the two largest of |tau_nu|,
    |lambda_2|, |lambda_3|, recovers the smallest one; a route holds when
    that recovered factor stays above tolerance for every direction.
    """
    settings = get_settings(settings)
    reference = check_ellipticity(C, B, settings)
    directions = np.vstack(
        [fibonacci_sphere(settings.sweep_density), reference.witness["n"]]
    )
    q = route_quantities(C, B, directions, a)
    factors = np.sort(
        np.abs(np.stack([q["tau"], q["lambda2"], q["lambda3"]])), axis=0
    )
    others = factors[1] * factors[2]
    safe = np.where(others > 0, others, 1.0)

    routes = {}
    worst = None
    for name in ("total", "modified", "dn"):
        recovered = np.where(others > 0, np.abs(q[name]) / safe, 0.0)
        i = int(np.argmin(recovered))
        routes[name] = bool(recovered[i] > settings.tolerance)
        if worst is None or recovered[i] < worst[0]:
            worst = (recovered[i], directions[i])

    verdicts = set(routes.values())
    boundary = reference.boundary
    if len(verdicts) > 1 or reference.verdict not in verdicts:
        if abs(reference.margin) < settings.band:
            logger.warning(
                "Symbol routes %s disagree with the direct check near the "
                "ellipticity boundary (margin %.3e)",
                routes,
                reference.margin,
            )
            boundary = True
        else:
            raise ConsistencyError(
                f"Symbol routes {routes} disagree with the direct ellipticity "
                f"check (verdict {reference.verdict}, margin "
                f"{reference.margin:.3e})"
            )
    return SymbolVerdict(
        verdict=reference.verdict if boundary else routes["total"],
        routes=routes,
        margin=float(worst[0]),
        witness=reference.witness["n"],
        boundary=boundary,
    )
