"""
Material-stability conditions of a couple-stress solid: positive
definiteness (PD), strong ellipticity (SE), semi-strong ellipticity (SSE),
ellipticity (E) and the wave-propagation condition (WP).

Every sweep-based condition is expressed through a per-direction quantity,
normalized by the tensor scale (largest absolute component):

* SE_C(n)  = min eigenvalue of A_C(n) / scale_C
* SE_B(n)  = 1/4 min eigenvalue of B_hat(n) / scale_B, with
  B_hat(n)_ij = n_r n_t B_ritj, i.e. the minimum over unit q of
  1/4 Dev(n x q) . B[Dev(n x q)]
* E(n)     = min(|tau_nu|/scale_C, |lambda_2|/scale_B, |lambda_3|/scale_B)
* WP(n)    = min eigenvalue of A_C/scale_C + A_B/scale_B when both parts are
  positive semidefinite, otherwise the most negative of their eigenvalues

The 1/4 in SE_B matches the acoustic scaling so that
lambda_2(n)/scale_B >= SE_B(n) holds direction by direction.
"""
from dataclasses import dataclass, field
import logging
from typing import Optional

import numpy as np

from cosserat_stability.acoustic import (
    acoustic_cauchy_many,
    acoustic_cosserat_many,
    cosserat_christoffel_many,
    tangent_eigen,
)
from cosserat_stability.config import AnalysisSettings, get_settings
from cosserat_stability.sphere import (
    canonical_sign,
    check_unit,
    fibonacci_sphere,
    sweep_minimum,
)
from cosserat_stability.tensor_core import (
    CauchyTensor,
    CosseratTensor,
    PDResult,
    check_pd_cauchy,
    check_pd_cosserat,
)
from cosserat_stability.utils import get_param_hash

logger = logging.getLogger(__name__)

CONDITIONS = ("PD_C", "PD_B", "SE_C", "SE_B", "SSE_C", "SSE_B", "E", "WP")


class ConsistencyError(RuntimeError):
    """
    Raised when results that must agree do not (e.g. a violated implication
    within one report). Signals insufficient sweep resolution, not a material
    property.
    """


@dataclass(frozen=True)
class ConditionResult:
    verdict: bool
    margin: float
    witness: dict = field(default_factory=dict)
    boundary: bool = False

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "margin": self.margin,
            "witness": {
                k: np.asarray(v).tolist() for k, v in self.witness.items()
            },
            "boundary": self.boundary,
        }


# Per-direction quantities ---------------------------------------------------


def se_cauchy_values(C, directions: np.ndarray):
    a_c = acoustic_cauchy_many(C, directions)
    lam, vec = np.linalg.eigh(a_c)
    return lam[:, 0] / C.scale, vec[:, :, 0]


def se_cosserat_values(B, directions: np.ndarray):
    b_hat = cosserat_christoffel_many(B, directions)
    b_hat = (b_hat + np.swapaxes(b_hat, 1, 2)) / 2
    lam, vec = np.linalg.eigh(b_hat)
    return 0.25 * lam[:, 0] / B.scale, vec[:, :, 0]


def se_cosserat_form(B: CosseratTensor, n, q) -> float:
    """Normalized 1/4 Dev(n x q) . B[Dev(n x q)] for unit n and q."""
    n, q = check_unit(n), check_unit(q, "q")
    kappa = np.outer(n, q)
    kappa = kappa - np.trace(kappa) / 3 * np.eye(3)
    return 0.25 * B.form(kappa) / B.scale


def ellipticity_factors(C, B, directions: np.ndarray):
    """Normalized tau_nu, lambda_2 and lambda_3 per direction."""
    a_c = acoustic_cauchy_many(C, directions)
    a_b = acoustic_cosserat_many(B, directions)
    tau = np.einsum("Nq,Nqn,Nn->N", directions, a_c, directions)
    lam, _ = tangent_eigen(a_b, directions)
    return tau / C.scale, lam[:, 0] / B.scale, lam[:, 1] / B.scale


def ellipticity_values(C, B, directions: np.ndarray) -> np.ndarray:
    tau, lam2, lam3 = ellipticity_factors(C, B, directions)
    return np.minimum(np.abs(tau), np.minimum(np.abs(lam2), np.abs(lam3)))


def wp_values(C, B, directions: np.ndarray, tolerance: float):
    a_c = acoustic_cauchy_many(C, directions) / C.scale
    a_b = acoustic_cosserat_many(B, directions) / B.scale
    lam_c, vec_c = np.linalg.eigh(a_c)
    lam_b, vec_b = tangent_eigen(a_b, directions)
    combined = a_c + a_b
    lam_s, vec_s = np.linalg.eigh((combined + np.swapaxes(combined, 1, 2)) / 2)

    values = lam_s[:, 0].copy()
    vectors = vec_s[:, :, 0].copy()
    c_fail = lam_c[:, 0] < -tolerance
    b_fail = lam_b[:, 0] < -tolerance
    use_c = c_fail & (~b_fail | (lam_c[:, 0] <= lam_b[:, 0]))
    use_b = b_fail & ~use_c
    values[use_c] = lam_c[use_c, 0]
    vectors[use_c] = vec_c[use_c, :, 0]
    values[use_b] = lam_b[use_b, 0]
    vectors[use_b] = vec_b[use_b, 0]
    return values, vectors


# Individual checks -----------------------------------------------------------


def _is_boundary(margin: float, settings: AnalysisSettings) -> bool:
    return bool(abs(margin) < settings.band)


def _result(margin, verdict, witness, settings) -> ConditionResult:
    return ConditionResult(
        verdict=bool(verdict),
        margin=float(margin),
        witness={k: canonical_sign(np.asarray(v)) for k, v in witness.items()},
        boundary=_is_boundary(margin, settings),
    )


def _pd_result(pd: PDResult, settings: AnalysisSettings) -> ConditionResult:
    return ConditionResult(
        verdict=pd.verdict,
        margin=pd.margin,
        witness={},
        boundary=_is_boundary(pd.margin, settings),
    )


def check_pd(
    C: CauchyTensor,
    B: CosseratTensor,
    settings: Optional[AnalysisSettings] = None,
) -> dict:
    settings = get_settings(settings)
    return {
        "PD_C": _pd_result(check_pd_cauchy(C, settings.tolerance), settings),
        "PD_B": _pd_result(check_pd_cosserat(B, settings.tolerance), settings),
    }


def check_se_cauchy(
    C: CauchyTensor, settings: Optional[AnalysisSettings] = None
) -> ConditionResult:
    settings = get_settings(settings)
    sweep = sweep_minimum(lambda d: se_cauchy_values(C, d)[0], settings)
    n = sweep.direction
    _, q = se_cauchy_values(C, n[None])
    return _result(
        sweep.value,
        sweep.value > settings.tolerance,
        {"n": n, "q": q[0]},
        settings,
    )


def check_se_cosserat(
    B: CosseratTensor, settings: Optional[AnalysisSettings] = None
) -> ConditionResult:
    settings = get_settings(settings)
    sweep = sweep_minimum(lambda d: se_cosserat_values(B, d)[0], settings)
    n = sweep.direction
    _, q = se_cosserat_values(B, n[None])
    return _result(
        sweep.value,
        sweep.value > settings.tolerance,
        {"n": n, "q": q[0]},
        settings,
    )


def check_sse(
    C: CauchyTensor,
    B: CosseratTensor,
    settings: Optional[AnalysisSettings] = None,
) -> dict:
    """Semi-strong ellipticity: the SE sweeps with >= -tolerance acceptance."""
    settings = get_settings(settings)
    out = {}
    for name, check, tensor in (
        ("SSE_C", check_se_cauchy, C),
        ("SSE_B", check_se_cosserat, B),
    ):
        se = check(tensor, settings)
        out[name] = ConditionResult(
            verdict=se.margin >= -settings.tolerance,
            margin=se.margin,
            witness=se.witness,
            boundary=se.boundary,
        )
    return out


def check_ellipticity(
    C: CauchyTensor,
    B: CosseratTensor,
    settings: Optional[AnalysisSettings] = None,
) -> ConditionResult:
    settings = get_settings(settings)
    sweep = sweep_minimum(lambda d: ellipticity_values(C, B, d), settings)
    return _result(
        sweep.value,
        sweep.value > settings.tolerance,
        {"n": sweep.direction},
        settings,
    )


def check_wp(
    C: CauchyTensor,
    B: CosseratTensor,
    settings: Optional[AnalysisSettings] = None,
) -> ConditionResult:
    settings = get_settings(settings)
    tol = settings.tolerance
    sweep = sweep_minimum(lambda d: wp_values(C, B, d, tol)[0], settings)
    n = sweep.direction
    _, p = wp_values(C, B, n[None], tol)
    return _result(
        sweep.value, sweep.value > tol, {"n": n, "p": p[0]}, settings
    )


# Full report -----------------------------------------------------------------


@dataclass(frozen=True)
class StabilityReport:
    conditions: dict
    fingerprint: str
    settings: dict

    def __getitem__(self, name: str) -> ConditionResult:
        return self.conditions[name]

    @property
    def verdicts(self) -> dict:
        return {k: v.verdict for k, v in self.conditions.items()}

    def holds(self, names=CONDITIONS) -> bool:
        return all(self.conditions[name].verdict for name in names)

    def as_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "settings": self.settings,
            "conditions": {
                k: v.as_dict() for k, v in self.conditions.items()
            },
        }


IMPLICATIONS = (
    (("PD_C", "PD_B"), ("SE_C", "SE_B")),
    (("SE_C", "SE_B"), ("E",)),
    (("SE_C", "SE_B"), ("WP",)),
    (("SE_C",), ("SSE_C",)),
    (("SE_B",), ("SSE_B",)),
)


def check_hierarchy(verdicts: dict):
    for premises, conclusions in IMPLICATIONS:
        if all(verdicts[p] for p in premises) and not all(
            verdicts[c] for c in conclusions
        ):
            raise ConsistencyError(
                f"{' and '.join(premises)} hold but "
                f"{' and '.join(conclusions)} do not; increase the sweep "
                "density"
            )


def _argmin(values: np.ndarray) -> int:
    return int(np.argmin(values))


def full_report(
    C: CauchyTensor,
    B: CosseratTensor,
    settings: Optional[AnalysisSettings] = None,
) -> StabilityReport:
    """
    Run every check, then re-evaluate all sweep quantities on one shared set
    of directions (lattice plus every refined witness) so that the verdicts
    are mutually consistent.
    """
    settings = get_settings(settings)
    tol = settings.tolerance
    individual = {
        "SE_C": check_se_cauchy(C, settings),
        "SE_B": check_se_cosserat(B, settings),
        "E": check_ellipticity(C, B, settings),
        "WP": check_wp(C, B, settings),
    }
    witnesses = np.array([r.witness["n"] for r in individual.values()])
    directions = np.vstack(
        [fibonacci_sphere(settings.sweep_density), witnesses]
    )

    conditions = check_pd(C, B, settings)

    se_c, q_c = se_cauchy_values(C, directions)
    se_b, q_b = se_cosserat_values(B, directions)
    e_vals = ellipticity_values(C, B, directions)
    wp_vals, p_wp = wp_values(C, B, directions, tol)

    i = _argmin(se_c)
    conditions["SE_C"] = _result(
        se_c[i], se_c[i] > tol, {"n": directions[i], "q": q_c[i]}, settings
    )
    i = _argmin(se_b)
    conditions["SE_B"] = _result(
        se_b[i], se_b[i] > tol, {"n": directions[i], "q": q_b[i]}, settings
    )
    for name, se in (("SSE_C", "SE_C"), ("SSE_B", "SE_B")):
        base = conditions[se]
        conditions[name] = ConditionResult(
            verdict=base.margin >= -tol,
            margin=base.margin,
            witness=base.witness,
            boundary=base.boundary,
        )
    i = _argmin(e_vals)
    conditions["E"] = _result(
        e_vals[i], e_vals[i] > tol, {"n": directions[i]}, settings
    )
    i = _argmin(wp_vals)
    conditions["WP"] = _result(
        wp_vals[i],
        wp_vals[i] > tol,
        {"n": directions[i], "p": p_wp[i]},
        settings,
    )

    conditions = {name: conditions[name] for name in CONDITIONS}
    check_hierarchy({k: v.verdict for k, v in conditions.items()})
    for name, result in conditions.items():
        if result.boundary:
            logger.warning(
                "%s margin %.3e lies within the boundary band", name,
                result.margin,
            )
    logger.info(
        "Stability report: %s",
        ", ".join(f"{k}={v.verdict}" for k, v in conditions.items()),
    )
    return StabilityReport(
        conditions=conditions,
        fingerprint=get_param_hash(C.components, B.components),
        settings=settings.as_dict(),
    )
