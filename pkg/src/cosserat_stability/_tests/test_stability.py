import numpy as np
import pytest

from cosserat_stability.config import AnalysisSettings
from cosserat_stability.stability import (
    CONDITIONS,
    ConsistencyError,
    check_ellipticity,
    check_hierarchy,
    check_pd,
    check_se_cauchy,
    check_se_cosserat,
    check_sse,
    check_wp,
    ellipticity_factors,
    ellipticity_values,
    full_report,
    se_cosserat_form,
    se_cosserat_values,
    wp_values,
)
from cosserat_stability.tensor_core import (
    CauchyTensor,
    isotropic_cauchy,
    isotropic_cosserat,
)

from .conftest import random_cauchy, random_cosserat, random_unit


def test_isotropic_reference_holds_everything(
    isotropic_reference, fast_settings
):
    report = full_report(*isotropic_reference, fast_settings)
    assert list(report.conditions) == list(CONDITIONS)
    assert report.holds()
    # tau_nu = 3 = scale_C, lambda_2 = 1 against scale_B = B1212 = 4
    assert report["E"].margin == pytest.approx(0.25, rel=1e-9)
    assert report["SE_C"].margin == pytest.approx(1.0 / 3.0, rel=1e-9)
    assert not report["E"].boundary


@pytest.mark.parametrize(
    "lam, mu, expected",
    [
        (0.0, 0.0, {"PD_C": False, "SE_C": False, "E": False, "WP": False}),
        (1.0, 0.0, {"PD_C": False, "SE_C": False, "E": True, "WP": True}),
        (2.0, -0.1, {"PD_C": False, "SE_C": False, "E": True, "WP": False}),
    ],
)
def test_degenerate_classical_stiffness(lam, mu, expected, fast_settings):
    C, B = isotropic_cauchy(lam, mu), isotropic_cosserat(1.0, 0.0)
    report = full_report(C, B, fast_settings)
    for name, verdict in expected.items():
        assert report[name].verdict is verdict, name
    assert report["PD_B"].verdict and report["SE_B"].verdict


def test_null_classical_part_is_semi_strongly_elliptic(fast_settings):
    C = CauchyTensor(np.zeros((3, 3, 3, 3)))
    report = full_report(C, isotropic_cosserat(1.0, 0.0), fast_settings)
    assert report["SSE_C"].verdict
    assert not report["SE_C"].verdict
    assert report["SE_C"].boundary


def test_witness_reproduces_margin(random_materials, fast_settings):
    C, B = random_materials[2]
    report = full_report(C, B, fast_settings)
    n = np.asarray(report["E"].witness["n"])
    assert ellipticity_values(C, B, n[None])[0] == pytest.approx(
        report["E"].margin, abs=1e-12
    )
    n = np.asarray(report["SE_B"].witness["n"])
    q = np.asarray(report["SE_B"].witness["q"])
    assert se_cosserat_form(B, n, q) == pytest.approx(
        report["SE_B"].margin, abs=1e-10
    )


def test_se_form_matches_minimum_eigenvalue(random_materials, rng):
    _, B = random_materials[0]
    n = random_unit(rng)
    value, q = se_cosserat_values(B, n[None])
    assert se_cosserat_form(B, n, q[0]) == pytest.approx(value[0])
    for other in random_unit(rng, 20):
        assert se_cosserat_form(B, n, other) >= value[0] - 1e-12


def test_lambda2_bounded_by_se_b(random_materials, rng):
    # lambda_2(n) / scale_B >= SE_B(n), direction by direction
    directions = random_unit(rng, 200)
    for C, B in random_materials:
        _, lam2, _ = ellipticity_factors(C, B, directions)
        se_b, _ = se_cosserat_values(B, directions)
        assert np.all(lam2 >= se_b - 1e-12)


def test_wp_reports_failing_part():
    C, B = isotropic_cauchy(2.0, -0.1), isotropic_cosserat(1.0, 0.0)
    values, vectors = wp_values(C, B, np.array([[0.0, 0.0, 1.0]]), 1e-10)
    # mu / scale_C = -0.1 / 2
    assert values[0] == pytest.approx(-0.05)
    assert abs(vectors[0] @ [0.0, 0.0, 1.0]) < 1e-12


def test_individual_checks_agree_with_report(
    isotropic_reference, fast_settings
):
    C, B = isotropic_reference
    pd = check_pd(C, B, fast_settings)
    assert pd["PD_C"].verdict and pd["PD_B"].verdict
    assert check_se_cauchy(C, fast_settings).verdict
    assert check_se_cosserat(B, fast_settings).verdict
    assert all(r.verdict for r in check_sse(C, B, fast_settings).values())
    assert check_ellipticity(C, B, fast_settings).verdict
    assert check_wp(C, B, fast_settings).verdict


def test_hierarchy_holds_on_random_materials(random_materials, fast_settings):
    for C, B in random_materials:
        report = full_report(C, B, fast_settings)
        if report["PD_C"].verdict and report["PD_B"].verdict:
            assert report["SE_C"].verdict and report["SE_B"].verdict
        if report["SE_C"].verdict and report["SE_B"].verdict:
            assert report["E"].verdict and report["WP"].verdict


def test_pd_and_se_margins_share_a_scale(random_materials, fast_settings):
    # q.A_C(n)q = C : sym(n x q) : sym(n x q) with |sym(n x q)|^2 >= 1/2
    for C, B in random_materials:
        report = full_report(C, B, fast_settings)
        pd_margin = report["PD_C"].margin
        if pd_margin > 0:
            assert report["SE_C"].margin >= pd_margin / 2 - 1e-12


def test_hierarchy_violation_raises():
    verdicts = dict.fromkeys(CONDITIONS, True)
    verdicts["E"] = False
    with pytest.raises(ConsistencyError, match="sweep density"):
        check_hierarchy(verdicts)


def test_report_fingerprint_and_dict(isotropic_reference, fast_settings):
    a = full_report(*isotropic_reference, fast_settings)
    b = full_report(*isotropic_reference, fast_settings)
    assert a.fingerprint == b.fingerprint
    out = a.as_dict()
    assert set(out["conditions"]) == set(CONDITIONS)
    assert out["settings"]["sweep_density"] == 256
    assert isinstance(out["conditions"]["WP"]["witness"]["n"], list)


@pytest.mark.slow
def test_hierarchy_on_large_ensemble(rng, fast_settings):
    for shift in np.linspace(0.0, 4.0, 1000):
        C = random_cauchy(rng, shift)
        B = random_cosserat(rng, shift)
        # full_report raises ConsistencyError on any broken implication
        report = full_report(C, B, fast_settings)
        if report.holds(("SE_C", "SE_B")):
            assert report.holds(("E", "WP", "SSE_C", "SSE_B"))


def _isotropic_closed_forms(lam, mu, eta, eta_prime):
    return {
        "PD_C": mu > 0 and 3 * lam + 2 * mu > 0,
        "PD_B": eta + eta_prime > 0 and eta - eta_prime > 0,
        "SE_C": mu > 0 and lam + 2 * mu > 0,
        "SE_B": eta > 0 and eta + eta_prime > 0,
        "SSE_C": mu > 0 and lam + 2 * mu > 0,
        "SSE_B": eta > 0 and eta + eta_prime > 0,
        "E": True,
        "WP": lam + 2 * mu > 0 and mu > 0 and eta > 0,
    }


def _isotropic_grid(values):
    for lam in values:
        for mu in values:
            for eta in values:
                for eta_prime in values:
                    critical = (
                        mu,
                        lam + 2 * mu,
                        3 * lam + 2 * mu,
                        eta,
                        eta + eta_prime,
                        eta - eta_prime,
                    )
                    # Verdicts on the boundary itself are tolerance-dependent
                    if min(abs(c) for c in critical) < 1e-6:
                        continue
                    yield lam, mu, eta, eta_prime


def _check_isotropic_grid(values):
    # Isotropic verdicts do not depend on the direction
    settings = AnalysisSettings(
        sweep_density=8, refine_cells=0, refine_rounds=0
    )
    checked = 0
    for lam, mu, eta, eta_prime in _isotropic_grid(values):
        C = isotropic_cauchy(lam, mu)
        B = isotropic_cosserat(eta, eta_prime)
        report = full_report(C, B, settings)
        expected = _isotropic_closed_forms(lam, mu, eta, eta_prime)
        for name, verdict in expected.items():
            assert report[name].verdict is verdict, (
                name,
                lam,
                mu,
                eta,
                eta_prime,
            )
        checked += 1
    assert checked > 0


def test_isotropic_verdicts_match_closed_forms():
    _check_isotropic_grid(np.linspace(-2.0, 2.0, 5))


@pytest.mark.slow
def test_isotropic_verdicts_match_closed_forms_full_grid():
    _check_isotropic_grid(np.linspace(-2.0, 2.0, 15))
