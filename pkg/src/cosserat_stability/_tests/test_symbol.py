import numpy as np
import pytest

from cosserat_stability.symbol import (
    asymptotic_error,
    dn_symbol,
    ellipticity_via_symbols,
    evaluate_symbols,
    modified_symbol_det,
    route_quantities,
    symbol_diagnostics,
    total_symbol,
)
from cosserat_stability.tensor_core import (
    CauchyTensor,
    isotropic_cosserat,
)

from .conftest import random_unit

E3 = [0.0, 0.0, 1.0]


def test_isotropic_symbols(isotropic_reference):
    ev = evaluate_symbols(*isotropic_reference, E3, 1.0)
    assert (ev.tau_nu, ev.lambda2, ev.lambda3) == pytest.approx((3, 1, 1))
    assert ev.product == pytest.approx(3.0)
    assert ev.det_total == pytest.approx(np.linalg.det(ev.total))
    assert ev.det_total == pytest.approx(12.0)
    assert ev.det_modified == pytest.approx(-3.0)
    assert abs(ev.det_dn) == pytest.approx(3.0)


def test_total_symbol_expansion_matches_determinant(random_materials, rng):
    for C, B in random_materials:
        n = random_unit(rng)
        for k in (0.5, 1.0, 3.0):
            ev = total_symbol(C, B, n, k)
            assert ev.det_total == pytest.approx(
                np.linalg.det(ev.total), rel=1e-8, abs=1e-10
            )


def test_modified_symbol_identity(random_materials, rng):
    k, a = 1.3, 0.7
    for C, B in random_materials:
        n = random_unit(rng)
        ev = total_symbol(C, B, n, k)
        expected = -a * k**12 * ev.product
        assert modified_symbol_det(C, B, n, k, a) == pytest.approx(
            expected, rel=1e-8, abs=1e-10
        )


def test_modified_symbol_rejects_zero_constant(isotropic_reference):
    with pytest.raises(ValueError, match="non-zero"):
        modified_symbol_det(*isotropic_reference, E3, 1.0, 0.0)


def test_dn_symbol_structure(random_materials, rng):
    C, B = random_materials[0]
    n = random_unit(rng)
    k = 1.7
    matrix, det = dn_symbol(C, B, n, k)
    np.testing.assert_allclose(matrix[1:, 0], 0)
    ev = total_symbol(C, B, n, k)
    assert abs(det) == pytest.approx(k**13 * abs(ev.product), rel=1e-8)
    with pytest.raises(ValueError, match="positive"):
        dn_symbol(C, B, n, -1.0)


def test_asymptotic_error_decays(isotropic_reference):
    errors = [asymptotic_error(*isotropic_reference, E3, k)
              for k in (1.0, 10.0, 100.0)]
    assert errors[0] > errors[1] > errors[2]
    # det A / k^10 = 3 + 6 / k^2 + 3 / k^4
    assert errors[1] == pytest.approx(2e-2 + 1e-4)


def test_asymptotic_order_on_anisotropic_materials(random_materials, rng):
    for C, B in random_materials:
        for n in random_unit(rng, 4):
            coarse = asymptotic_error(C, B, n, 1e3)
            fine = asymptotic_error(C, B, n, 1e4)
            # det A / k^10 - tau lambda_2 lambda_3 is O(k^-2)
            assert np.log10(coarse / fine) >= 1.99


def test_routes_reproduce_product(random_materials, rng):
    directions = random_unit(rng, 25)
    for C, B in random_materials:
        q = route_quantities(C, B, directions, a=2.0)
        product = q["tau"] * q["lambda2"] * q["lambda3"]
        scale = np.max(np.abs(product))
        np.testing.assert_allclose(q["total"], product, atol=1e-8 * scale)
        np.testing.assert_allclose(q["modified"], product,
                                   atol=1e-10 * scale)
        np.testing.assert_allclose(q["dn"], np.abs(product),
                                   atol=1e-10 * scale)


def test_symbol_diagnostics_frame(isotropic_reference):
    df = symbol_diagnostics(*isotropic_reference, np.array([E3]))
    assert list(df.columns) == [
        "n1", "n2", "n3", "tau", "lambda2", "lambda3", "total", "modified",
        "dn",
    ]
    assert df.loc[0, "total"] == pytest.approx(df.loc[0, "modified"])


def test_symbol_routes_agree_with_direct_check(
    isotropic_reference, fast_settings
):
    verdict = ellipticity_via_symbols(*isotropic_reference, fast_settings)
    assert verdict.verdict
    assert all(verdict.routes.values())
    assert verdict.margin > 0


def test_symbol_routes_detect_loss(fast_settings):
    C = CauchyTensor(np.zeros((3, 3, 3, 3)))
    verdict = ellipticity_via_symbols(
        C, isotropic_cosserat(1.0, 0.0), fast_settings
    )
    assert not verdict.verdict
    assert not any(verdict.routes.values())
