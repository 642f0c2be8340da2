import numpy as np
import pytest

from modcyl.distributions import (flow_integral, flow_integral_reference, gauss_panels, integrate, lemma_limit_eval,
                                  pv_sinh, pv_sinh_nodal)


def test_gauss_panels_integrates_polynomials():
    x, w = gauss_panels(-1.0, 2.0, 3, 8)
    assert np.sum(w * x**5) == pytest.approx((2.0**6 - 1.0) / 6, rel=1e-13)


def test_integrate_gaussian():
    r = integrate(lambda t: np.exp(-t**2), -10, 10)
    assert r.value == pytest.approx(np.sqrt(np.pi), rel=1e-12)


@pytest.mark.parametrize("c", [0.3, 1.0 + 0.5j, 2.5])
def test_flow_integral_closed_form(c):
    z = np.array([-2.0, -0.4, 0.7, 1.9])
    np.testing.assert_allclose(flow_integral(c, z), flow_integral_reference(c, z), rtol=1e-8, atol=1e-10)


def test_lemma_limit():
    f = lambda t: np.exp(-(t - 0.3)**2 / 2) * (1 + 0.5j * t)
    f0 = f(np.array(0.0))
    errs = [abs(lemma_limit_eval(a, f) - 1j * f0 * (a - 1) / (a + 1)) for a in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3 * abs(f0)


def test_nodal_pv_matches_direct():
    centers = np.linspace(-2, 2, 9)
    phi2 = lambda r, c: np.exp(-r**2 / 3) * (1 + 0.2j * r) * np.ones_like(c)
    phi1 = lambda r: np.exp(-r**2 / 3) * (1 + 0.2j * r)
    a = pv_sinh(phi2, centers, 0.5, (-12.0, 12.0)).value
    b = pv_sinh_nodal(phi1, centers, 0.5, (-12.0, 12.0)).value
    np.testing.assert_allclose(a, b, atol=1e-9)
