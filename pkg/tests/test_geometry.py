import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modcyl.geometry import (DomainError, Geometry, GeometryError, flow_trajectory, jacobian, omega, omega_prime,
                             position, sinh_omega_identity)


@pytest.mark.parametrize("L, ell", [(2.0, 1.0), (1.0, 0.6), (-1.0, 0.2), (4.0, 0.0), (float("inf"), 1.0)])
def test_invalid_geometry(L, ell):
    with pytest.raises(GeometryError):
        Geometry(L, ell)


def test_omega_inverse_and_chirality(geo, rng):
    x = rng.uniform(-0.999, 0.999, 200) * geo.ell
    u = omega(1, x, geo)
    np.testing.assert_allclose(position(u, geo), x, atol=1e-13)
    np.testing.assert_allclose(omega(2, x, geo), -u, atol=1e-13)


def test_omega_outside_interval(geo):
    with pytest.raises(DomainError):
        omega(1, 1.5 * geo.ell, geo)


def test_jacobian_matches_derivative(geo):
    u = np.linspace(-6, 6, 41)
    h = 1e-5
    fd = (position(u + h, geo) - position(u - h, geo)) / (2 * h)
    np.testing.assert_allclose(jacobian(u, geo), fd, rtol=1e-8)
    x = position(u, geo)
    np.testing.assert_allclose(omega_prime(x, geo) * jacobian(u, geo), 1.0, rtol=1e-12)


def test_trajectory_advances_modular_time(geo, rng):
    # omega' ~ 1/(ell - |x|) amplifies rounding in x0, so stay away from the endpoints
    y = rng.uniform(-0.9, 0.9, 100) * geo.ell
    t = rng.uniform(-0.5, 0.5, 100)
    x0 = flow_trajectory(y, t, geo)
    np.testing.assert_allclose(omega(1, x0, geo) - omega(1, y, geo) - 2 * np.pi * t, 0.0, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.99, 0.99), st.floats(-0.99, 0.99))
def test_sinh_identity(x, y):
    geo = Geometry(4.0, 1.0)
    # the left side cancels in Omega(x) - Omega(y); its relative accuracy is ~ eps/|x - y|
    if abs(x - y) < 1e-2:
        return
    lhs, rhs = sinh_omega_identity(x, y, geo)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)
