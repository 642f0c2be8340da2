import numpy as np
import pytest

from modcyl.correlators import grid, two_point
from modcyl.resolvent import (DegeneracyError, resolvent_identity_residual, resolvent_jump_by_subtraction, rho_k,
                              rho_k_boundary, spectral_density, spectral_integral)
from modcyl.states import StateParams


@pytest.mark.parametrize("mu", [2.0, -1.0, 0.5 + 0.3j])
def test_resolvent_identity_ns(geo, probes, mu):
    r, n = resolvent_identity_residual(mu, probes[2], StateParams.ns(), geo)
    assert r <= 1e-6 * n


def test_resolvent_identity_mixed(geo, probes, mixed):
    r, n = resolvent_identity_residual(0.5 + 0.3j, probes[0], mixed, geo)
    assert r <= 1e-6 * n


def test_rho_k_boundary_values(geo):
    x = np.linspace(-0.9, 0.9, 7) * geo.ell
    for side in (1, -1):
        approx = rho_k(x + side * 1e-9j, geo)
        np.testing.assert_allclose(approx, rho_k_boundary(x, side, geo), atol=1e-7)
    with pytest.raises(ValueError):
        rho_k_boundary(x, 0, geo)


def _inner(g, f, geo):
    u, w = grid(geo, -30.0, 30.0)
    return np.sum(np.conj(g.sample(geo, u).values) * f.sample(geo, u).values * w)


@pytest.mark.parametrize("which", ["NS", "mixed"])
def test_spectral_mass_and_moment(geo, probes, mixed, which):
    st = StateParams.ns() if which == "NS" else mixed
    f, g = probes[0], probes[1]
    assert spectral_integral(f, g, st, geo) == pytest.approx(_inner(g, f, geo), abs=1e-5)
    moment = spectral_integral(f, g, st, geo, weight=lambda mu: mu)
    assert moment == pytest.approx(two_point(f, g, st, geo), abs=1e-5)


def test_density_matches_subtraction(geo, probes, mixed):
    f, g = probes[0], probes[2]
    mu = 0.37
    closed = complex(np.asarray(spectral_density(mu, f, g, mixed, geo)).ravel()[0])
    sub = resolvent_jump_by_subtraction(mu, 1e-7, f, g, mixed, geo)
    assert abs(closed - sub) < 1e-4 * max(1.0, abs(closed))


def test_density_rejects_endpoints(geo, probes):
    with pytest.raises((ValueError, DegeneracyError)):
        spectral_density(1.0, probes[0], probes[1], StateParams.ns(), geo)
