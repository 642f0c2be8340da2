import numpy as np
import pytest

from modcyl.correlators import apply_G, grid, mode_sum_oracle, two_point, two_point_kernel
from modcyl.states import StateParams


@pytest.fixture(params=["NS", "h0", "mixed"])
def state(request, mixed):
    return {"NS": StateParams.ns(), "h0": StateParams.ramond(0.0, 0.0), "mixed": mixed}[request.param]


def test_hermitian_and_bounded(geo, probes, state):
    f, g = probes[0], probes[2]
    gfg = two_point(f, g, state, geo)
    ggf = two_point(g, f, state, geo)
    assert gfg == pytest.approx(np.conj(ggf), abs=1e-9)
    ff = two_point(f, f, state, geo)
    assert abs(ff.imag) < 1e-9
    assert 0 < ff.real < f.l2_norm(geo) ** 2


def test_apply_G_consistent_with_pairing(geo, probes, state):
    f, g = probes[0], probes[1]
    u, w = grid(geo, -20.0, 20.0)
    Gf = apply_G(f, state, geo, u, weights=w)
    gs = g.sample(geo, u)
    assert np.sum(np.conj(gs.values) * Gf.values * w) == pytest.approx(two_point(f, g, state, geo), abs=1e-8)


def test_ns_has_no_nonlocal_block(geo):
    k = two_point_kernel(StateParams.ns(), geo)
    for (a, b), ent in k.entries.items():
        if a != b:
            assert ent.smooth is None and ent.pv is None


def test_mode_sum_agrees(geo, probes, mixed):
    f, g = probes[0], probes[1]
    exact = two_point(f, g, mixed, geo)
    approx = mode_sum_oracle(f, g, mixed, geo, 400)
    assert abs(exact - approx) < 1e-3 * max(1.0, abs(exact))
