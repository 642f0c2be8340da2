import numpy as np
import pytest

from modcyl.correlators import TestSpinor, grid
from modcyl.geometry import flow_trajectory
from modcyl.modular import (PureKind, flow_apply, flow_kernel, generator_check, group_law_check, hamiltonian_apply,
                            hamiltonian_kernel, pure_limit_kernel)
from modcyl.probes import bump, zero
from modcyl.states import StateParams


def test_flow_unitary(geo, probes, mixed):
    u, w = grid(geo, -25.0, 25.0)
    for st in (StateParams.ns(), mixed):
        r = flow_apply(0.4, probes[2], st, geo, u, weights=w)
        assert r.norm() == pytest.approx(probes[2].l2_norm(geo), rel=1e-6)


def test_flow_at_zero_is_identity(geo, probes, mixed):
    u, w = grid(geo, -20.0, 20.0)
    r = flow_apply(0.0, probes[1], mixed, geo, u, weights=w)
    diff = r - probes[1].sample(geo, u)
    assert diff.norm() < 1e-10


def test_ns_flow_is_local_transport(geo):
    f = TestSpinor(bump(geo, 0.2, 0.4), zero())
    u, w = grid(geo, -25.0, 25.0)
    t = 0.3
    r = flow_apply(t, f, StateParams.ns(), geo, u, weights=w)
    lo, hi = flow_trajectory(0.2, t, geo), flow_trajectory(0.4, t, geo)
    outside = (r.x < lo - 1e-9) | (r.x > hi + 1e-9)
    assert np.max(np.abs(r.values[:, outside])) < 1e-12
    assert np.max(np.abs(r.values[1])) < 1e-14


def test_zero_temperature_has_no_mixing(geo):
    k = flow_kernel(0.3, StateParams.ramond(0.0, 0.0), geo)
    assert set(k.nonlocal_entries) <= {(1, 1), (2, 2)}
    assert set(hamiltonian_kernel(StateParams.ramond(0.0, 0.0), geo).entries) >= {(1, 1), (2, 2)}


def test_generator_slope(geo, probes, mixed):
    rep = generator_check(probes[0], mixed, geo, [1e-2, 5e-3, 2.5e-3])
    assert rep.slope == pytest.approx(1.0, abs=0.2)


def test_group_law_ns(geo, probes):
    r, n = group_law_check(0.1, 0.4, probes[0], StateParams.ns(), geo)
    assert r <= 1e-3 * n


def test_rim_mirror(geo):
    lim = pure_limit_kernel(PureKind.RIM_PLUS, np.pi / 2, 0.0, geo)
    f = TestSpinor(bump(geo, 0.4, 0.6), bump(geo, 0.4, 0.6))
    u, w = grid(geo, -25.0, 25.0)
    r = hamiltonian_apply(f, lim.state, geo, u, weights=w)
    near = np.abs(r.x + 0.5) < 0.05
    assert np.max(np.abs(r.values[:, near])) > 1e-3


def test_tip_is_ns_plus_local(geo, probes):
    lim = pure_limit_kernel(PureKind.TIP_PLUS, 0.0, 0.0, geo)
    assert lim.state.h1 == lim.state.h2 == 1 / (2 * geo.L)
    # tip Hamiltonian has no off-diagonal or non-local pieces
    for (a, b), ent in lim.hamiltonian.entries.items():
        assert ent.pv is None and ent.smooth is None
