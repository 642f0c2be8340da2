import math

import numpy as np
import pytest

from modcyl.states import (PRESETS, InvalidStateError, StateClass, StateConstraintError, StateParams, build_h,
                           classify, mixing_matrices, preset)


def test_mixing_matrices_resolve_identity():
    M1, M2 = mixing_matrices(1.0, 0.7)
    np.testing.assert_allclose(M1 + M2, 2 * np.eye(2), atol=1e-15)
    np.testing.assert_allclose(M1, M1.conj().T)
    np.testing.assert_allclose(M1 @ M1, 2 * M1, atol=1e-14)


def test_build_h(geo, mixed):
    M1, M2 = mixing_matrices(mixed.psi, mixed.phi)
    h = build_h(mixed, geo).entries
    np.testing.assert_allclose(h, 0.5 * (mixed.h1 * M1 + mixed.h2 * M2), atol=1e-15)


def test_gauge_angles_canonicalized():
    st = StateParams.ramond(0.05, 0.05, 1.2, 3.0)
    assert (st.psi, st.phi) == (0.0, 0.0)


def test_phi_wrapped():
    st = StateParams.ramond(0.0, 0.1, 0.5, -0.5)
    assert 0 <= st.phi < 2 * math.pi


@pytest.mark.parametrize("kw", [dict(h1=None, h2=0.0), dict(h1=0.0, h2=float("nan")), dict(h1=0, h2=0, psi=4.0)])
def test_invalid_state(kw):
    with pytest.raises((InvalidStateError, StateConstraintError)):
        StateParams("R", **kw)


def test_ns_rejects_zero_modes():
    with pytest.raises(InvalidStateError):
        StateParams("NS", h1=0.0)


def test_cone_constraint(geo):
    with pytest.raises(StateConstraintError):
        StateParams.ramond(0.2, 0.0).validate(geo)


def test_presets(geo):
    b = 1 / (2 * geo.L)
    assert preset("ns-vacuum", geo).is_ns
    assert preset("zero-temperature", geo) == StateParams.ramond(0.0, 0.0)
    mv = preset("massive-vacuum", geo)
    assert (mv.psi, mv.phi) == (math.pi / 2, math.pi / 2)
    assert classify(preset("tip-plus", geo), geo) is StateClass.PURE_TIP_PLUS
    assert classify(preset("tip-minus", geo), geo) is StateClass.PURE_TIP_MINUS
    rim = preset("rim(pi/2, 0.25*pi)", geo)
    assert classify(rim, geo) is StateClass.PURE_RIM
    assert rim.h1 == b and rim.h2 == -b and rim.phi == pytest.approx(math.pi / 4)
    assert len(PRESETS) == 6


def test_unknown_preset(geo):
    with pytest.raises(InvalidStateError):
        preset("thermal", geo)


def test_classify_tolerance(geo):
    b = 1 / (2 * geo.L)
    assert classify(StateParams.ramond(b * (1 - 1e-14), b), geo) is StateClass.PURE_TIP_PLUS
    assert classify(StateParams.ramond(b * (1 - 1e-6), b), geo) is StateClass.MIXED
