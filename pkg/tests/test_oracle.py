import numpy as np
import pytest

from modcyl.oracle import (LAMBDA_MIN, box_size, compare, discretize_G, matrix_modular_hamiltonian,
                           spectral_decomposition, spectral_measure_check)
from modcyl.states import StateParams


@pytest.mark.parametrize("N", [15, 17, 8])
def test_invalid_N(geo, N):
    with pytest.raises(ValueError):
        discretize_G(StateParams.ns(), geo, N)


def test_matrix_hermitian_and_bounded(geo, mixed):
    op = discretize_G(mixed, geo, 64)
    assert np.max(np.abs(op.matrix - op.matrix.conj().T)) < 1e-12
    dec = spectral_decomposition(op)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert dec.eigenvalues[0] > -1e-10 and dec.eigenvalues[-1] < 1 + 1e-10
    H = matrix_modular_hamiltonian(dec)
    assert np.all(np.isfinite(H))
    assert dec.lam_min == LAMBDA_MIN


def test_box_grows_with_N():
    assert box_size(256) > box_size(128)


def test_ns_hamiltonian_converges(geo, probes):
    rep = compare(probes[0], StateParams.ns(), geo, Ns=(64, 128, 256))
    assert rep.errors[-1] < 1e-3
    assert rep.order >= 1.0
    assert not rep.floor_limited


def test_ns_flow_converges(geo, probes):
    rep = compare(probes[1], StateParams.ns(), geo, Ns=(64, 128, 256), t=0.4)
    assert rep.errors[-1] < 1e-3 and rep.order >= 1.0


def test_spectral_measure_bins(geo, probes):
    edges, mat, ana = spectral_measure_check(probes[0], probes[0], StateParams.ns(), geo, N=256, bins=16)
    assert edges.size == 17
    assert np.max(np.abs(mat - ana)) < 1e-3 * np.max(np.abs(ana))
