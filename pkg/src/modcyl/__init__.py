"""Modular flow and modular Hamiltonians of free Dirac fermions on a cylinder.

The submodules are layered: ``geometry`` (interval maps), ``states`` (NS/R
states), ``distributions`` (singular kernels and smearing), ``correlators``
(two-point function G), ``resolvent`` (resolvent and spectral measure),
``modular`` (flow and Hamiltonian kernels), ``oracle`` (matrix spectral
calculus), ``verify`` and ``cli``.
"""

from .correlators import TestSpinor, apply_G, two_point, two_point_kernel
from .geometry import Geometry, flow_trajectory, omega
from .modular import (flow_apply, flow_kernel, hamiltonian_apply, hamiltonian_kernel, pure_limit_kernel,
                      pure_state)
from .oracle import compare, compare_sweep, discretize_G, matrix_modular_flow, matrix_modular_hamiltonian
from .probes import bump, modular_gaussian
from .resolvent import resolvent_apply, resolvent_kernel, spectral_density
from .states import StateParams, classify, preset

__version__ = "0.1.0"

__all__ = [
    "Geometry",
    "StateParams",
    "TestSpinor",
    "__version__",
    "apply_G",
    "bump",
    "classify",
    "compare",
    "compare_sweep",
    "discretize_G",
    "flow_apply",
    "flow_kernel",
    "flow_trajectory",
    "hamiltonian_apply",
    "hamiltonian_kernel",
    "matrix_modular_flow",
    "matrix_modular_hamiltonian",
    "modular_gaussian",
    "omega",
    "preset",
    "pure_limit_kernel",
    "pure_state",
    "resolvent_apply",
    "resolvent_kernel",
    "spectral_density",
    "two_point",
    "two_point_kernel",
]
