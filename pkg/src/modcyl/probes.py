"""Test-function families used for verification and by the CLI.

The default family is a Gaussian in the modular coordinate, taken as a
half-density: ``f(x) = F(Omega_1(x)) * sqrt(Omega_1'(x))`` with ``F`` Gaussian.
Such probes are smooth on the scale of the modular spectrum.  Narrow Gaussians
in ``x`` are not: their content at modular frequency ``k`` is weighted by
``e^{-2 pi |k|}`` in the two-point function and drops below double precision
long before it is resolved.
"""

from __future__ import annotations

import math

import numpy as np

from .correlators import TestSpinor
from .distributions import Smoothness, TestFunction1D
from .geometry import Geometry, jacobian, omega, position

__all__ = ["bump", "modular_gaussian", "probe_family", "standard_probes", "zero"]

WIDTHS = 10.0


def zero() -> TestFunction1D:
    def z(arg):
        return np.zeros(np.shape(arg), dtype=complex)

    return TestFunction1D(z, z, u_func=z, u_deriv=z, u_window=(0.0, 0.0))


def modular_gaussian(geo: Geometry, center: float = 0.0, width: float = 1.5, k0: float = 0.0,
                     amplitude: complex = 1.0) -> TestFunction1D:
    """Half-density Gaussian exp(-(u-center)^2/(2 width^2) + i k0 u) in u = Omega_1(x)."""
    cth = geo.cos_theta

    def F(u):
        return amplitude * np.exp(-((u - center) ** 2) / (2 * width**2) + 1j * k0 * u)

    def u_func(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            val = F(u) / np.sqrt(jacobian(u, geo))
        return np.where(np.abs(u - center) <= 2 * WIDTHS * width, val, 0.0)

    def u_deriv(u):
        u = np.asarray(u, dtype=float)
        dF = F(u) * (-(u - center) / width**2 + 1j * k0)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            corr = np.sinh(u) / (2 * (np.cosh(u) + cth))
            val = (dF + F(u) * corr) / np.sqrt(jacobian(u, geo))
        return np.where(np.abs(u - center) <= 2 * WIDTHS * width, val, 0.0)

    def func(x):
        return u_func(omega(1, x, geo))

    def deriv(x):
        u = omega(1, x, geo)
        with np.errstate(invalid="ignore", divide="ignore"):
            out = u_deriv(u) / jacobian(u, geo)
        return np.where(np.isfinite(out), out, 0.0)

    return TestFunction1D(func, deriv, smoothness=Smoothness.SCHWARTZ, u_func=u_func, u_deriv=u_deriv,
                          u_window=(center - WIDTHS * width, center + WIDTHS * width))


def bump(geo: Geometry, a: float, b: float, amplitude: complex = 1.0) -> TestFunction1D:
    """C-infinity bump exp(1 - 1/(1 - r^2)) supported on [a, b] in x."""
    if not -geo.ell < a < b < geo.ell:
        raise ValueError("bump support must lie inside (-ell, ell)")
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def func(x):
        r = (np.asarray(x, dtype=float) - mid) / half
        inside = np.abs(r) < 1
        rr = np.where(inside, r, 0.0)
        return np.where(inside, amplitude * np.exp(1.0 - 1.0 / (1.0 - rr**2)), 0.0)

    def deriv(x):
        r = (np.asarray(x, dtype=float) - mid) / half
        inside = np.abs(r) < 1
        rr = np.where(inside, r, 0.0)
        val = np.exp(1.0 - 1.0 / (1.0 - rr**2)) * (-2 * rr / (1.0 - rr**2) ** 2) / half
        return np.where(inside, amplitude * val, 0.0)

    lo, hi = (float(v) for v in omega(1, np.array([a, b]), geo))

    def u_func(u):
        return func(position(u, geo))

    def u_deriv(u):
        return deriv(position(u, geo)) * jacobian(u, geo)

    return TestFunction1D(func, deriv, smoothness=Smoothness.SCHWARTZ, support=(a, b),
                          u_func=u_func, u_deriv=u_deriv, u_window=(lo, hi))


def standard_probes(geo: Geometry) -> list[TestSpinor]:
    """Three fixed spinors mixing both chiralities, used by the acceptance suites."""
    g = modular_gaussian
    return [
        TestSpinor(g(geo, -1.0, 1.2), g(geo, 1.0, 1.2, amplitude=0.7)),
        TestSpinor(g(geo, 0.5, 1.3), g(geo, -1.0, 1.3, k0=0.4, amplitude=0.7)),
        TestSpinor(g(geo, 0.0, 1.5, k0=-0.6, amplitude=0.8 + 0.3j), g(geo, 0.3, 1.4, k0=0.3, amplitude=-0.5j)),
    ]


def probe_family(name: str, geo: Geometry, seed: int = 0, count: int = 3) -> list[TestSpinor]:
    """Named probe families: ``modular-gaussian`` (seeded random) or ``standard``."""
    key = name.strip().lower()
    if key == "standard":
        return standard_probes(geo)
    if key != "modular-gaussian":
        raise ValueError(f"unknown probe family {name!r}; known: standard, modular-gaussian")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.uniform(-1.5, 1.5, size=2)
        w = rng.uniform(1.1, 1.6, size=2)
        k = rng.uniform(-0.5, 0.5, size=2)
        amp = rng.normal(size=2) + 1j * rng.normal(size=2)
        amp /= max(1e-12, math.hypot(*np.abs(amp)))
        out.append(TestSpinor(modular_gaussian(geo, c[0], w[0], k[0], amp[0]),
                              modular_gaussian(geo, c[1], w[1], k[1], amp[1])))
    return out
