"""Resolvent of the restricted two-point operator via its Riemann-Hilbert problem.

With ``A = 1 - 1/mu`` (principal logarithm, cut on [0, 1]) the resolvent
``R(mu) = (G - mu)^{-1}`` has the kernel

    R_ab = [sign_a delta_ab PV k(x-y)/(2iL) + g_ab(mu)] A^{(i/2pi)(Omega_a(x) - Omega_b(y))} / (mu (1-mu))
           - (1 - 2 mu)/(2 mu (1 - mu)) delta_ab delta(x - y)

where ``k = 1/sin(pi d/L)`` and ``g = 0`` for NS, and ``k = cot(pi d/L)`` with
the 2x2 matrix ``g(mu)`` for R.  Spectral densities use the closed-form jump
across the cut; integrals over ``mu`` are done in ``s`` with
``mu = 1/(1 + e^{-2 pi s})``, so that ``dmu = 2 pi mu (1-mu) ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .correlators import SIGNS, SampledSpinor, TestSpinor, _on_cut, apply_G, grid
from .distributions import (
    DEFAULT_QUAD,
    InvSinDiff,
    PVPart,
    QuadratureSpec,
    SingularKernel1D,
    gauss_panels,
    smear,
)
from .geometry import DomainError, Geometry, jacobian, position, s_of_u
from .states import InvalidStateError, StateParams, build_h

__all__ = [
    "DegeneracyError",
    "M_k",
    "bin_average",
    "density_in_s",
    "ResolventKernel",
    "g_mu",
    "g_mu_boundary",
    "resolvent_apply",
    "resolvent_identity_residual",
    "resolvent_jump_by_subtraction",
    "resolvent_kernel",
    "rho_k",
    "rho_k_boundary",
    "spectral_density",
    "spectral_integral",
]

DEN_FLOOR = 1e-13


class DegeneracyError(ArithmeticError):
    """Vanishing denominator in g(mu); unreachable for states inside the double cone."""


# --------------------------------------------------------------------------
# scalar building blocks


def rho_k(z, geo: Geometry) -> np.ndarray:
    """rho_k(z) = (i/2pi) ln[sin(pi (z-ell)/L) / sin(pi (z+ell)/L)], analytic off the cut."""
    z = np.asarray(z, dtype=complex)
    if np.any(_on_cut(z, geo)):
        raise DomainError("rho_k is evaluated on the cut [-ell, ell]")
    th = geo.theta
    e = np.exp(1j * th)
    up = z.imag >= 0
    # the ratio as a Moebius map of q = e^{2 pi i z/L}; use 1/q below the axis
    q = np.exp(2j * np.pi * np.where(up, z, 0) / geo.L)
    p = np.exp(-2j * np.pi * np.where(up, 0, z) / geo.L)
    r_up = e * (q / e - 1) / (q * e - 1)
    r_dn = e * (1 / e - p) / (e - p)
    r = np.where(up, r_up, r_dn)
    return 1j / (2 * np.pi) * np.log(r)


def rho_k_boundary(x, side: int, geo: Geometry) -> np.ndarray:
    """rho_k(x +- i0) = -(i/2pi) Omega_1(x) -+ 1/2."""
    from .geometry import omega

    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    return -1j / (2 * np.pi) * omega(1, x, geo) - side * 0.5


def _check_mu(mu) -> complex:
    mu = complex(mu)
    if not (math.isfinite(mu.real) and math.isfinite(mu.imag)):
        raise DomainError("mu must be finite")
    if mu.imag == 0 and 0.0 <= mu.real <= 1.0:
        raise DomainError(f"mu = {mu.real} lies on the spectrum [0, 1]")
    return mu


def _log_A(mu: complex) -> complex:
    return complex(np.log(1 - 1 / mu))


def M_k(z, mu, geo: Geometry) -> np.ndarray:
    """(1 - 1/mu)^{rho_k(z)} with the principal branch."""
    mu = _check_mu(mu)
    return np.exp(rho_k(z, geo) * _log_A(mu))


def _g_formula(geo: Geometry, state: StateParams, pw: complex, mw: complex) -> np.ndarray:
    # pw = A^{2w}, mw = A^{-2w}
    if state.is_ns:
        raise InvalidStateError("g(mu) is only defined for R states")
    L, h1, h2 = geo.L, state.h1, state.h2
    h = build_h(state, geo).entries
    cp = (1 + 2 * L * h1) * (1 + 2 * L * h2)
    cm = (1 - 2 * L * h1) * (1 - 2 * L * h2)
    den = 1 - 4 * L * L * h1 * h2 + 0.5 * cp * pw + 0.5 * cm * mw
    if abs(den) < DEN_FLOOR:
        raise DegeneracyError(f"g(mu) denominator {abs(den):.3g} below {DEN_FLOOR}")
    num = 2 * h - np.trace(h) * np.eye(2) + (cp * pw - cm * mw) / (4 * L) * np.eye(2)
    return num / den


def g_mu(mu, state: StateParams, geo: Geometry) -> np.ndarray:
    """Zero-mode matrix g(mu) of the R resolvent, w = ell/L."""
    mu = _check_mu(mu)
    la = _log_A(mu)
    w = geo.ratio
    return _g_formula(geo, state, np.exp(2 * w * la), np.exp(-2 * w * la))


def g_mu_boundary(mu: float, side: int, state: StateParams, geo: Geometry) -> np.ndarray:
    """g(mu +- i0) for 0 < mu < 1: A^{sigma 2w} -> (1/mu - 1)^{sigma 2w} e^{+- sigma 2 pi i w}."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    mu = float(mu)
    if not 0.0 < mu < 1.0:
        raise DomainError("boundary values of g need 0 < mu < 1")
    lb = math.log(1 / mu - 1)
    return _g_boundary_from_log(lb, side, state, geo)


def _g_boundary_from_log(lb: float, side: int, state: StateParams, geo: Geometry) -> np.ndarray:
    w = geo.ratio
    ph = 2j * np.pi * w * side
    return _g_formula(geo, state, np.exp(2 * w * lb + ph), np.exp(-2 * w * lb - ph))


# --------------------------------------------------------------------------
# kernels and application


@dataclass(frozen=True)
class ResolventKernel:
    """Per-(a, b) singular kernels (PV and identity parts) plus separable smooth parts.

    ``separable[(a, b)]`` is a pair ``(left(u), right(v))`` whose product is the
    smooth kernel entry.
    """

    entries: dict
    separable: dict
    state: StateParams
    geo: Geometry
    mu: complex


def resolvent_kernel(mu, state: StateParams, geo: Geometry, form: int = 1) -> ResolventKernel:
    """Build R(mu); ``form`` 1 uses (1 - 1/mu)^{i.../2pi}, form 2 the (1/mu - 1) rewriting."""
    mu = _check_mu(mu)
    if form not in (1, 2):
        raise ValueError("form must be 1 or 2")
    L = geo.L
    pref = 1.0 / (mu * (1 - mu))
    la = _log_A(mu)
    lb = complex(np.log(1 / mu - 1))
    darg = lb.imag - la.imag
    dcoef = -(1 - 2 * mu) / (2 * mu * (1 - mu))
    ns = state.is_ns
    k = np.pi / L
    entries, separable = {}, {}
    for a, s in zip((1, 2), SIGNS):
        def pre(u, v, s=s):
            d = s * (u - v)
            if form == 1:
                ph = np.exp(1j * d / (2 * np.pi) * la)
            else:
                ph = np.exp(d / (2 * np.pi) * darg) * np.exp(1j * d / (2 * np.pi) * lb)
            val = pref * s / (2j * L) * ph
            if not ns:
                val = val * np.cos(k * (position(u, geo) - position(v, geo)))
            return val

        entries[(a, a)] = SingularKernel1D(geo, pv=PVPart(pre, InvSinDiff()),
                                           delta_diag=lambda u: np.full(np.shape(u), dcoef, dtype=complex))
    if not ns:
        g = g_mu(mu, state, geo)
        for a, sa in zip((1, 2), SIGNS):
            for b, sb in zip((1, 2), SIGNS):
                if g[a - 1, b - 1] == 0:
                    continue
                c = pref * g[a - 1, b - 1]
                separable[(a, b)] = (lambda u, sa=sa, c=c: c * np.exp(1j * sa * u / (2 * np.pi) * la),
                                     lambda v, sb=sb: np.exp(-1j * sb * v / (2 * np.pi) * la))
    return ResolventKernel(entries, separable, state, geo, mu)


def _default_out(f: TestSpinor, geo: Geometry, quad: QuadratureSpec):
    lo, hi = f.window(geo, quad)
    return grid(geo, lo - 15.0, hi + 15.0)


def resolvent_apply(mu, f: TestSpinor, state: StateParams, geo: Geometry, u=None,
                    quad: QuadratureSpec = DEFAULT_QUAD, form: int = 1, weights=None) -> SampledSpinor:
    """R(mu) f sampled at modular coordinates ``u`` (default: GL grid around the window of f)."""
    kern = resolvent_kernel(mu, state, geo, form)
    if u is None:
        u, weights = _default_out(f, geo, quad)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.zeros((2, u.size), dtype=complex)
    resid = 0.0
    for (a, b), k in kern.entries.items():
        res = smear(k, f.components[b - 1], quad=quad, u=u)
        out[a - 1] += res.value
        resid = max(resid, res.residual)
    if kern.separable:
        lo, hi = f.window(geo, quad)
        v, wv = grid(geo, lo, hi)
        fv = f.at_u(v, geo)
        for (a, b), (left, right) in kern.separable.items():
            c = np.sum(right(v) * fv[b - 1] * wv)
            out[a - 1] += left(u) * c
    return SampledSpinor(u, out, geo, weights, resid)


# --------------------------------------------------------------------------
# resolvent identity via nodal G


def _apply_G_nodal(vals_nodes, v, wv, vals_out, u, state: StateParams, geo: Geometry) -> np.ndarray:
    """(G phi)(u) for phi known at GL nodes ``v`` (du weights ``wv``) and at the outer points ``u``.

    The PV part is written in u as -(L/2pi) PV int sqrt(jac_v/jac_u) P phi / sinh((v-u)/2) dv and
    regularized by subtracting phi(u) exp(-(v-u)^2/2), whose PV integral vanishes by oddness.
    """
    L = geo.L
    ju, jv = jacobian(u, geo), jacobian(v, geo)
    du = v[None, :] - u[:, None]
    if np.min(np.abs(du)) < 1e-6:
        raise ValueError("outer points collide with quadrature nodes")
    E = np.exp(-0.5 * du * du)
    S = np.sinh(0.5 * du)
    if state.is_ns:
        P = 1.0
    else:
        P = np.cos(np.pi / L * (position(u, geo)[:, None] - position(v, geo)[None, :]))
    out = np.zeros_like(vals_out)
    for a, s in zip((0, 1), SIGNS):
        psi_v = np.sqrt(jv) * vals_nodes[a]
        psi_u = np.sqrt(ju) * vals_out[a]
        integrand = (P * psi_v[None, :] - psi_u[:, None] * E) / S
        pv = -(L / (2 * np.pi)) * (integrand @ wv) / np.sqrt(ju)
        out[a] = 0.5 * vals_out[a] + s / (2j * L) * pv
    if not state.is_ns:
        h = build_h(state, geo).entries
        ints = vals_nodes @ (wv * jv)
        out += (h @ ints)[:, None]
    return out


def resolvent_identity_residual(mu, f: TestSpinor, state: StateParams, geo: Geometry,
                                quad: QuadratureSpec = DEFAULT_QUAD, outer: float = 20.0,
                                inner: float = 45.0, form: int = 1) -> tuple[float, float]:
    """Returns (||(G - mu) R(mu) f - f||, ||f||), measured on |Omega_1| <= outer.

    R(mu) f is not compactly supported, so G is applied to its samples on a
    wide GL grid |v| <= inner; the outer grid is offset by a quarter panel to
    stay clear of the inner nodes.
    """
    v, wv = gauss_panels(-inner, inner, int(2 * inner), 16)
    u, wu = gauss_panels(-outer - 0.25, outer + 0.25, int(2 * outer) + 1, 16)
    allp = np.concatenate([v, u])
    Rf = resolvent_apply(mu, f, state, geo, allp, quad, form)
    Rv, Ru = Rf.values[:, : v.size], Rf.values[:, v.size:]
    GRf = _apply_G_nodal(Rv, v, wv, Ru, u, state, geo)
    fu = f.at_u(u, geo)
    r = GRf - complex(mu) * Ru - fu
    wx = wu * jacobian(u, geo)
    return float(np.sqrt(np.sum(np.abs(r) ** 2 * wx))), float(np.sqrt(np.sum(np.abs(fu) ** 2 * wx)))


def resolvent_jump_by_subtraction(mu: float, eps: float, f: TestSpinor, g: TestSpinor, state: StateParams,
                                  geo: Geometry, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """(1/2 pi i) <g, [R(mu + i eps) - R(mu - i eps)] f>, the subtraction route to the density."""
    lo, hi = g.window(geo, quad)
    u, w = grid(geo, lo, hi)
    up = resolvent_apply(mu + 1j * eps, f, state, geo, u, quad)
    dn = resolvent_apply(mu - 1j * eps, f, state, geo, u, quad)
    gv = np.conj(g.at_u(u, geo))
    return complex(np.sum(gv * (up.values - dn.values) * w) / (2j * np.pi))


# --------------------------------------------------------------------------
# spectral density from the closed-form jump


def _nodes(f: TestSpinor, g: TestSpinor, geo: Geometry, quad: QuadratureSpec, pw: float = 0.125):
    lo = min(f.window(geo, quad)[0], g.window(geo, quad)[0])
    hi = max(f.window(geo, quad)[1], g.window(geo, quad)[1])
    v, wu = gauss_panels(lo, hi, max(1, math.ceil((hi - lo) / pw)), 16)
    return v, wu * jacobian(v, geo)


def _density_s(s: np.ndarray, f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry,
               quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """2 pi mu (1-mu) times the spectral density, at mu = 1/(1 + e^{-2 pi s})."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    v, wx = _nodes(f, g, geo, quad)
    fv, gv = f.at_u(v, geo), g.at_u(v, geo)
    rs = 1.0 / np.sqrt(s_of_u(v, geo))
    x = position(v, geo)
    k = np.pi / geo.L
    pref = geo.sin_theta / (2 * geo.L)
    total = np.zeros(s.shape, dtype=complex)
    for a, sg in zip((0, 1), SIGNS):
        ph = np.exp(1j * sg * s[:, None] * v[None, :])
        weights = [np.ones_like(v)] if state.is_ns else [np.cos(k * x), np.sin(k * x)]
        for wt in weights:
            F = ph @ (fv[a] * rs * wt * wx)
            G = ph @ (gv[a] * rs * wt * wx)
            total += pref * np.conj(G) * F
    if not state.is_ns:
        lb = -2 * np.pi * s
        gp = np.array([_g_boundary_from_log(b, 1, state, geo) for b in lb])
        gm = np.array([_g_boundary_from_log(b, -1, state, geo) for b in lb])
        P, Q = {}, {}
        for a, sg in zip((0, 1), SIGNS):
            ph = np.exp(1j * sg * s[:, None] * v[None, :])
            for e in (1, -1):
                ev = np.exp(e * sg * v / 2)
                P[a, e] = ph @ (gv[a] * ev * wx)
                Q[a, e] = ph @ (fv[a] * ev * wx)
        for a in range(2):
            for b in range(2):
                total += -1j * (gp[:, a, b] * np.conj(P[a, -1]) * Q[b, 1] - gm[:, a, b] * np.conj(P[a, 1]) * Q[b, -1])
    return total


def density_in_s(s, f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry,
                 quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Density of <g, dE f> per unit s, with mu = 1/(1 + e^{-2 pi s})."""
    return _density_s(s, f, g, state, geo, quad)


def spectral_density(mu, f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry,
                     quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """(1/2 pi i) <g, [R(mu + i0) - R(mu - i0)] f> from the closed-form jump kernels."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if np.any((mu <= 1e-10) | (mu >= 1 - 1e-10)):
        raise DomainError("spectral density needs 1e-10 < mu < 1 - 1e-10")
    s = -np.log(1 / mu - 1) / (2 * np.pi)
    return _density_s(s, f, g, state, geo, quad) / (2 * np.pi * mu * (1 - mu))


def spectral_integral(f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry,
                      weight: Callable[[np.ndarray], np.ndarray] | None = None, S: float = 10.0,
                      quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """int_0^1 weight(mu) dE(f, g), integrated in s over [-S, S]."""
    s, ws = gauss_panels(-S, S, int(8 * S), 16)
    dens = _density_s(s, f, g, state, geo, quad)
    if weight is not None:
        dens = dens * weight(1.0 / (1.0 + np.exp(-2 * np.pi * s)))
    return complex(np.sum(dens * ws))


def bin_average(edges, f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry,
                quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Average of the density over each mu-bin [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    with np.errstate(divide="ignore"):
        se = -np.log(1 / edges - 1) / (2 * np.pi)
    se = np.clip(se, -12.0, 12.0)
    out = np.zeros(edges.size - 1, dtype=complex)
    for i in range(edges.size - 1):
        s, ws = gauss_panels(se[i], se[i + 1], max(2, math.ceil((se[i + 1] - se[i]) / 0.125)), 16)
        out[i] = np.sum(_density_s(s, f, g, state, geo, quad) * ws) / (edges[i + 1] - edges[i])
    return out
