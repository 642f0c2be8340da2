"""Modular flow and modular Hamiltonian kernels.

Notation: ``u = Omega_1(x)``, ``sign_a = +-1`` for chirality 1/2, ``c = L/(4 ell)``,
``kappa = L/(4 pi ell)``, and ``p_i = (1 + 2 L h_i)/(1 - 2 L h_i)`` with the
mixing matrices ``M_i`` of the zero-mode angles.

Flow, ``f(t) = K(t) f``:

* local part: transport along the trajectory ``Omega_a(y*) = Omega_a(x) - 2 pi t``
  with weight ``sqrt(s(y*)/s(x))``; for R states the weight carries the
  extra factor ``cos(pi (x - y*)/L)`` that the jump of the R resolvent
  attaches to its first term;
* non-local part (R): ``sinh(pi t)/(4 ell) PV 1/sinh(c z) sum_i p_i^{i kappa z} M_i``
  with ``z = 2 pi t - Omega_a(x) + Omega_b(y)``.

A channel with ``|h_i| = 1/(2L)`` has ``p_i`` in {0, inf}; its PV term is then
replaced by its weak limit ``+-(i pi/L) sinh(pi t) delta(z) M_i``.  At the
tips and on the rim this reproduces the closed-form pure-state kernels.

Hamiltonian: ``sign_a 2iL [sin^2(pi ell/L) - sin(pi x/L) sin(pi y/L)]/sin(theta) delta'(x-y)``
plus ``(i pi/(4 ell)) PV 1/sinh(c w) sum_i p_i^{-i kappa w} M_i`` with
``w = Omega_a(x) - Omega_b(y)``; boundary channels give
``+-(pi^2/L) delta(w) M_i``, i.e. ``delta(x - y)`` and the mirror ``delta(x + y)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .correlators import SIGNS, SampledSpinor, TestSpinor, grid
from .distributions import (
    DEFAULT_QUAD,
    DeltaPrime,
    InvSinhOmegaDiff,
    PVPart,
    QuadratureSpec,
    SingularKernel1D,
    pv_sinh_nodal,
    smear,
)
from .geometry import DomainError, Geometry, jacobian, omega, position, s_of_u
from .states import StateParams, mixing_matrices

__all__ = [
    "FlowKernelParts",
    "GeneratorReport",
    "ModularFlowKernel",
    "ModularHamiltonianKernel",
    "PureKind",
    "PureLimit",
    "flow_apply",
    "flow_kernel",
    "flow_kernel_eval",
    "generator_check",
    "group_law_check",
    "hamiltonian_apply",
    "hamiltonian_kernel",
    "pure_limit_kernel",
    "pure_state",
]


class PureKind(enum.Enum):
    TIP_PLUS = "tip-plus"
    TIP_MINUS = "tip-minus"
    RIM_PLUS = "rim-plus"
    RIM_MINUS = "rim-minus"


@dataclass(frozen=True)
class _Channel:
    """One eigen-channel of h: its phase base and mixing matrix; ``edge`` is +-1 on the cone boundary."""

    p: float
    matrix: np.ndarray
    edge: int = 0


def _channels(state: StateParams, geo: Geometry) -> list[_Channel]:
    if state.is_ns:
        return []
    state.validate(geo)
    m1, m2 = mixing_matrices(state.psi, state.phi)
    b = 1.0 / (2 * geo.L)
    out = []
    for h, m in ((state.h1, m1), (state.h2, m2)):
        if abs(abs(h) - b) <= 1e-12 * b:
            out.append(_Channel(math.inf if h > 0 else 0.0, m, 1 if h > 0 else -1))
        else:
            out.append(_Channel((1 + 2 * geo.L * h) / (1 - 2 * geo.L * h), m))
    return out


def _boundary_matrix(channels: list[_Channel]) -> np.ndarray | None:
    edge = [ch for ch in channels if ch.edge]
    if not edge:
        return None
    return sum(ch.edge * ch.matrix for ch in edge)


def _phase(channels: list[_Channel], a: int, b: int, kz: np.ndarray) -> np.ndarray:
    """sum_i p_i^{i kz} (M_i)_ab over the regular channels."""
    out = np.zeros(np.shape(kz), dtype=complex)
    for ch in channels:
        if ch.edge:
            continue
        m = ch.matrix[a - 1, b - 1]
        if m != 0:
            out = out + m * np.exp(1j * kz * math.log(ch.p))
    return out


def _has_entry(channels: list[_Channel], a: int, b: int) -> bool:
    return any(not ch.edge and ch.matrix[a - 1, b - 1] != 0 for ch in channels)


def _nonlocal_terms(channels, f: TestSpinor, u: np.ndarray, geo: Geometry, quad: QuadratureSpec,
                    shift: float, amp: complex) -> tuple[np.ndarray, float]:
    """sum over (a, b, i) of amp M_i[a,b] p_i^{i kappa (shift - sign_a u)} PV int p_i^{i kappa r} jac f_b / sinh(c (r - sign_a u + shift)).

    The prefactor separates in (u, r) with ``r = Omega_b(y)``, so each channel
    needs one PV integral of a fixed function, done on a fixed node set.
    """
    c = geo.L / (4 * geo.ell)
    kappa = geo.L / (4 * np.pi * geo.ell)
    out = np.zeros((2, u.size), dtype=complex)
    resid = 0.0
    for b, sb in zip((0, 1), SIGNS):
        fb = f.components[b]
        lo, hi = fb.window(geo, quad)
        win = tuple(sorted((sb * lo, sb * hi)))
        for ch in channels:
            if ch.edge or not np.any(ch.matrix[:, b]):
                continue
            lk = kappa * math.log(ch.p)

            def phi(r, lk=lk, fb=fb, sb=sb):
                return np.exp(1j * lk * r) * fb.at_u(sb * r, geo) * jacobian(r, geo)

            for a, sa in zip((0, 1), SIGNS):
                m = ch.matrix[a, b]
                if m == 0:
                    continue
                cen = sa * u - shift
                res = pv_sinh_nodal(phi, cen, c, win, quad)
                out[a] += amp * m * np.exp(-1j * lk * cen) * res.value
                resid = max(resid, res.residual)
    return out, resid


# --------------------------------------------------------------------------
# flow


@dataclass(frozen=True)
class ModularFlowKernel:
    """Structured flow kernel at time ``t``.

    ``cos_factor`` marks the R local weight; ``nonlocal_entries`` maps (a, b)
    to PV-sinh kernels; ``delta_matrix`` is the 2x2 weight of the
    ``(i pi/L) sinh(pi t) delta(z)`` term from boundary channels.
    """

    t: float
    geo: Geometry
    cos_factor: bool
    nonlocal_entries: dict = field(default_factory=dict)
    delta_matrix: np.ndarray | None = None
    channels: tuple = ()

    def apply(self, f: TestSpinor, u, quad: QuadratureSpec = DEFAULT_QUAD,
              method: str = "nodal") -> tuple[np.ndarray, float]:
        """Values of K(t) f at ``u``; ``method="smear"`` uses the per-point PV quadrature instead."""
        geo, t = self.geo, self.t
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if not np.all(np.isfinite(u)):
            raise DomainError("flow output points must be interior")
        out = np.zeros((2, u.size), dtype=complex)
        ju = jacobian(u, geo)
        for a, s in zip((0, 1), SIGNS):
            vs = u - s * 2 * np.pi * t
            w = np.sqrt(jacobian(vs, geo) / ju)
            if self.cos_factor:
                w = w * np.cos(np.pi / geo.L * (position(u, geo) - position(vs, geo)))
            out[a] = w * f.components[a].at_u(vs, geo)
        if self.delta_matrix is not None:
            pref = 1j * np.pi / geo.L * math.sinh(np.pi * t)
            for a, sa in zip((0, 1), SIGNS):
                for b, sb in zip((0, 1), SIGNS):
                    m = self.delta_matrix[a, b]
                    if m == 0:
                        continue
                    vs = sb * (sa * u - 2 * np.pi * t)
                    out[a] += pref * m * jacobian(vs, geo) * f.components[b].at_u(vs, geo)
        resid = 0.0
        if method == "nodal":
            if self.nonlocal_entries:
                amp = math.sinh(np.pi * t) / (4 * geo.ell)
                nl, resid = _nonlocal_terms(self.channels, f, u, geo, quad, 2 * np.pi * t, amp)
                out += nl
            return out, resid
        if method != "smear":
            raise ValueError(f"unknown method {method!r}")
        for (a, b), k in self.nonlocal_entries.items():
            res = smear(k, f.components[b - 1], quad=quad, u=u)
            out[a - 1] += res.value
            resid = max(resid, res.residual)
        return out, resid


def _flow_nonlocal(t: float, channels: list[_Channel], geo: Geometry) -> dict:
    c = geo.L / (4 * geo.ell)
    kappa = geo.L / (4 * np.pi * geo.ell)
    amp = math.sinh(np.pi * t) / (4 * geo.ell)
    out = {}
    if amp == 0:
        return out
    for a, sa in zip((1, 2), SIGNS):
        for b, sb in zip((1, 2), SIGNS):
            if not _has_entry(channels, a, b):
                continue

            def pre(u, v, a=a, b=b, sa=sa, sb=sb):
                z = 2 * np.pi * t - sa * u + sb * v
                return amp * _phase(channels, a, b, kappa * z)

            out[(a, b)] = SingularKernel1D(geo, pv=PVPart(pre, InvSinhOmegaDiff(a, b, c, 2 * np.pi * t)))
    return out


def flow_kernel(t: float, state: StateParams, geo: Geometry) -> ModularFlowKernel:
    t = float(t)
    if not math.isfinite(t):
        raise DomainError("modular time must be finite")
    if state.is_ns:
        return ModularFlowKernel(t, geo, False)
    ch = _channels(state, geo)
    return ModularFlowKernel(t, geo, True, _flow_nonlocal(t, ch, geo), _boundary_matrix(ch), tuple(ch))


def _default_grid(f: TestSpinor, geo: Geometry, quad: QuadratureSpec, shift: float = 0.0):
    lo, hi = f.window(geo, quad)
    return grid(geo, lo - abs(shift) - 10.0, hi + abs(shift) + 10.0, panel_width=0.5)


def flow_apply(t: float, f: TestSpinor, state: StateParams, geo: Geometry, u=None,
               quad: QuadratureSpec = DEFAULT_QUAD, weights=None, method: str = "nodal") -> SampledSpinor:
    """K(t) f at modular coordinates ``u`` (default: GL grid, clustered toward +-ell in x)."""
    k = flow_kernel(t, state, geo)
    if u is None:
        u, weights = _default_grid(f, geo, quad, 2 * np.pi * t)
    vals, resid = k.apply(f, u, quad, method)
    return SampledSpinor(np.atleast_1d(np.asarray(u, dtype=float)), vals, geo, weights, resid)


@dataclass(frozen=True)
class FlowKernelParts:
    """Pointwise kernel data at (x, y): nothing is ever evaluated on a delta locus.

    ``residual[a, b]`` is ``2 pi t - Omega_a(x) + Omega_b(y)`` (the local and
    boundary-channel terms are supported where it vanishes); ``local_weight``
    is the coefficient of ``delta(2 pi t - Omega_a(x) + Omega_a(y))`` on the
    diagonal; ``delta_weight`` that of the boundary-channel delta; ``nonlocal``
    the PV-sinh kernel value (NaN on its singular locus).
    """

    residual: np.ndarray
    local_weight: np.ndarray
    delta_weight: np.ndarray
    nonlocal_: np.ndarray


def flow_kernel_eval(t: float, x: float, y: float, state: StateParams, geo: Geometry) -> FlowKernelParts:
    ux, uy = float(omega(1, x, geo)), float(omega(1, y, geo))
    if not (math.isfinite(ux) and math.isfinite(uy)):
        raise DomainError("kernel points must be interior")
    k = flow_kernel(t, state, geo)
    res = np.array([[2 * np.pi * t - sa * ux + sb * uy for sb in SIGNS] for sa in SIGNS])
    loc = np.zeros((2, 2), dtype=complex)
    if x != y:
        base = 2 * np.pi / geo.L * math.sinh(np.pi * t) / math.sin(np.pi * (x - y) / geo.L)
        if k.cos_factor:
            base *= math.cos(np.pi * (x - y) / geo.L)
        loc = np.diag([base, -base]).astype(complex)
    dw = np.zeros((2, 2), dtype=complex)
    if k.delta_matrix is not None:
        dw = 1j * np.pi / geo.L * math.sinh(np.pi * t) * k.delta_matrix
    nl = np.zeros((2, 2), dtype=complex)
    for (a, b), ker in k.nonlocal_entries.items():
        z = res[a - 1, b - 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nl[a - 1, b - 1] = ker.pv.prefactor(np.array(ux), np.array(uy)) / np.sinh(ker.pv.singularity.scale * z) \
                if z != 0 else np.nan
    return FlowKernelParts(res, loc, dw, nl)


# --------------------------------------------------------------------------
# Hamiltonian


@dataclass(frozen=True)
class ModularHamiltonianKernel:
    """Per-(a, b) structured kernels of the modular Hamiltonian."""

    geo: Geometry
    entries: dict
    label: str = ""
    channels: tuple = ()

    def apply(self, f: TestSpinor, u, quad: QuadratureSpec = DEFAULT_QUAD,
              method: str = "nodal") -> tuple[np.ndarray, float]:
        """Values of H f at ``u``; ``method="smear"`` uses the per-point PV quadrature instead."""
        if method not in ("nodal", "smear"):
            raise ValueError(f"unknown method {method!r}")
        u = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.zeros((2, u.size), dtype=complex)
        resid = 0.0
        if method == "nodal" and any(k.pv is not None for k in self.entries.values()):
            amp = -1j * np.pi / (4 * self.geo.ell)
            out, resid = _nonlocal_terms(self.channels, f, u, self.geo, quad, 0.0, amp)
        for (a, b), k in self.entries.items():
            if method == "nodal" and k.pv is not None:
                k = replace(k, pv=None)
                if not k.parts():
                    continue
            res = smear(k, f.components[b - 1], quad=quad, u=u)
            out[a - 1] += res.value
            resid = max(resid, res.residual)
        return out, resid

    def parts(self) -> dict:
        return {ab: k.parts() for ab, k in self.entries.items()}


def _local_delta_prime(sign: int, geo: Geometry) -> DeltaPrime:
    c = 2j * geo.L / geo.sin_theta

    def value(u):
        return sign * c * s_of_u(u, geo)

    def dy(u):
        return -sign * 1j * np.pi * np.sin(2 * np.pi * position(u, geo) / geo.L) / geo.sin_theta

    return DeltaPrime(value, dy)


def hamiltonian_kernel(state: StateParams, geo: Geometry) -> ModularHamiltonianKernel:
    ch = _channels(state, geo)
    c = geo.L / (4 * geo.ell)
    kappa = geo.L / (4 * np.pi * geo.ell)
    bm = _boundary_matrix(ch)
    entries = {}
    for a, sa in zip((1, 2), SIGNS):
        for b, sb in zip((1, 2), SIGNS):
            parts = {}
            if a == b:
                parts["delta_prime"] = _local_delta_prime(sa, geo)
            if _has_entry(ch, a, b):
                def pre(u, v, a=a, b=b, sa=sa, sb=sb):
                    # singular factor is 1/sinh(c (-w)) = -1/sinh(c w)
                    w = sa * u - sb * v
                    return -(1j * np.pi / (4 * geo.ell)) * _phase(ch, a, b, -kappa * w)

                parts["pv"] = PVPart(pre, InvSinhOmegaDiff(a, b, c, 0.0))
            if bm is not None and bm[a - 1, b - 1] != 0:
                coef = np.pi**2 / geo.L * bm[a - 1, b - 1]

                def dcoef(u, coef=coef):
                    return coef * jacobian(u, geo)

                parts["delta_diag" if a == b else "delta_mirror"] = dcoef
            if parts:
                entries[(a, b)] = SingularKernel1D(geo, **parts)
    label = "NS" if state.is_ns else "R"
    return ModularHamiltonianKernel(geo, entries, label, tuple(ch))


def hamiltonian_apply(f: TestSpinor, state: StateParams, geo: Geometry, u=None,
                      quad: QuadratureSpec = DEFAULT_QUAD, weights=None, method: str = "nodal") -> SampledSpinor:
    """H f at modular coordinates ``u``."""
    k = hamiltonian_kernel(state, geo)
    if u is None:
        u, weights = _default_grid(f, geo, quad)
    vals, resid = k.apply(f, u, quad, method)
    return SampledSpinor(np.atleast_1d(np.asarray(u, dtype=float)), vals, geo, weights, resid)


# --------------------------------------------------------------------------
# pure states


def pure_state(which: PureKind, psi: float, phi: float, geo: Geometry) -> StateParams:
    b = 1.0 / (2 * geo.L)
    which = PureKind(which)
    h1, h2 = {
        PureKind.TIP_PLUS: (b, b),
        PureKind.TIP_MINUS: (-b, -b),
        PureKind.RIM_PLUS: (b, -b),
        PureKind.RIM_MINUS: (-b, b),
    }[which]
    return StateParams.ramond(h1, h2, psi, phi)


@dataclass(frozen=True)
class PureLimit:
    """Closed-form kernels at a cone extreme point."""

    which: PureKind
    hamiltonian: ModularHamiltonianKernel
    state: StateParams
    geo: Geometry

    def flow(self, t: float) -> ModularFlowKernel:
        return flow_kernel(t, self.state, self.geo)


def pure_limit_kernel(which: PureKind, psi: float, phi: float, geo: Geometry) -> PureLimit:
    """H^NS plus the local (tips) or local and mirror (rim) delta terms, with matching flows.

    The extra Hamiltonian term is ``+-2 pi s(x)/sin(theta)`` times ``delta_ab delta(x-y)``
    at the tips, and times ``cos psi diag(1,-1) delta(x-y) + sin psi [[0, e^{i phi}],
    [e^{-i phi}, 0]] delta(x+y)`` on the rim.
    """
    st = pure_state(which, psi, phi, geo)
    return PureLimit(PureKind(which), hamiltonian_kernel(st, geo), st, geo)


# --------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class GeneratorReport:
    t: np.ndarray
    abs_error: np.ndarray
    rel_error: np.ndarray
    slope: float


def generator_check(f: TestSpinor, state: StateParams, geo: Geometry, t_list,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> GeneratorReport:
    """||(K(t) f - f)/(i t) - H f|| per t (t = 0 skipped) and the log-log slope."""
    ts = np.array([float(t) for t in t_list if float(t) != 0.0])
    u, w = _default_grid(f, geo, quad, 2 * np.pi * float(np.max(np.abs(ts))) if ts.size else 0.0)
    Hf = hamiltonian_apply(f, state, geo, u, quad, w)
    f0 = f.at_u(u, geo)
    hn = Hf.norm()
    errs = []
    for t in ts:
        Kf = flow_apply(t, f, state, geo, u, quad, w)
        d = (Kf.values - f0) / (1j * t) - Hf.values
        errs.append(float(np.sqrt(np.sum(np.abs(d) ** 2 * w))))
    errs = np.array(errs)
    slope = math.nan
    ok = errs > 0
    if np.count_nonzero(ok) >= 2:
        slope = float(np.polyfit(np.log(np.abs(ts[ok])), np.log(errs[ok]), 1)[0])
    return GeneratorReport(ts, errs, errs / hn if hn > 0 else errs, slope)


def group_law_check(t1: float, t2: float, f: TestSpinor, state: StateParams, geo: Geometry,
                    quad: QuadratureSpec = DEFAULT_QUAD, spacing: float = 0.05) -> tuple[float, float]:
    """(||K(t1) K(t2) f - K(t1 + t2) f||, ||f||); the intermediate state is splined in u."""
    lo, hi = f.window(geo, quad)
    m = 2 * np.pi * abs(t2) + 14.0
    fine = np.arange(lo - m, hi + m + spacing / 2, spacing)
    inter = flow_apply(t2, f, state, geo, fine, quad).to_spinor()
    u, w = _default_grid(f, geo, quad, 2 * np.pi * (abs(t1) + abs(t2)))
    a = flow_apply(t1, inter, state, geo, u, quad, w)
    b = flow_apply(t1 + t2, f, state, geo, u, quad, w)
    return (a - b).norm(), f.l2_norm(geo, quad)
