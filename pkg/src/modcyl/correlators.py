"""Two-point functions of the NS vacuum and the R ground states.

The restricted two-point operator acts on spinors ``f = (f1, f2)`` on the
interval as

    (G f)_a(x) = sum_b int G_ab(x, y) f_b(y) dy,

with, after the Sokhotski split of the iε prescription,

    NS:  G_aa = sign_a PV 1/(2iL sin(pi (x-y)/L)) + 1/2 delta(x-y),  G_12 = G_21 = 0
    R:   G_ab = h_ab + delta_ab [sign_a PV cot(pi (x-y)/L)/(2iL) + 1/2 delta(x-y)].

``two_point(f, g)`` is the bilinear form ``<g, G f>`` (antilinear in ``g``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .distributions import (
    DEFAULT_QUAD,
    CauchyKernel,
    QuadratureSpec,
    SingularKernel1D,
    TestFunction1D,
    gauss_panels,
    smear,
    sokhotski_split,
)
from .geometry import DomainError, Geometry, jacobian, omega, position
from .states import StateParams, build_h, g_covariance

__all__ = [
    "SampledSpinor",
    "TestSpinor",
    "TwoPointKernel",
    "analytic_H",
    "apply_G",
    "boundary_H",
    "grid",
    "mode_sum_oracle",
    "property_iv_residual",
    "two_point",
    "two_point_kernel",
    "two_point_result",
]

SIGNS = (1, -1)


@dataclass(frozen=True)
class TestSpinor:
    """Two-chirality test function ``(f1, f2)``."""

    __test__ = False  # not a pytest test class

    f1: TestFunction1D
    f2: TestFunction1D

    @property
    def components(self) -> tuple[TestFunction1D, TestFunction1D]:
        return (self.f1, self.f2)

    def at_u(self, u, geo: Geometry) -> np.ndarray:
        """Values at modular coordinates, shape (2, n)."""
        return np.stack([c.at_u(u, geo) for c in self.components])

    def __call__(self, x) -> np.ndarray:
        return np.stack([c(x) for c in self.components])

    def window(self, geo: Geometry, quad: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
        wins = [c.window(geo, quad) for c in self.components]
        wins = [w for w in wins if w[1] > w[0]] or [(0.0, 0.0)]
        return min(w[0] for w in wins), max(w[1] for w in wins)

    def l2_norm(self, geo: Geometry, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
        return float(math.hypot(*(c.l2_norm(geo, quad) for c in self.components)))

    def sample(self, geo: Geometry, u=None, quad: QuadratureSpec = DEFAULT_QUAD) -> "SampledSpinor":
        if u is None:
            u, w = grid(geo, *self.window(geo, quad))
        else:
            u, w = np.asarray(u, dtype=float), None
        return SampledSpinor(u, self.at_u(u, geo), geo, w)


@dataclass(frozen=True)
class SampledSpinor:
    """Spinor values on modular coordinates ``u`` with optional dx quadrature weights."""

    u: np.ndarray
    values: np.ndarray
    geo: Geometry
    weights: np.ndarray | None = None
    residual: float = field(default=0.0, compare=False)

    @property
    def x(self) -> np.ndarray:
        return position(self.u, self.geo)

    def _w(self) -> np.ndarray:
        if self.weights is None:
            raise ValueError("sampled spinor carries no quadrature weights")
        return self.weights

    def inner(self, other: "SampledSpinor") -> complex:
        """<self, other> = sum_a int conj(self_a) other_a dx on the shared grid."""
        if other.u.shape != self.u.shape or not np.array_equal(other.u, self.u):
            raise ValueError("spinors live on different grids")
        return complex(np.sum(np.conj(self.values) * other.values * self._w()))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2 * self._w())))

    def __sub__(self, other: "SampledSpinor") -> "SampledSpinor":
        if not np.array_equal(other.u, self.u):
            raise ValueError("spinors live on different grids")
        return SampledSpinor(self.u, self.values - other.values, self.geo, self.weights,
                             max(self.residual, other.residual))

    def scaled(self, c: complex) -> "SampledSpinor":
        return SampledSpinor(self.u, c * self.values, self.geo, self.weights, abs(c) * self.residual)

    def to_spinor(self) -> TestSpinor:
        """Cubic-spline interpolant of the half-density f sqrt(dx/du) in u (zero outside the grid)."""
        from scipy.interpolate import CubicSpline

        geo = self.geo
        u = np.asarray(self.u, dtype=float)
        half = self.values * np.sqrt(jacobian(u, geo))[None, :]
        lo, hi = float(u[0]), float(u[-1])
        comps = []
        for a in range(2):
            re, im = CubicSpline(u, half[a].real), CubicSpline(u, half[a].imag)

            def uf(v, re=re, im=im):
                v = np.asarray(v, dtype=float)
                inside = (v >= lo) & (v <= hi)
                vv = np.clip(v, lo, hi)
                with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                    out = (re(vv) + 1j * im(vv)) / np.sqrt(jacobian(vv, geo))
                return np.where(inside, out, 0.0)

            def ud(v, re=re, im=im):
                v = np.asarray(v, dtype=float)
                inside = (v >= lo) & (v <= hi)
                vv = np.clip(v, lo, hi)
                F, dF = re(vv) + 1j * im(vv), re(vv, 1) + 1j * im(vv, 1)
                corr = np.sinh(vv) / (2 * (np.cosh(vv) + geo.cos_theta))
                with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                    out = (dF + F * corr) / np.sqrt(jacobian(vv, geo))
                return np.where(inside, out, 0.0)

            def fx(x, uf=uf):
                return uf(omega(1, x, geo))

            comps.append(TestFunction1D(fx, u_func=uf, u_deriv=ud, u_window=(lo, hi)))
        return TestSpinor(*comps)


def grid(geo: Geometry, lo: float, hi: float, panel_width: float = 0.25, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in u on [lo, hi] and the matching dx weights."""
    if not hi > lo:
        return np.zeros(0), np.zeros(0)
    n = max(1, math.ceil((hi - lo) / panel_width))
    u, wu = gauss_panels(lo, hi, n, order)
    return u, wu * jacobian(u, geo)


# --------------------------------------------------------------------------
# structured kernel


@dataclass(frozen=True)
class TwoPointKernel:
    """Per-(a, b) structured kernels of G; entries absent from the dict vanish."""

    entries: dict
    state: StateParams
    geo: Geometry
    domain: str = "interval"

    def entry(self, a: int, b: int) -> SingularKernel1D | None:
        return self.entries.get((a, b))


def _constant(c: complex) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    def k(u, v):
        return np.full(np.broadcast(u, v).shape, c, dtype=complex)

    return k


def two_point_kernel(state: StateParams, geo: Geometry, domain: str = "interval") -> TwoPointKernel:
    if domain not in ("interval", "circle"):
        raise ValueError("domain must be 'interval' or 'circle'")
    entries = {}
    if state.is_ns:
        for a, s in zip((1, 2), SIGNS):
            entries[(a, a)] = sokhotski_split(CauchyKernel("inv_sin", s / (2j * geo.L), s), geo)
    else:
        h = build_h(state, geo).entries
        for a, s in zip((1, 2), SIGNS):
            base = sokhotski_split(CauchyKernel("cot", s / (2j * geo.L), s), geo)
            entries[(a, a)] = SingularKernel1D(geo, smooth=_constant(h[a - 1, a - 1]), pv=base.pv,
                                               delta_diag=base.delta_diag)
        for a, b in ((1, 2), (2, 1)):
            if h[a - 1, b - 1] != 0:
                entries[(a, b)] = SingularKernel1D(geo, smooth=_constant(h[a - 1, b - 1]))
    return TwoPointKernel(entries, state, geo, domain)


def apply_G(f: TestSpinor, state: StateParams, geo: Geometry, u=None,
            quad: QuadratureSpec = DEFAULT_QUAD, weights=None) -> SampledSpinor:
    """(G f)(x) at modular coordinates ``u`` (default: GL grid over the window of f widened by 12)."""
    if u is None:
        lo, hi = f.window(geo, quad)
        u, weights = grid(geo, lo - 12.0, hi + 12.0)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    kernel = two_point_kernel(state, geo)
    out = np.zeros((2, u.size), dtype=complex)
    resid = 0.0
    for (a, b), k in kernel.entries.items():
        res = smear(k, f.components[b - 1], quad=quad, u=u)
        out[a - 1] += res.value
        resid = max(resid, res.residual)
    return SampledSpinor(u, out, geo, weights, resid)


class _Result(NamedTuple):
    value: complex
    residual: float


def two_point_result(f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry,
                     quad: QuadratureSpec = DEFAULT_QUAD, domain: str = "interval") -> _Result:
    """``<g, G f>`` with the largest quadrature residual encountered."""
    if domain == "circle":
        return _two_point_circle(f, g, state, geo)
    lo, hi = g.window(geo, quad)
    u, w = grid(geo, lo, hi)
    if u.size == 0:
        return _Result(0j, 0.0)
    Gf = apply_G(f, state, geo, u, quad, w)
    val = complex(np.sum(np.conj(g.at_u(u, geo)) * Gf.values * w))
    return _Result(val, Gf.residual)


def two_point(f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry,
              quad: QuadratureSpec = DEFAULT_QUAD, domain: str = "interval") -> complex:
    """Smeared two-point function ``<g, G f>``."""
    return two_point_result(f, g, state, geo, quad, domain).value


def _extend(fn: Callable, geo: Geometry, antiperiodic: bool) -> Callable:
    L = geo.L

    def ext(x):
        x = np.asarray(x, dtype=float)
        k = np.floor(x / L)
        val = np.asarray(fn(x - k * L), dtype=complex)
        if antiperiodic:
            val = val * np.where(np.mod(k, 2) == 0, 1.0, -1.0)
        return val

    return ext


def _two_point_circle(f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry,
                      n_panels: int = 64, order: int = 16) -> _Result:
    """Full-circle two-point function with f, g given on [0, L] via their ``func``."""
    L = geo.L
    x, wx = gauss_panels(0.0, L, n_panels, order)
    w, ww = gauss_panels(0.0, L / 2, n_panels, order)
    anti = state.is_ns
    k = np.pi / L
    kern = 1.0 / np.sin(k * w) if anti else 1.0 / np.tan(k * w)
    total = 0j
    ints_f = [np.sum(c.func(x) * wx) for c in f.components]
    ints_g = [np.sum(c.func(x) * wx) for c in g.components]
    for a, s in zip((0, 1), SIGNS):
        fe = _extend(f.components[a].func, geo, anti)
        pv = np.sum((fe(x[:, None] - w[None, :]) - fe(x[:, None] + w[None, :])) * kern * ww, axis=1)
        Gf = 0.5 * np.asarray(f.components[a].func(x)) + s / (2j * L) * pv
        total += np.sum(np.conj(g.components[a].func(x)) * Gf * wx)
    if not state.is_ns:
        h = build_h(state, geo).entries
        for a in range(2):
            for b in range(2):
                total += h[a, b] * np.conj(ints_g[a]) * ints_f[b]
    return _Result(complex(total), 0.0)


def mode_sum_oracle(f: TestSpinor, g: TestSpinor, state: StateParams, geo: Geometry, N_modes: int,
                    quad: QuadratureSpec = DEFAULT_QUAD, domain: str = "interval") -> complex:
    """Truncated Fourier-mode sum of ``<g, G f>`` (first N_modes occupied modes per chirality)."""
    if int(N_modes) < 1:
        raise ValueError("N_modes must be >= 1")
    L = geo.L
    if domain == "circle":
        x, wx = gauss_panels(0.0, L, 64, 16)
        fv = np.stack([c.func(x) for c in f.components]).astype(complex)
        gv = np.stack([c.func(x) for c in g.components]).astype(complex)
    else:
        lo = min(f.window(geo, quad)[0], g.window(geo, quad)[0])
        hi = max(f.window(geo, quad)[1], g.window(geo, quad)[1])
    n = np.arange(int(N_modes))
    kn = np.pi * (2 * n + 1) / L if state.is_ns else 2 * np.pi * (n + 1) / L
    if domain != "circle":
        # resolve the highest mode: about 8 radians per 16-node panel
        jmax = float(jacobian(0.0, geo))
        u, wx = grid(geo, lo, hi, panel_width=min(0.25, 8.0 / (kn[-1] * jmax)))
        x = position(u, geo)
        fv, gv = f.at_u(u, geo), g.at_u(u, geo)
    total = 0j
    for a, s in zip((0, 1), SIGNS):
        phase = np.exp(1j * s * kn[:, None] * x[None, :])
        fh = phase @ (fv[a] * wx)
        gh = phase @ (gv[a] * wx)
        total += np.sum(np.conj(gh) * fh) / L
    if not state.is_ns:
        gm = g_covariance(state, geo)
        f0, g0 = fv @ wx, gv @ wx
        total += np.conj(g0) @ gm @ f0
    return complex(total)


# --------------------------------------------------------------------------
# analytic continuation off the interval


def _csc(w: np.ndarray) -> np.ndarray:
    # overflow-safe 1/sin for complex arguments
    w = np.asarray(w, dtype=complex)
    up = w.imag >= 0
    q = np.where(up, np.exp(1j * np.where(up, w, 0)), np.exp(-1j * np.where(up, 0, w)))
    return np.where(up, -2j * q / (1 - q * q), 2j * q / (1 - q * q))


def _cot(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    up = w.imag >= 0
    q = np.where(up, np.exp(2j * np.where(up, w, 0)), np.exp(-2j * np.where(up, 0, w)))
    return np.where(up, -1j * (1 + q) / (1 - q), 1j * (1 + q) / (1 - q))


def _on_cut(z: np.ndarray, geo: Geometry) -> np.ndarray:
    L = geo.L
    xr = np.mod(z.real + L / 2, L) - L / 2
    return (np.abs(z.imag) < 1e-15 * geo.ell) & (np.abs(xr) <= geo.ell)


def _graded_nodes(lo: float, hi: float, c: float, hmin: float, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """GL panels on [lo, hi] graded geometrically toward ``c``."""
    edges = {lo, hi}
    if lo < c < hi:
        edges.add(c)
        d = 0.5
        while d > hmin:
            for e in (c - d, c + d):
                if lo < e < hi:
                    edges.add(e)
            d *= 0.5
    edges = np.array(sorted(edges))
    fine = []
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(1, math.ceil((b - a) / 0.25))
        fine.append(np.linspace(a, b, n + 1))
    e = np.unique(np.concatenate(fine))
    v, w = gauss_panels(e[:-1], e[1:], 1, order)
    return v.ravel(), w.ravel()


def analytic_H(f: TestSpinor, z, state: StateParams, geo: Geometry,
               quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """(Hf)(z) off the cut; returns shape (2,) + shape(z).

    NS:  (Hf)_a(z) = sign_a/(2iL) int f_a(y) / sin(pi (z-y)/L) dy
    R:   (Hf)_a(z) = sum_b h_ab int f_b + sign_a/(2iL) int f_a(y) cot(pi (z-y)/L) dy
    """
    z = np.asarray(z, dtype=complex)
    if np.any(_on_cut(z, geo)):
        raise DomainError("z lies on the cut [-ell, ell]; use boundary_H")
    shape = z.shape
    zf = z.ravel()
    lo, hi = f.window(geo, quad)
    L = geo.L
    out = np.zeros((2, zf.size), dtype=complex)
    kern = _csc if state.is_ns else _cot
    for i, zz in enumerate(zf):
        xr = np.mod(zz.real + L / 2, L) - L / 2
        if abs(xr) < geo.ell:
            c = float(omega(1, xr, geo))
            hmin = max(1e-14, 0.1 * abs(zz.imag) / float(jacobian(c, geo)))
        else:
            c, hmin = lo - 1.0, 1.0
        v, wv = _graded_nodes(lo, hi, c, hmin)
        y = position(v, geo)
        k = kern(np.pi * (zz - y) / L) * wv * jacobian(v, geo)
        vals = f.at_u(v, geo)
        for a, s in zip((0, 1), SIGNS):
            out[a, i] = s / (2j * L) * np.sum(vals[a] * k)
    if not state.is_ns:
        h = build_h(state, geo).entries
        u, w = grid(geo, lo, hi)
        ints = f.at_u(u, geo) @ w
        out += (h @ ints)[:, None]
    return out.reshape((2,) + shape)


def boundary_H(f: TestSpinor, x, side: int, state: StateParams, geo: Geometry,
               quad: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Boundary value (Hf)(x + side*i0) by Richardson extrapolation in the offset.

    Offsets eta in {1e-3, ..., 1e-6} * ell; the O(eta) error of smooth f is
    eliminated by repeated extrapolation with ratio 10.
    """
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    etas = geo.ell * np.array([1e-3, 1e-4, 1e-5, 1e-6])
    table = [analytic_H(f, x + side * 1j * e, state, geo, quad) for e in etas]
    # Neville tableau in eta with target eta = 0
    for level in range(1, len(table)):
        r = 10.0**level
        table = [(r * table[i + 1] - table[i]) / (r - 1) for i in range(len(table) - 1)]
    return table[0]


def property_iv_residual(f: TestSpinor, x: float, Y: float, state: StateParams, geo: Geometry,
                         quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Decay residual at height Y: |Hf| (NS) or the h-hat combination (R)."""
    up = analytic_H(f, x + 1j * Y, state, geo, quad)
    dn = analytic_H(f, x - 1j * Y, state, geo, quad)
    if state.is_ns:
        return float(max(np.max(np.abs(up)), np.max(np.abs(dn))))
    h = build_h(state, geo).entries
    b = 1.0 / (2 * geo.L)
    hp = np.array([[h[0, 0] + b, -h[0, 1]], [h[1, 0], -h[1, 1] + b]])
    hm = np.array([[h[0, 0] - b, -h[0, 1]], [h[1, 0], -h[1, 1] - b]])
    return float(np.max(np.abs(hp @ up - hm @ dn)))
