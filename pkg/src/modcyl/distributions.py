"""Distributional kernels and the quadrature that smears them.

Kernels are split into a smooth part, a principal-value part, and local
parts (delta, delta', and the mirror delta(x+y)).  Coefficient functions take
the *modular* coordinates ``u = Omega_1(x)`` and ``v = Omega_1(y)`` of the two
points; with that convention every principal value in this package has the
form ``PV 1/sinh(scale * (v - c))`` in a single real variable, which is
handled by folding the integrand around ``c``:

    PV int phi(v) / sinh(s (v - c)) dv
        = int_0^d [phi(c + w) - phi(c - w)] / sinh(s w) dw  +  regular flanks.

The folded integrand is smooth, so plain Gauss-Legendre panels converge
spectrally.  Panel counts are doubled until two successive estimates agree to
the requested absolute tolerance; the last difference is returned as the
residual.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .geometry import Geometry, jacobian, omega, position

__all__ = [
    "CauchyKernel",
    "DeltaPrime",
    "InvSinDiff",
    "InvSinhOmegaDiff",
    "PVPart",
    "QuadResult",
    "QuadratureSpec",
    "SingularKernel1D",
    "Smoothness",
    "TestFunction1D",
    "flow_integral",
    "flow_integral_reference",
    "flow_integral_smeared",
    "flow_integral_smeared_reference",
    "gauss_panels",
    "integrate",
    "lemma_limit_eval",
    "lemma_symmetric_exclusion",
    "pv_sinh",
    "pv_sinh_nodal",
    "smear",
    "sokhotski_split",
]


class PrecisionError(ValueError):
    """Input too rough for the requested kernel part."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre settings (lengths in modular-coordinate units).

    ``tol`` bounds the change between successive panel doublings, absolutely
    for values of magnitude below 1 and relatively above.
    """

    tol: float = 1e-10
    order: int = 16
    panel_width: float = 0.5
    max_doublings: int = 4
    omega_cutoff: float = 40.0
    fold_halfwidth: float = 1.0

    def coarser(self, factor: float = 2.0) -> "QuadratureSpec":
        return QuadratureSpec(self.tol, self.order, self.panel_width * factor, self.max_doublings,
                              self.omega_cutoff, self.fold_halfwidth)


DEFAULT_QUAD = QuadratureSpec()


class QuadResult(NamedTuple):
    value: np.ndarray
    residual: float


@functools.lru_cache(maxsize=32)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_panels(a, b, n_panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [a, b]; ``a``, ``b`` may be arrays.

    Returns arrays of shape ``broadcast(a, b).shape + (n_panels * order,)``.
    """
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    xg, wg = _legendre(order)
    t = (np.arange(n_panels)[:, None] + 0.5 * (xg[None, :] + 1.0)) / n_panels
    t = t.ravel()
    wt = np.tile(wg, n_panels) / (2.0 * n_panels)
    h = b - a
    return a + h * t, h * wt


def _mixed_diff(cur: np.ndarray, prev: np.ndarray) -> float:
    # absolute below magnitude 1, relative above it
    if not np.size(cur):
        return 0.0
    return float(np.max(np.abs(cur - prev) / np.maximum(1.0, np.abs(cur))))


def _converge(estimate: Callable[[int], np.ndarray], n0: int, quad: QuadratureSpec) -> QuadResult:
    prev = estimate(n0)
    n = n0
    diff = math.inf
    for _ in range(quad.max_doublings):
        n *= 2
        cur = estimate(n)
        diff = _mixed_diff(cur, prev)
        prev = cur
        if diff <= quad.tol:
            break
    return QuadResult(prev, diff)


def integrate(fn: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    """Integral of ``fn`` over [a, b]; ``fn`` maps nodes (n,) to values (..., n)."""
    if not b > a:
        return QuadResult(np.asarray(0.0), 0.0)
    n0 = max(2, math.ceil((b - a) / quad.panel_width))

    def est(n: int) -> np.ndarray:
        v, w = gauss_panels(a, b, n, quad.order)
        return np.sum(fn(v) * w, axis=-1)

    return _converge(est, n0, quad)


def pv_sinh(phi: Callable[[np.ndarray, np.ndarray], np.ndarray], centers, scale: float,
            window: tuple[float, float], quad: QuadratureSpec = DEFAULT_QUAD) -> QuadResult:
    """PV int_window phi(v, c) / sinh(scale (v - c)) dv for every center ``c``.

    ``phi(v, c)`` receives ``v`` of shape (m, n) and ``c`` of shape (m, 1) and
    must return (..., m, n).  It must be defined (typically zero) slightly
    beyond the window, since the fold samples ``c +- w`` symmetrically.
    """
    c = np.atleast_1d(np.asarray(centers, dtype=float))
    a, b = float(window[0]), float(window[1])
    d = quad.fold_halfwidth
    cc = c[:, None]
    left_hi = np.clip(c - d, a, b)
    right_lo = np.clip(c + d, a, b)
    span = max(b - a, d)
    n_side0 = max(2, math.ceil(span / quad.panel_width))
    n_fold0 = max(2, math.ceil(d / quad.panel_width))

    def est(k: int) -> np.ndarray:
        n_side, n_fold = n_side0 * k, n_fold0 * k
        total = 0.0
        for lo, hi in ((np.full_like(c, a), left_hi), (right_lo, np.full_like(c, b))):
            v, w = gauss_panels(lo, hi, n_side, quad.order)
            total = total + np.sum(phi(v, cc) * w / np.sinh(scale * (v - cc)), axis=-1)
        wv, ww = gauss_panels(0.0, d, n_fold, quad.order)
        wv = np.broadcast_to(wv, (c.size, wv.size))
        num = phi(cc + wv, cc) - phi(cc - wv, cc)
        total = total + np.sum(num * ww / np.sinh(scale * wv), axis=-1)
        return total

    prev = est(1)
    k = 1
    diff = math.inf
    for _ in range(quad.max_doublings):
        k *= 2
        cur = est(k)
        diff = _mixed_diff(cur, prev)
        prev = cur
        if diff <= quad.tol:
            break
    return QuadResult(prev, diff)


def pv_sinh_nodal(phi: Callable[[np.ndarray], np.ndarray], centers, scale: float,
                  window: tuple[float, float], quad: QuadratureSpec = DEFAULT_QUAD,
                  reach: float = 8.0) -> QuadResult:
    """PV int phi(r) / sinh(scale (r - c)) dr for a ``phi`` that does not depend on ``c``.

    ``phi`` is sampled once on a fixed GL grid covering the window and every
    ``c +- reach``; the singularity is removed by subtracting
    ``phi(c) exp(-(r - c)^2/2)``, whose PV integral vanishes by oddness.  The
    residual compares two grid resolutions.
    """
    c = np.atleast_1d(np.asarray(centers, dtype=float))
    lo = min(float(window[0]), float(c.min()) - reach)
    hi = max(float(window[1]), float(c.max()) + reach)
    phi_c = phi(c)

    def est(pw: float) -> np.ndarray:
        n = max(2, math.ceil((hi - lo) / pw))
        # shift the panels off any center that would land on a node
        for frac in (0.0, 0.37, 0.61, 0.83):
            a = lo - frac * pw
            r, w = gauss_panels(a, a + (n + 1) * pw, n + 1, quad.order)
            gap = np.abs(np.searchsorted(r, c).clip(1, r.size - 1))
            if np.min(np.minimum(np.abs(r[gap] - c), np.abs(r[gap - 1] - c))) > 1e-6:
                break
        else:
            raise PrecisionError("quadrature nodes collide with evaluation points")
        pr = phi(r)
        out = np.empty(c.shape, dtype=complex)
        for k in range(0, c.size, 256):
            d = r[None, :] - c[k:k + 256, None]
            num = pr[None, :] - phi_c[k:k + 256, None] * np.exp(-0.5 * d * d)
            out[k:k + 256] = (num / np.sinh(scale * d)) @ w
        return out

    coarse = est(quad.panel_width)
    fine = est(0.5 * quad.panel_width)
    return QuadResult(fine, _mixed_diff(fine, coarse))


class Smoothness(str, enum.Enum):
    SCHWARTZ = "schwartz"
    L2 = "l2"


def _zero_outside(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, values, 0.0)


@dataclass(frozen=True)
class TestFunction1D:
    """Complex test function on [-ell, ell].

    ``func`` (and ``deriv`` if known) act on positions ``x``.  Functions that are
    naturally written in the modular coordinate may also provide ``u_func``
    (``u -> f(X(u))``) and ``u_deriv`` (``u -> d/du f(X(u))``), which are then
    used for all evaluations; they stay accurate arbitrarily close to the
    endpoints.  ``support`` is a closed x-interval outside which ``f`` vanishes
    and ``u_window`` the corresponding modular window outside which it is
    negligible.
    """

    __test__ = False  # not a pytest test class

    func: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray] | None = None
    samples: np.ndarray | None = None
    smoothness: Smoothness = Smoothness.SCHWARTZ
    support: tuple[float, float] | None = None
    u_func: Callable[[np.ndarray], np.ndarray] | None = None
    u_deriv: Callable[[np.ndarray], np.ndarray] | None = None
    u_window: tuple[float, float] | None = None
    fd_step: float | None = field(default=None, compare=False)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        val = np.asarray(self.func(x), dtype=complex)
        if self.support is not None:
            val = _zero_outside(val, (x >= self.support[0]) & (x <= self.support[1]))
        return val

    def window(self, geo: Geometry, quad: QuadratureSpec = DEFAULT_QUAD) -> tuple[float, float]:
        """Modular interval carrying the function (truncated at the quadrature cutoff)."""
        if self.u_window is not None:
            lo, hi = self.u_window
        elif self.support is not None:
            lo, hi = (float(v) for v in omega(1, np.asarray(self.support), geo))
        else:
            lo, hi = -math.inf, math.inf
        cut = quad.omega_cutoff
        return max(lo, -cut), min(hi, cut)

    def at_u(self, u, geo: Geometry) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.u_func is not None:
            return np.asarray(self.u_func(u), dtype=complex)
        x = position(u, geo)
        val = np.asarray(self.func(x), dtype=complex)
        if self.support is not None:
            lo, hi = omega(1, np.asarray(self.support), geo)
            val = _zero_outside(val, (u >= lo) & (u <= hi))
        return val

    def derivative(self, x, geo: Geometry) -> np.ndarray:
        """f'(x): analytic when available, else 4th-order central differences."""
        x = np.asarray(x, dtype=float)
        if self.deriv is not None:
            val = np.asarray(self.deriv(x), dtype=complex)
            if self.support is not None:
                val = _zero_outside(val, (x >= self.support[0]) & (x <= self.support[1]))
            return val
        if self.u_deriv is not None:
            u = omega(1, x, geo)
            with np.errstate(invalid="ignore", divide="ignore"):
                out = self.u_deriv(u) / jacobian(u, geo)
            return np.where(np.isfinite(u), out, 0.0)
        if self.smoothness is Smoothness.L2:
            raise PrecisionError("derivative requested for an L2-only test function")
        h = self.fd_step if self.fd_step is not None else 2.0 * geo.ell * 1e-4

        def f(z):
            return self(np.clip(z, -geo.ell, geo.ell))

        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)

    def du(self, u, geo: Geometry) -> np.ndarray:
        """d/du f(X(u))."""
        u = np.asarray(u, dtype=float)
        if self.u_deriv is not None:
            return np.asarray(self.u_deriv(u), dtype=complex)
        return self.derivative(position(u, geo), geo) * jacobian(u, geo)

    def l2_norm(self, geo: Geometry, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
        lo, hi = self.window(geo, quad)
        res = integrate(lambda v: np.abs(self.at_u(v, geo)) ** 2 * jacobian(v, geo), lo, hi, quad)
        return float(np.sqrt(np.real(res.value)))

    @classmethod
    def from_samples(cls, samples, geo: Geometry, smoothness: Smoothness = Smoothness.L2) -> "TestFunction1D":
        """Cubic-spline interpolant of values on the midpoint grid of [-ell, ell]."""
        from scipy.interpolate import CubicSpline

        s = np.asarray(samples, dtype=complex)
        n = s.size
        nodes = -geo.ell + (np.arange(n) + 0.5) * (2 * geo.ell / n)
        spl_re, spl_im = CubicSpline(nodes, s.real), CubicSpline(nodes, s.imag)

        def func(x):
            return spl_re(x) + 1j * spl_im(x)

        def deriv(x):
            return spl_re(x, 1) + 1j * spl_im(x, 1)

        return cls(func, deriv, samples=s, smoothness=smoothness)


# --------------------------------------------------------------------------
# structured kernels


@dataclass(frozen=True)
class InvSinDiff:
    """Singular factor 1/sin(pi (x - y) / L)."""


@dataclass(frozen=True)
class InvSinhOmegaDiff:
    """Singular factor 1/sinh(scale * (shift - Omega_a(x) + Omega_b(y)))."""

    a: int
    b: int
    scale: float
    shift: float = 0.0


@dataclass(frozen=True)
class PVPart:
    prefactor: Callable[[np.ndarray, np.ndarray], np.ndarray]
    singularity: InvSinDiff | InvSinhOmegaDiff


@dataclass(frozen=True)
class DeltaPrime:
    """Coefficient c(x, y) of delta'(x - y), given on the diagonal.

    ``value(u)`` is c(x, x) and ``dy(u)`` is the partial derivative in y at y = x.
    Smearing uses int delta'(x-y) phi(y) dy = phi'(x) with phi = c(x, .) f.
    """

    value: Callable[[np.ndarray], np.ndarray]
    dy: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SingularKernel1D:
    """One (a, b) entry of a distributional kernel, all coefficients in modular coordinates."""

    geo: Geometry
    smooth: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    pv: PVPart | None = None
    delta_diag: Callable[[np.ndarray], np.ndarray] | None = None
    delta_prime: DeltaPrime | None = None
    delta_mirror: Callable[[np.ndarray], np.ndarray] | None = None

    def parts(self) -> list[str]:
        names = ("smooth", "pv", "delta_diag", "delta_prime", "delta_mirror")
        return [n for n in names if getattr(self, n) is not None]


def _smear_pv(pv: PVPart, f: TestFunction1D, u: np.ndarray, geo: Geometry, quad: QuadratureSpec) -> QuadResult:
    lo, hi = f.window(geo, quad)
    sing = pv.singularity
    if isinstance(sing, InvSinDiff):
        # dy / sin(pi (x-y)/L) = -(L/(2 pi)) sqrt(s_y/s_x) dv / sinh((v-u)/2)
        def phi(v, c):
            ratio = np.sqrt(jacobian(v, geo) / jacobian(c, geo))
            return -(geo.L / (2 * np.pi)) * ratio * pv.prefactor(c, v) * f.at_u(v, geo)

        # jacobian = L s / (pi sin theta), hence sqrt(s_y/s_x) = sqrt(jac_v/jac_u)
        return pv_sinh(phi, u, 0.5, (lo, hi), quad)
    # 1/sinh(k (shift - Omega_a(x) + Omega_b(y))) with r = Omega_b(y) = sign_b * v
    sa = 1 if sing.a == 1 else -1
    sb = 1 if sing.b == 1 else -1
    centers = sa * u - sing.shift
    rlo, rhi = sorted((sb * lo, sb * hi))

    def phi_r(r, c):
        v = sb * r
        # recover u from the center: c = sa*u - shift
        uu = sa * (c + sing.shift)
        return pv.prefactor(uu, v) * f.at_u(v, geo) * jacobian(v, geo)

    return pv_sinh(phi_r, centers, sing.scale, (rlo, rhi), quad)


def smear(kernel: SingularKernel1D, f: TestFunction1D, x=None, quad: QuadratureSpec = DEFAULT_QUAD,
          *, u=None) -> QuadResult:
    """Apply one kernel entry to ``f``: returns int K(x, y) f(y) dy at the given points.

    Points are given either as positions ``x`` or modular coordinates ``u``.
    """
    geo = kernel.geo
    if u is None:
        if x is None:
            raise ValueError("need evaluation points x or u")
        u = omega(1, np.asarray(x, dtype=float), geo)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if not np.all(np.isfinite(u)):
        raise ValueError("evaluation points must be interior")
    total = np.zeros(u.shape, dtype=complex)
    residual = 0.0
    if kernel.smooth is not None:
        lo, hi = f.window(geo, quad)
        res = integrate(lambda v: kernel.smooth(u[:, None], v[None, :]) * (f.at_u(v, geo) * jacobian(v, geo))[None, :],
                        lo, hi, quad)
        total += res.value
        residual = max(residual, res.residual)
    if kernel.pv is not None:
        res = _smear_pv(kernel.pv, f, u, geo, quad)
        total += res.value
        residual = max(residual, res.residual)
    if kernel.delta_diag is not None:
        total += kernel.delta_diag(u) * f.at_u(u, geo)
    if kernel.delta_prime is not None:
        if f.smoothness is Smoothness.L2 and f.deriv is None and f.u_deriv is None:
            raise PrecisionError("delta' part needs a differentiable test function")
        jac = jacobian(u, geo)
        total += kernel.delta_prime.dy(u) * f.at_u(u, geo) + kernel.delta_prime.value(u) / jac * f.du(u, geo)
    if kernel.delta_mirror is not None:
        total += kernel.delta_mirror(u) * f.at_u(-u, geo)
    return QuadResult(total, residual)


@dataclass(frozen=True)
class CauchyKernel:
    """iε-regularized Cauchy-type kernel ``coefficient * k(x - y - side*i*eps)``.

    ``family`` is ``"cauchy"`` (1/d), ``"inv_sin"`` (1/sin(pi d/L)) or ``"cot"``
    (cot(pi d/L)); ``side=+1`` means the pole is displaced as ``d - i eps``.
    """

    family: str
    coefficient: complex = 1.0
    side: int = 1

    def regularized(self, x, y, eps: float, geo: Geometry) -> np.ndarray:
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float) - self.side * 1j * eps
        if self.family == "cauchy":
            return self.coefficient / d
        arg = np.pi * d / geo.L
        if self.family == "inv_sin":
            return self.coefficient / np.sin(arg)
        if self.family == "cot":
            return self.coefficient / np.tan(arg)
        raise ValueError(f"unsupported kernel family {self.family!r}")


def sokhotski_split(eps_kernel: CauchyKernel, geo: Geometry) -> SingularKernel1D:
    """Split the ε -> 0 limit into principal value plus delta.

    1/(d -+ i eps) -> PV 1/d +- i pi delta(d); for the periodic families the
    delta weight is +- i L.
    """
    fam, c, side = eps_kernel.family, complex(eps_kernel.coefficient), int(eps_kernel.side)
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    k = np.pi / geo.L
    if fam == "cauchy":
        def pre(u, v):
            d = position(u, geo) - position(v, geo)
            arg = k * d
            with np.errstate(invalid="ignore", divide="ignore"):
                sinc = np.where(np.abs(arg) < 1e-300, 1.0, np.sin(arg) / np.where(arg == 0, 1, arg))
            return c * k * sinc
        weight = 1j * np.pi
    elif fam == "inv_sin":
        def pre(u, v):
            return c * np.ones(np.broadcast(u, v).shape)
        weight = 1j * geo.L
    elif fam == "cot":
        def pre(u, v):
            return c * np.cos(k * (position(u, geo) - position(v, geo)))
        weight = 1j * geo.L
    else:
        raise ValueError(f"unsupported kernel family {fam!r}")
    dcoef = side * weight * c
    return SingularKernel1D(geo, pv=PVPart(pre, InvSinDiff()),
                            delta_diag=lambda u: np.full(np.shape(u), dcoef, dtype=complex))


# --------------------------------------------------------------------------
# Lemma on a^{it} Pf 1/sinh(pi t), and the Fourier integral of the flow


def _decay_cutoff(f: Callable[[np.ndarray], np.ndarray], rate: float) -> float:
    t = np.linspace(-40.0, 40.0, 4001)
    vals = np.asarray(f(t), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ValueError("test function must be finite on the real line")
    fmax = max(float(np.max(np.abs(vals))), 1e-300)
    tail = np.abs(vals) * np.exp(-rate * np.abs(t))
    if tail[0] > 1e-10 * fmax or tail[-1] > 1e-10 * fmax:
        raise ValueError("f(t)/sinh violates the integrability condition")
    return max(1.0, (math.log(fmax) + 14 * math.log(10)) / rate)


def lemma_limit_eval(a: float, f: Callable[[np.ndarray], np.ndarray],
                     quad: QuadratureSpec = QuadratureSpec(panel_width=0.25)) -> complex:
    """int a^{it} Pf[1/sinh(pi t)] f(t) dt via the subtracted form.

    Equals int a^{it} (f(t) - f(0)) / sinh(pi t) dt + i f(0) (a - 1)/(a + 1).
    """
    if not a > 0:
        raise ValueError("a must be positive")
    T = _decay_cutoff(f, math.pi)
    f0 = complex(np.asarray(f(np.zeros(1)))[0])
    la = math.log(a)

    def g(t):
        return np.exp(1j * la * t) * (f(t) - f0) / np.sinh(np.pi * t)

    # even panel count keeps t = 0 on a panel boundary, never on a node
    n0 = 2 * max(1, math.ceil(T / quad.panel_width))

    def est(n):
        v, w = gauss_panels(-T, T, n, quad.order)
        return np.sum(g(v) * w)

    res = _converge(est, n0, quad)
    return complex(res.value) + 1j * f0 * (a - 1) / (a + 1)


def lemma_symmetric_exclusion(a: float, f: Callable[[np.ndarray], np.ndarray],
                              quad: QuadratureSpec = QuadratureSpec(panel_width=0.25)) -> complex:
    """Independent route: the symmetric-exclusion definition, folded onto t > 0."""
    if not a > 0:
        raise ValueError("a must be positive")
    T = _decay_cutoff(f, math.pi)
    la = math.log(a)

    def g(t):
        return (np.exp(1j * la * t) * f(t) - np.exp(-1j * la * t) * f(-t)) / np.sinh(np.pi * t)

    res = integrate(g, 0.0, T, quad)
    return complex(res.value)


def _check_c(c: complex) -> complex:
    c = complex(c)
    if not c.real > 0:
        raise ValueError(f"flow_integral needs Re c > 0, got {c}")
    return c


def flow_integral(c: complex, z) -> np.ndarray:
    """Pointwise value (z != 0) of int e^{isz}/(c + e^{2 pi s}) ds = c^{iz/2pi - 1} (-i/2)/sinh(z/2)."""
    c = _check_c(c)
    z = np.asarray(z, dtype=float)
    if np.any(z == 0):
        raise ValueError("pointwise evaluation needs z != 0 (use flow_integral_smeared)")
    return np.exp((1j * z / (2 * np.pi) - 1.0) * np.log(c)) * (-0.5j) / np.sinh(0.5 * z)


def flow_integral_smeared(c: complex, f: Callable[[np.ndarray], np.ndarray],
                          quad: QuadratureSpec = QuadratureSpec(panel_width=0.25)) -> complex:
    """Closed form smeared in z: -(i/2) PV int c^{iz/2pi-1} f/sinh(z/2) dz + pi f(0)/c."""
    c = _check_c(c)
    T = _decay_cutoff(f, 0.5)
    lc = np.log(c)
    f0 = complex(np.asarray(f(np.zeros(1)))[0])

    def phi(v, cc):
        return np.exp((1j * v / (2 * np.pi) - 1.0) * lc) * f(v)

    pv = pv_sinh(phi, np.zeros(1), 0.5, (-T, T), quad)
    return complex(-0.5j * pv.value[0] + np.pi * f0 / c)


def _bracket(s: np.ndarray, c: complex) -> np.ndarray:
    # 1/(c + e^{2 pi s}) minus its s -> -inf limit on s < 0; decays on both sides
    e = np.exp(2 * np.pi * np.minimum(s, 40.0))
    full = 1.0 / (c + e)
    return np.where(s < 0, -e / (c * (c + e)), full)


def flow_integral_reference(c: complex, z, quad: QuadratureSpec = QuadratureSpec(panel_width=0.125)) -> np.ndarray:
    """Direct quadrature of the s-integral (Abel-regularized at s -> -inf)."""
    c = _check_c(c)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    S = 8.0
    out = -1j / (c * z)
    for lo, hi in ((-S, 0.0), (0.0, S)):
        res = integrate(lambda s: _bracket(s, c)[None, :] * np.exp(1j * z[:, None] * s[None, :]), lo, hi, quad)
        out = out + res.value
    return out


def flow_integral_smeared_reference(c: complex, f: Callable[[np.ndarray], np.ndarray], T: float = 30.0,
                                    quad: QuadratureSpec = QuadratureSpec(panel_width=0.125)) -> complex:
    """s-then-z double quadrature of the smeared Fourier integral; f must vanish beyond |z| = T."""
    c = _check_c(c)
    f0 = complex(np.asarray(f(np.zeros(1)))[0])
    # PV int f(z)/z dz by folding
    pv = integrate(lambda w: (f(w) - f(-w)) / w, 0.0, T, quad).value
    zf, wf = gauss_panels(-T, T, math.ceil(2 * T / quad.panel_width), quad.order)
    fz = f(zf)
    S = 8.0
    total = -1j * complex(pv) / c + np.pi * f0 / c
    for lo, hi in ((-S, 0.0), (0.0, S)):
        def g(s):
            fhat = np.exp(1j * s[:, None] * zf[None, :]) @ (fz * wf)
            return _bracket(s, c) * fhat
        total += complex(integrate(g, lo, hi, quad).value)
    return total
