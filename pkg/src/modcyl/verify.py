"""Acceptance checks at the desk configuration L = 4, ell = 1.

Each check returns a :class:`CriterionResult`; the CLI ``verify`` verb and the
test suite share these functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .correlators import TestSpinor, apply_G, grid, two_point
from .distributions import flow_integral, flow_integral_reference, lemma_limit_eval
from .geometry import Geometry, flow_trajectory, omega, sinh_omega_identity
from .modular import (
    PureKind,
    flow_apply,
    generator_check,
    group_law_check,
    hamiltonian_apply,
    hamiltonian_kernel,
    pure_limit_kernel,
)
from .oracle import compare_sweep
from .probes import bump, standard_probes, zero
from .resolvent import resolvent_apply, resolvent_identity_residual, rho_k_boundary, spectral_integral
from .states import StateClass, StateParams, classify

__all__ = ["CRITERIA", "STATE_CRITERIA", "CriterionResult", "Desk", "desk", "run_acceptance", "state_desk",
           "verify_state"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.number:2d}] {self.title}: {self.summary}"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "summary": self.summary, "details": self.details}


@dataclass(frozen=True)
class Desk:
    geo: Geometry
    probes: list
    Ns: tuple = (128, 256, 512, 1024)
    times: tuple = (0.1, 0.4, 1.0)
    states: dict | None = None

    @property
    def bound(self) -> float:
        return 1.0 / (2 * self.geo.L)

    @property
    def N_check(self) -> int:
        """Resolution at which the oracle error threshold applies."""
        return 512 if 512 in self.Ns else max(self.Ns)

    def regimes(self) -> dict:
        if self.states is not None:
            return dict(self.states)
        b = self.bound
        return {
            "NS": StateParams.ns(),
            "R h=0": StateParams.ramond(0.0, 0.0),
            "R mixed": StateParams.ramond(0.2 * b, -0.5 * b, 1.0, 0.7),
            "R near-tip": StateParams.ramond((1 - 1e-2) * b, (1 - 1e-2) * b),
        }


def desk(L: float = 4.0, ell: float = 1.0, Ns=(128, 256, 512, 1024)) -> Desk:
    geo = Geometry(L, ell)
    return Desk(geo, standard_probes(geo), tuple(Ns))


def state_desk(state: StateParams, geo: Geometry, N: int, times, probes, label: str = "state") -> Desk:
    """Checks for one configured state: N-sweep (N/4, N/2, N), the given flow times and probes.

    The oracle error threshold is defined at N = 512, so 512 joins the sweep
    whenever the configured N is smaller.
    """
    Ns = {max(16, N // 4 - (N // 4) % 2), max(16, N // 2 - (N // 2) % 2), N}
    if N < 512:
        Ns.add(512)
    Ns = tuple(sorted(Ns))
    return Desk(geo, list(probes), Ns, tuple(float(t) for t in times), {label: state})


def _rel_norm(values: np.ndarray, w: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.abs(values) ** 2 * w)))


# --------------------------------------------------------------------------


def resolvent_identity(d: Desk) -> CriterionResult:
    f = d.probes[2]
    worst, det = 0.0, {}
    for name, st in d.regimes().items():
        for mu in (2.0, -1.0, 0.5 + 0.3j):
            r, n = resolvent_identity_residual(mu, f, st, d.geo)
            det[f"{name} mu={mu}"] = r / n
            worst = max(worst, r / n)
    return CriterionResult(1, "resolvent identity", worst <= 1e-6, f"max ||(G-mu)R f - f||/||f|| = {worst:.2e} (<= 1e-6)", det)


def neumann(d: Desk) -> CriterionResult:
    f, mu = d.probes[2], 100.0
    lo, hi = f.window(d.geo)
    u, w = grid(d.geo, lo - 15, hi + 15, 0.5)
    worst, det = 0.0, {}
    for name, st in d.regimes().items():
        R = resolvent_apply(mu, f, st, d.geo, u, weights=w)
        G = apply_G(f, st, d.geo, u, weights=w)
        fv = f.at_u(u, d.geo)
        res = _rel_norm(R.values + fv / mu + G.values / mu**2, w)
        ratio = res * mu**3 / _rel_norm(fv, w)
        det[name] = ratio
        worst = max(worst, ratio)
    return CriterionResult(2, "Neumann consistency", worst <= 5.0, f"max ||R f + f/mu + G f/mu^2|| mu^3/||f|| = {worst:.3f} (<= 5)", det)


def spectral_mass(d: Desk) -> CriterionResult:
    f, g = d.probes[2], d.probes[0]
    lo = min(f.window(d.geo)[0], g.window(d.geo)[0])
    hi = max(f.window(d.geo)[1], g.window(d.geo)[1])
    u, w = grid(d.geo, lo, hi)
    gf = complex(np.sum(np.conj(g.at_u(u, d.geo)) * f.at_u(u, d.geo) * w))
    worst, det = 0.0, {}
    for name, st in d.regimes().items():
        mass = spectral_integral(f, g, st, d.geo)
        moment = spectral_integral(f, g, st, d.geo, weight=lambda m: m)
        e1, e2 = abs(mass - gf), abs(moment - two_point(f, g, st, d.geo))
        det[name] = {"mass": e1, "moment": e2}
        worst = max(worst, e1, e2)
    return CriterionResult(3, "spectral mass and moment", worst <= 1e-5, f"max deviation {worst:.2e} (<= 1e-5)", det)


def _sweeps(d: Desk) -> dict:
    f = d.probes[2]
    return {name: compare_sweep(f, st, d.geo, d.Ns, (None,) + tuple(d.times)) for name, st in d.regimes().items()}


def _oracle_verdict(reports: dict, number: int, title: str, n_check: int, extra_ok: bool = True,
                    extra: str = "", extra_det: dict | None = None) -> CriterionResult:
    det, ok_err, ok_order, msgs = {}, True, True, []
    for key, rep in reports.items():
        det[key] = rep.to_dict()
        ok_err &= rep.error_at(n_check) <= 1e-3
        if not (math.isfinite(rep.order) and rep.order >= 1.0):
            ok_order = False
            why = "unmeasurable: errors sit at the lam_min clip floor" if rep.floor_limited else f"order {rep.order:.2f}"
            msgs.append(f"{key} ({why})")
    worst = max(rep.error_at(n_check) for rep in reports.values())
    summary = f"max error at N={n_check} {worst:.2e} (<= 1e-3)"
    summary += "; order >= 1 in every regime" if ok_order else "; order < 1 or unmeasurable for " + ", ".join(msgs)
    if extra:
        summary += "; " + extra
    if extra_det:
        det.update(extra_det)
    return CriterionResult(number, title, bool(ok_err and ok_order and extra_ok), summary, det)


def oracle_hamiltonian(d: Desk, sweeps: dict | None = None) -> CriterionResult:
    sweeps = sweeps or _sweeps(d)
    return _oracle_verdict({name: s[None] for name, s in sweeps.items()}, 4, "oracle Hamiltonian", d.N_check)


def oracle_flow(d: Desk, sweeps: dict | None = None) -> CriterionResult:
    if sweeps is None or any(t not in s for s in sweeps.values() for t in d.times):
        sweeps = _sweeps(d)
    reports = {f"{name} t={t}": s[t] for name, s in sweeps.items() for t in d.times}
    f, g = d.probes[2], d.probes[0]
    unit, group = 0.0, 0.0
    det = {}
    for name, st in d.regimes().items():
        for t in d.times:
            a = flow_apply(t, f, st, d.geo)
            b = flow_apply(t, g, st, d.geo, a.u, weights=a.weights)
            fs, gs = f.sample(d.geo, a.u), g.sample(d.geo, a.u)
            fg = complex(np.sum(np.conj(fs.values) * gs.values * a.weights))
            unit = max(unit, abs(a.inner(b) - fg) / (f.l2_norm(d.geo) * g.l2_norm(d.geo)))
        for t1, t2 in zip(d.times, d.times[1:]):
            r, n = group_law_check(t1, t2, f, st, d.geo)
            det[f"group {name} ({t1},{t2})"] = r / n
            group = max(group, r / n)
    extra = f"unitarity {unit:.1e} (<= 1e-6), group law {group:.1e} ||f|| (<= 1e-3)"
    return _oracle_verdict(reports, 5, "oracle flow", d.N_check, unit <= 1e-6 and group <= 1e-3, extra, det)


def generator(d: Desk) -> CriterionResult:
    f = d.probes[2]
    det, ok = {}, True
    for name, st in d.regimes().items():
        rep = generator_check(f, st, d.geo, (1e-2, 5e-3, 2.5e-3))
        det[name] = rep.slope
        ok &= abs(rep.slope - 1.0) <= 0.2
    lo = min(det.values())
    hi = max(det.values())
    return CriterionResult(6, "generator", bool(ok), f"fitted slopes in [{lo:.3f}, {hi:.3f}] (1.0 +- 0.2)", det)


def lemma(d: Desk) -> CriterionResult:
    def f(t):
        return np.exp(-((np.asarray(t) - 0.3) ** 2) / 2) * (1 + 0.5j * np.asarray(t))

    f0 = abs(complex(f(np.zeros(1))[0]))
    det, ok = {}, True
    for label, seq in (("a->0", (1e-1, 1e-2, 1e-3, 1e-4)), ("a->inf", (1e1, 1e2, 1e3, 1e4))):
        errs = [abs(lemma_limit_eval(a, f) - 1j * complex(f(np.zeros(1))[0]) * (a - 1) / (a + 1)) for a in seq]
        mono = all(x > y for x, y in zip(errs, errs[1:]))
        det[label] = errs
        ok &= mono and errs[-1] <= 1e-3 * f0
    return CriterionResult(7, "endpoint limit lemma", bool(ok),
                           f"last errors {det['a->0'][-1]:.1e}, {det['a->inf'][-1]:.1e} (monotone, <= 1e-3 |f(0)|)", det)


def pure_limits(d: Desk) -> CriterionResult:
    geo, b = d.geo, d.bound
    f = d.probes[2]
    u, w = grid(geo, -14.0, 14.0, 0.5)
    det, ok = {}, True
    cases = ((PureKind.TIP_PLUS, (1, 1), 0.0, 0.0), (PureKind.TIP_MINUS, (-1, -1), 0.0, 0.0),
             (PureKind.RIM_PLUS, (1, -1), 1.0, 0.7))
    for kind, (s1, s2), psi, phi in cases:
        ref, _ = pure_limit_kernel(kind, psi, phi, geo).hamiltonian.apply(f, u)
        diffs = []
        for eta in (1e-2, 1e-3):
            st = StateParams.ramond(s1 * (1 - eta) * b, s2 * (1 - eta) * b, psi, phi)
            diffs.append(_rel_norm(hamiltonian_apply(f, st, geo, u).values - ref, w))
        det[kind.value] = diffs
        ok &= diffs[1] < diffs[0]
    rim = pure_limit_kernel(PureKind.RIM_PLUS, math.pi / 2, 0.0, geo)
    bp = bump(geo, 0.4, 0.6)
    x = np.linspace(-0.9, 0.9, 3601)
    vals, resid = rim.hamiltonian.apply(TestSpinor(bp, bp), omega(1, x, geo))
    mass = float(np.sum(np.abs(vals[:, np.abs(x + 0.5) <= 0.1]) ** 2) * (x[1] - x[0]))
    noise = max(resid, np.finfo(float).eps * float(np.max(np.abs(vals))), float(np.max(np.abs(vals[:, np.abs(x) <= 0.3]))))
    noise_mass = noise**2 * 0.2
    det["mirror mass"], det["noise mass"] = mass, noise_mass
    ok &= mass > 100 * noise_mass
    return CriterionResult(8, "pure-state limits", bool(ok),
                           f"differences decrease with eta; mirror mass {mass:.2e} vs noise {noise_mass:.1e}", det)


def _expects_local(st: StateParams, geo: Geometry) -> bool:
    if st.is_ns:
        return True
    return classify(st, geo) in (StateClass.PURE_TIP_PLUS, StateClass.PURE_TIP_MINUS)


def locality(d: Desk, N: int = 512) -> CriterionResult:
    """Bump in chirality 1 on [0.2, 0.4]: local states keep it inside the transported window."""
    geo = d.geo
    dx = 2 * geo.ell / N
    f = TestSpinor(bump(geo, 0.2 * geo.ell, 0.4 * geo.ell), zero())
    u, w = grid(geo, -25.0, 25.0, 0.25)
    regimes = d.regimes()
    if d.states is None:
        regimes = {k: regimes[k] for k in ("NS", "R mixed")}
    det, ok, msgs = {}, True, []
    for name, st in regimes.items():
        fr = []
        for t in d.times:
            r = flow_apply(t, f, st, geo, u, weights=w)
            lo = float(flow_trajectory(0.2 * geo.ell, t, geo)) - 3 * dx
            hi = float(flow_trajectory(0.4 * geo.ell, t, geo)) + 3 * dx
            out = (r.x < lo) | (r.x > hi)
            tot = np.sum(np.abs(r.values) ** 2 * w)
            fr.append(float(np.sum(np.abs(r.values[:, out]) ** 2 * w[out]) / tot))
        det[name] = fr
        if _expects_local(st, geo):
            ok &= max(fr) <= 1e-6
            msgs.append(f"{name} outside mass {max(fr):.1e} (<= 1e-6)")
        else:
            ok &= min(fr) >= 1e-3
            msgs.append(f"{name} outside mass {min(fr):.1e} (>= 1e-3)")
    return CriterionResult(9, "locality dichotomy", bool(ok), "; ".join(msgs), det)


def identities(d: Desk) -> CriterionResult:
    geo = d.geo
    rng = np.random.default_rng(20240601)
    xs = rng.uniform(-0.999, 0.999, size=(1000, 2)) * geo.ell
    xs = xs[xs[:, 0] != xs[:, 1]]
    lhs, rhs = sinh_omega_identity(xs[:, 0], xs[:, 1], geo)
    e1 = float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))
    z = np.array([-7.0, -2.5, -0.4, 0.3, 1.7, 6.0])
    e2 = 0.0
    for c in (0.5, 1.0, 3.0, 2.0 * np.exp(0.4j)):
        a, b = flow_integral(c, z), flow_integral_reference(c, z)
        e2 = max(e2, float(np.max(np.abs(a - b))))
    x = np.linspace(-0.99, 0.99, 199) * geo.ell
    e3 = 0.0
    from .resolvent import rho_k

    # boundary limit by Richardson extrapolation in the offset eta = h d, d = distance to the endpoint
    d_end = geo.ell - np.abs(x)
    for side in (1, -1):
        r1, r2, r4 = (rho_k(x + side * 1j * k * 1e-5 * d_end, geo) for k in (1, 2, 4))
        bv = (8 * r1 - 6 * r2 + r4) / 3
        ref = rho_k_boundary(x, side, geo)
        e3 = max(e3, float(np.max(np.abs(bv - ref))))
        e3 = max(e3, float(np.max(np.abs(ref - (-1j / (2 * np.pi) * omega(1, x, geo) - side * 0.5)))))
    ok = e1 <= 1e-12 and e2 <= 1e-8 and e3 <= 1e-12
    return CriterionResult(10, "identity self-tests", ok, f"sinh {e1:.1e}, flow integral {e2:.1e}, rho_k {e3:.1e}",
                           {"sinh": e1, "flow_integral": e2, "rho_k": e3})


def flat_limit(d: Desk) -> CriterionResult:
    ell = d.geo.ell
    x = np.linspace(-0.9, 0.9, 19) * ell
    errs = []
    for L in (10 * ell, 100 * ell, 1000 * ell):
        geo = Geometry(L, ell)
        k = hamiltonian_kernel(StateParams.ns(), geo).entries[(1, 1)]
        coef = (k.delta_prime.value(omega(1, x, geo)) / 1j).real
        errs.append(float(np.max(np.abs(coef - np.pi * (ell**2 - x**2) / ell))))
    slopes = [math.log(errs[i] / errs[i + 1]) / math.log(10) for i in range(2)]
    ok = all(abs(s - 2.0) <= 0.2 for s in slopes)
    return CriterionResult(11, "flat-space limit", ok,
                           f"errors {errs[0]:.1e}, {errs[1]:.1e}, {errs[2]:.1e}; order in 1/L {slopes[0]:.2f}, {slopes[1]:.2f} (O(1/L^2))",
                           {"errors": errs, "orders": slopes})


CRITERIA: dict[int, Callable] = {
    1: resolvent_identity,
    2: neumann,
    3: spectral_mass,
    4: oracle_hamiltonian,
    5: oracle_flow,
    6: generator,
    7: lemma,
    8: pure_limits,
    9: locality,
    10: identities,
    11: flat_limit,
}


# checks that depend on the state; the rest are state-independent identities
STATE_CRITERIA = (1, 2, 3, 4, 5, 6, 9)


def _run_one(n: int, d: Desk, sweeps: dict | None) -> CriterionResult:
    try:
        if n in (4, 5):
            return CRITERIA[n](d, sweeps)
        return CRITERIA[n](d)
    except (ArithmeticError, ValueError) as exc:
        fn = CRITERIA[n]
        return CriterionResult(n, fn.__name__.replace("_", " "), False, f"raised {type(exc).__name__}: {exc}")


def run_acceptance(which=None, d: Desk | None = None) -> list[CriterionResult]:
    d = d or desk()
    which = sorted(CRITERIA) if which is None else sorted(set(int(n) for n in which))
    for n in which:
        if n not in CRITERIA:
            raise ValueError(f"unknown criterion {n}; valid: 1..{len(CRITERIA)}")
    sweeps = _sweeps(d) if any(n in (4, 5) for n in which) else None
    return [_run_one(n, d, sweeps) for n in which]


def verify_state(state: StateParams, geo: Geometry, N: int, times, probes) -> list[CriterionResult]:
    """State-dependent checks for one configured state.

    The closed-form spectral density is skipped for pure states, where
    g(mu) is a ratio of two vanishing terms at large |s|.
    """
    d = state_desk(state, geo, N, times, probes)
    which = list(STATE_CRITERIA)
    if not state.is_ns and classify(state, geo) is not StateClass.MIXED:
        which.remove(3)
    return run_acceptance(which, d)
