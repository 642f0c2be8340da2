"""Quasi-free ground states: the NS vacuum and the double cone of R states.

An R state is fixed by the zero-mode matrix

    h = (h1 + h2)/2 * 1 + (h1 - h2)/2 * [[cos psi, sin psi e^{i phi}],
                                         [sin psi e^{-i phi}, -cos psi]]

with ``|h_i| <= 1/(2L)``.  Extreme points of this double cone are pure: the
two tips ``h1 = h2 = +-1/(2L)`` and the rim ``h1 = -h2 = +-1/(2L)``.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

import numpy as np

from .geometry import Geometry

__all__ = [
    "BoundaryCondition",
    "HMatrix",
    "InvalidStateError",
    "PRESETS",
    "StateClass",
    "StateConstraintError",
    "StateParams",
    "build_h",
    "classify",
    "g_covariance",
    "mixing_matrices",
    "phase_bases",
    "preset",
]

TAU_CLASS = 1e-12


class InvalidStateError(ValueError):
    """Operation not defined for this kind of state (e.g. zero modes of NS)."""


class StateConstraintError(ValueError):
    """Zero-mode parameters outside the double cone."""


class BoundaryCondition(str, enum.Enum):
    NS = "NS"
    R = "R"


class StateClass(enum.Enum):
    MIXED = "mixed"
    PURE_TIP_PLUS = "tip-plus"
    PURE_TIP_MINUS = "tip-minus"
    PURE_RIM = "rim"


@dataclass(frozen=True)
class StateParams:
    """Boundary condition plus, for R, the zero-mode eigenvalues and angles.

    For ``h1 == h2`` the angles are pure gauge and are canonicalized to 0.
    """

    bc: BoundaryCondition
    h1: float | None = None
    h2: float | None = None
    psi: float | None = None
    phi: float | None = None

    def __post_init__(self) -> None:
        bc = BoundaryCondition(self.bc)
        object.__setattr__(self, "bc", bc)
        fields = (self.h1, self.h2, self.psi, self.phi)
        if bc is BoundaryCondition.NS:
            if any(v is not None for v in fields):
                raise InvalidStateError("NS state carries no zero-mode parameters")
            return
        h1, h2 = self.h1, self.h2
        if h1 is None or h2 is None:
            raise InvalidStateError("R state needs h1 and h2")
        psi = 0.0 if self.psi is None else float(self.psi)
        phi = 0.0 if self.phi is None else float(self.phi)
        for name, v in (("h1", h1), ("h2", h2), ("psi", psi), ("phi", phi)):
            if not math.isfinite(float(v)):
                raise StateConstraintError(f"{name} must be finite, got {v!r}")
        if not 0.0 <= psi <= math.pi:
            raise StateConstraintError(f"psi must lie in [0, pi], got {psi}")
        phi = math.fmod(phi, 2 * math.pi)
        if phi < 0:
            phi += 2 * math.pi
        if float(h1) == float(h2):
            psi = phi = 0.0
        object.__setattr__(self, "h1", float(h1))
        object.__setattr__(self, "h2", float(h2))
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def ns(cls) -> "StateParams":
        return cls(BoundaryCondition.NS)

    @classmethod
    def ramond(cls, h1: float, h2: float, psi: float = 0.0, phi: float = 0.0) -> "StateParams":
        return cls(BoundaryCondition.R, h1, h2, psi, phi)

    @property
    def is_ns(self) -> bool:
        return self.bc is BoundaryCondition.NS

    def validate(self, geo: Geometry) -> "StateParams":
        """Check the cone constraint |h_i| <= 1/(2L); returns self."""
        if self.is_ns:
            return self
        bound = 1.0 / (2.0 * geo.L)
        for name, v in (("h1", self.h1), ("h2", self.h2)):
            if abs(v) > bound * (1 + TAU_CLASS):
                raise StateConstraintError(f"|{name}| = {abs(v):.6g} exceeds 1/(2L) = {bound:.6g}")
        return self

    def to_dict(self) -> dict:
        if self.is_ns:
            return {"bc": "NS"}
        return {"bc": "R", "h1": self.h1, "h2": self.h2, "psi": self.psi, "phi": self.phi}


@dataclass(frozen=True)
class HMatrix:
    """Hermitian 2x2 zero-mode matrix (units 1/length)."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("h must be 2x2")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def alpha(self) -> float:
        """Trace part tr(h)/2."""
        return float(np.real(np.trace(self.entries)) / 2)

    @property
    def beta(self) -> float:
        """Norm of the Pauli vector of h."""
        m = self.entries
        return float(np.sqrt(abs(m[0, 1]) ** 2 + (np.real(m[0, 0] - m[1, 1]) / 2) ** 2))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


def _require_r(params: StateParams, what: str) -> None:
    if params.is_ns:
        raise InvalidStateError(f"{what} is undefined for the NS state (no zero mode)")


def mixing_matrices(psi: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """The chirality-mixing matrices multiplying the h1 and h2 phase factors."""
    c, s, e = math.cos(psi), math.sin(psi), complex(math.cos(phi), math.sin(phi))
    m1 = np.array([[1 + c, s * e], [s * e.conjugate(), 1 - c]])
    m2 = np.array([[1 - c, -s * e], [-s * e.conjugate(), 1 + c]])
    return m1, m2


def build_h(params: StateParams, geo: Geometry) -> HMatrix:
    """Assemble h from (h1, h2, psi, phi)."""
    _require_r(params, "h")
    params.validate(geo)
    m1, m2 = mixing_matrices(params.psi, params.phi)
    # (M1 - M2)/2 is the traceless direction, (M1 + M2)/2 the identity
    h = 0.5 * (params.h1 * m1 + params.h2 * m2)
    return HMatrix(h)


def g_covariance(params: StateParams, geo: Geometry) -> np.ndarray:
    """Zero-mode covariance g = h + 1/(2L)."""
    return build_h(params, geo).entries + np.eye(2) / (2.0 * geo.L)


def classify(params: StateParams, geo: Geometry) -> StateClass:
    """Mixed, tip or rim, with tolerance 1e-12 * 1/(2L) on the cone boundary."""
    _require_r(params, "classification")
    params.validate(geo)
    bound = 1.0 / (2.0 * geo.L)
    tol = TAU_CLASS * bound

    def near(a: float, b: float) -> bool:
        return abs(a - b) <= tol

    h1, h2 = params.h1, params.h2
    if not (near(abs(h1), bound) and near(abs(h2), bound)):
        return StateClass.MIXED
    if near(h1, h2):
        return StateClass.PURE_TIP_PLUS if h1 > 0 else StateClass.PURE_TIP_MINUS
    return StateClass.PURE_RIM


def phase_bases(params: StateParams, geo: Geometry) -> tuple[float, float]:
    """p_i = (1 + 2 L h_i)/(1 - 2 L h_i); +inf / 0 on the cone boundary."""
    _require_r(params, "phase bases")
    out = []
    for h in (params.h1, params.h2):
        num, den = 1 + 2 * geo.L * h, 1 - 2 * geo.L * h
        out.append(math.inf if den <= 0 else num / den)
    return out[0], out[1]


PRESETS = ("ns-vacuum", "zero-temperature", "massive-vacuum", "tip-plus", "tip-minus", "rim(psi,phi)")

_RIM = re.compile(r"^rim\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)$")


def _angle(text: str) -> float:
    # accepts plain floats and simple multiples of pi such as "pi/2" or "0.5*pi"
    t = text.replace(" ", "").lower()
    m = re.fullmatch(r"([-+]?[0-9.eE+-]*)\*?pi(?:/([0-9.]+))?", t)
    if m:
        coef = m.group(1)
        c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        return c * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
    return float(t)


def preset(name: str, geo: Geometry) -> StateParams:
    """Named states: ns-vacuum, zero-temperature, massive-vacuum, tip-plus, tip-minus, rim(psi,phi)."""
    b = 1.0 / (2.0 * geo.L)
    key = name.strip().lower()
    if key == "ns-vacuum":
        return StateParams.ns()
    if key == "zero-temperature":
        return StateParams.ramond(0.0, 0.0)
    if key == "massive-vacuum":
        return StateParams.ramond(-b, b, math.pi / 2, math.pi / 2)
    if key == "tip-plus":
        return StateParams.ramond(b, b)
    if key == "tip-minus":
        return StateParams.ramond(-b, -b)
    m = _RIM.match(key)
    if m:
        try:
            psi, phi = _angle(m.group(1)), _angle(m.group(2))
        except ValueError as exc:
            raise StateConstraintError(f"cannot parse rim angles in {name!r}") from exc
        return StateParams.ramond(b, -b, psi, phi)
    raise InvalidStateError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
