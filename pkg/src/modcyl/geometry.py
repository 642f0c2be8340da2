"""Cylinder and interval geometry.

The spatial circle has circumference ``L`` and the region of interest is the
interval ``[-ell, ell]`` with ``2*ell < L``.  Everything downstream is written
in terms of the modular coordinate

    u = Omega_1(x) = ln( sin(pi (ell + x) / L) / sin(pi (ell - x) / L) ),

which maps the interval onto the real line.  Points are carried as ``u``
wherever precision near the endpoints matters: ``x`` itself cannot resolve
distances below ``1e-16 * ell`` from ``+-ell``, whereas ``u`` can.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Chirality",
    "DomainError",
    "Geometry",
    "GeometryError",
    "flow_trajectory",
    "flow_trajectory_u",
    "jacobian",
    "omega",
    "omega_prime",
    "position",
    "s_factor",
    "s_of_u",
    "sinh_omega_identity",
]

BOUNDARY_RTOL = 1e-14


class GeometryError(ValueError):
    """Invalid cylinder/interval parameters."""


class DomainError(ValueError):
    """A position or argument outside the domain of an operation."""


class Chirality(enum.IntEnum):
    """The two chiral components of the Dirac fermion."""

    ONE = 1
    TWO = 2

    @property
    def sign(self) -> int:
        """+1 for chirality 1 and -1 for chirality 2 (so that Omega_a = sign * Omega_1)."""
        return 1 if self is Chirality.ONE else -1

    @property
    def index(self) -> int:
        """Zero-based array index."""
        return int(self) - 1


@dataclass(frozen=True)
class Geometry:
    """Circumference ``L`` and half-length ``ell`` of the interval, ``0 < 2 ell < L``."""

    L: float
    ell: float

    def __post_init__(self) -> None:
        L, ell = float(self.L), float(self.ell)
        if not np.isfinite(L) or L <= 0:
            raise GeometryError(f"L must be positive and finite, got {self.L!r}")
        if not np.isfinite(ell) or ell <= 0:
            raise GeometryError(f"ell must be positive and finite, got {self.ell!r}")
        if not 2 * ell < L:
            raise GeometryError(f"interval too long: need 2*ell < L, got ell={ell}, L={L}")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "ell", ell)

    @property
    def theta(self) -> float:
        """Opening angle 2 pi ell / L."""
        return 2.0 * np.pi * self.ell / self.L

    @property
    def sin_theta(self) -> float:
        return float(np.sin(self.theta))

    @property
    def cos_theta(self) -> float:
        return float(np.cos(self.theta))

    @property
    def tan_half(self) -> float:
        """tan(pi ell / L)."""
        return float(np.tan(np.pi * self.ell / self.L))

    @property
    def sin2_half(self) -> float:
        """sin^2(pi ell / L)."""
        return float(np.sin(np.pi * self.ell / self.L) ** 2)

    @property
    def ratio(self) -> float:
        """ell / L."""
        return self.ell / self.L


def _as_chirality(a) -> Chirality:
    try:
        return Chirality(int(a))
    except ValueError as exc:
        raise DomainError(f"chirality must be 1 or 2, got {a!r}") from exc


def _check_interval(x, geo: Geometry, *, closed: bool = True) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    tol = BOUNDARY_RTOL * geo.ell
    if np.any(~np.isfinite(x)):
        raise DomainError("positions must be finite")
    bad = np.abs(x) > geo.ell + tol if closed else np.abs(x) >= geo.ell - tol
    if np.any(bad):
        kind = "[-ell, ell]" if closed else "(-ell, ell)"
        raise DomainError(f"position outside {kind} with ell={geo.ell}: {x[bad].ravel()[:3]}")
    return x


def s_factor(x, geo: Geometry) -> np.ndarray:
    """Product sin(pi (ell + x)/L) * sin(pi (ell - x)/L) = sin^2(pi ell/L) - sin^2(pi x/L)."""
    x = np.asarray(x, dtype=float)
    k = np.pi / geo.L
    return np.sin(k * (geo.ell + x)) * np.sin(k * (geo.ell - x))


def omega(a, x, geo: Geometry) -> np.ndarray:
    """Modular coordinate Omega_a(x); Omega_2 = -Omega_1.

    Points within ``1e-14 * ell`` of an endpoint return a signed infinity.
    """
    sgn = _as_chirality(a).sign
    x = _check_interval(x, geo)
    k = np.pi / geo.L
    tol = BOUNDARY_RTOL * geo.ell
    num = np.sin(k * (geo.ell + x))
    den = np.sin(k * (geo.ell - x))
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.log(num / den)
    val = np.where(x >= geo.ell - tol, np.inf, val)
    val = np.where(x <= -geo.ell + tol, -np.inf, val)
    return sgn * val


def omega_prime(x, geo: Geometry) -> np.ndarray:
    """Omega_1'(x) = (pi/L) sin(2 pi ell/L) / s(x), positive on the open interval."""
    x = _check_interval(x, geo)
    with np.errstate(divide="ignore"):
        return (np.pi / geo.L) * geo.sin_theta / s_factor(x, geo)


def position(u, geo: Geometry) -> np.ndarray:
    """Inverse map x = X(u) of u = Omega_1(x); accepts +-inf."""
    u = np.asarray(u, dtype=float)
    return (geo.L / np.pi) * np.arctan(geo.tan_half * np.tanh(0.5 * u))


def jacobian(u, geo: Geometry) -> np.ndarray:
    """dX/du = L sin(theta) / (2 pi (cosh u + cos theta)); decays like e^{-|u|}."""
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore"):
        return geo.L * geo.sin_theta / (2.0 * np.pi * (np.cosh(u) + geo.cos_theta))


def s_of_u(u, geo: Geometry) -> np.ndarray:
    """s(X(u)) evaluated without forming X(u): sin^2(theta) / (2 (cosh u + cos theta))."""
    u = np.asarray(u, dtype=float)
    with np.errstate(over="ignore"):
        return geo.sin_theta**2 / (2.0 * (np.cosh(u) + geo.cos_theta))


def flow_trajectory_u(u, t, geo: Geometry) -> np.ndarray:
    """Trajectory in the modular coordinate: a plain shift u + 2 pi t."""
    return np.asarray(u, dtype=float) + 2.0 * np.pi * np.asarray(t, dtype=float)


def flow_trajectory(y, t, geo: Geometry) -> np.ndarray:
    """x0(y, t) = (L/pi) arctan[tan(pi ell/L) tanh(Omega_1(y)/2 + pi t)].

    Solves Omega_1(x0) = Omega_1(y) + 2 pi t in closed form.
    """
    y = _check_interval(y, geo, closed=False)
    t = np.asarray(t, dtype=float)
    if np.any(np.isnan(t)):
        raise DomainError("modular time must not be NaN")
    return position(omega(1, y, geo) + 2.0 * np.pi * t, geo)


def sinh_omega_identity(x, y, geo: Geometry) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of 1/sinh[(Omega_1(x)-Omega_1(y))/2] = 2 sqrt(s(x) s(y)) / (sin(theta) sin(pi (x-y)/L))."""
    x = _check_interval(x, geo, closed=False)
    y = _check_interval(y, geo, closed=False)
    x, y = np.broadcast_arrays(x, y)
    if np.any(x == y):
        raise DomainError("sinh identity needs distinct points")
    lhs = 1.0 / np.sinh(0.5 * (omega(1, x, geo) - omega(1, y, geo)))
    rhs = 2.0 * np.sqrt(s_factor(x, geo) * s_factor(y, geo)) / (geo.sin_theta * np.sin(np.pi * (x - y) / geo.L))
    return lhs, rhs
