"""Bloch-ball algebra for single-qubit states.

A qubit density matrix is represented throughout as a point of the closed
unit ball in R^3.  Pure states live on the boundary, the maximally mixed
state at the origin.  The 2x2 complex matrix is never materialized; every
quantity this package needs reduces to dot products on R^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Numerical slack on the physicality constraint ||a|| <= 1.
NORM_TOL = 1e-9

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BlochVector:
    """Point a = (x, y, z) in the closed unit ball."""

    x: float
    y: float
    z: float

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dot(self, other: "BlochVector") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def scaled(self, factor: float) -> "BlochVector":
        return BlochVector(factor * self.x, factor * self.y, factor * self.z)

    def unit(self) -> "BlochVector":
        """Direction a / ||a||.  Raises for the zero vector."""
        n = self.norm()
        if n == 0.0:
            raise ZeroDivisionError("zero Bloch vector has no direction")
        return self.scaled(1.0 / n)

    @classmethod
    def from_sequence(cls, xyz) -> "BlochVector":
        x, y, z = xyz
        return cls(float(x), float(y), float(z))

    def is_physical(self, tol: float = NORM_TOL) -> bool:
        return self.norm() <= 1.0 + tol

    def is_pure(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol


def wrap_phi(phi: float) -> float:
    """Wrap an azimuth to the [-pi, pi) convention used package-wide."""
    wrapped = math.fmod(phi + math.pi, _TWO_PI)
    if wrapped < 0.0:
        wrapped += _TWO_PI
    return wrapped - math.pi


@dataclass(frozen=True)
class StateAngles:
    """Preparation angles (theta, phi) of a programmed pure state.

    theta is the polar angle in [0, pi]; phi is the azimuth, normalized to
    [-pi, pi) so that it maps directly onto map-projection longitude.
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "phi", wrap_phi(self.phi))


@dataclass(frozen=True)
class MeasurementAngles:
    """Rotation angles (alpha, beta) selecting a measurement axis."""

    alpha: float
    beta: float


def to_bloch(s: StateAngles) -> BlochVector:
    """Unit Bloch vector (sin t cos p, sin t sin p, cos t) of a prepared state."""
    st = math.sin(s.theta)
    return BlochVector(st * math.cos(s.phi), st * math.sin(s.phi), math.cos(s.theta))


def measurement_axis(m: MeasurementAngles) -> BlochVector:
    """Unit axis (sin a cos b, sin a sin b, cos a) of the emulated measurement."""
    sa = math.sin(m.alpha)
    return BlochVector(sa * math.cos(m.beta), sa * math.sin(m.beta), math.cos(m.alpha))


def angles_from_bloch(a: BlochVector) -> StateAngles:
    """Recover (theta, phi) from a nonzero Bloch vector via atan2."""
    n = a.norm()
    if n == 0.0:
        raise ValueError("angles are undefined for the zero vector")
    theta = math.acos(max(-1.0, min(1.0, a.z / n)))
    phi = math.atan2(a.y, a.x)
    return StateAngles(theta, phi)


def _require_physical(a: BlochVector) -> None:
    if not a.is_physical():
        raise ValueError(f"unphysical state: ||a|| = {a.norm():.12g} > 1")


def born_probability(a: BlochVector, u: BlochVector) -> float:
    """Probability (1 + a.u)/2 of the outcome along measurement axis u.

    a may be mixed (any point of the ball); u must be a unit axis.
    """
    _require_physical(a)
    if abs(u.norm() - 1.0) > 1e-9:
        raise ValueError(f"measurement axis must be unit length, got ||u|| = {u.norm():.12g}")
    p = 0.5 * (1.0 + a.dot(u))
    # rounding can push an eigenstate a hair outside [0, 1]
    return min(1.0, max(0.0, p))


def purity(a: BlochVector) -> float:
    """State purity (1 + ||a||^2)/2, ranging from 0.5 (mixed) to 1 (pure)."""
    n2 = a.x * a.x + a.y * a.y + a.z * a.z
    return 0.5 * (1.0 + n2)


def fidelity(a_in: BlochVector, a_out: BlochVector) -> float:
    """Overlap between a programmed pure state and a reconstructed state.

    Equals sqrt((1 + a_in.a_out)/2); requires a_in on the unit sphere.
    """
    if abs(a_in.norm() - 1.0) > NORM_TOL:
        raise ValueError("fidelity requires a pure (unit) programmed state")
    _require_physical(a_out)
    inner = 0.5 * (1.0 + a_in.dot(a_out))
    return math.sqrt(max(0.0, min(1.0, inner)))
