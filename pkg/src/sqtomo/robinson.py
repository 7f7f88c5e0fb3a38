"""Robinson projection of the Bloch sphere onto the plane.

The Robinson projection is defined by a table of coefficients at 5-degree
latitude steps: X scales the length of the parallel, Y the distance of the
parallel from the equator.  Values between knots are linearly
interpolated.  With radius scale R the plane coordinates are

    x = 0.8487 * R * X(|lat|) * lon_radians
    y = sign(lat) * 1.3523 * R * Y(|lat|)

Bloch states map to geographic coordinates with latitude 90 - theta_deg
and longitude phi_deg, so |0> is the north pole and the equator of the
sphere is the map equator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bloch import BlochVector, StateAngles, angles_from_bloch

# Standard Robinson coefficients at latitudes 0, 5, ..., 90.
ROBINSON_LATITUDES = tuple(range(0, 95, 5))
ROBINSON_X = (
    1.0000, 0.9986, 0.9954, 0.9900, 0.9822, 0.9730, 0.9600, 0.9427, 0.9216,
    0.8962, 0.8679, 0.8350, 0.7986, 0.7597, 0.7186, 0.6732, 0.6213, 0.5722,
    0.5322,
)
ROBINSON_Y = (
    0.0000, 0.0620, 0.1240, 0.1860, 0.2480, 0.3100, 0.3720, 0.4340, 0.4958,
    0.5571, 0.6176, 0.6769, 0.7346, 0.7903, 0.8435, 0.8936, 0.9394, 0.9761,
    1.0000,
)

LENGTH_SCALE = 0.8487
HEIGHT_SCALE = 1.3523

# Half-extent of the projected map at R = 1.
PLANE_X_MAX = LENGTH_SCALE * math.pi
PLANE_Y_MAX = HEIGHT_SCALE


@dataclass(frozen=True)
class GeoPoint:
    """Latitude/longitude in degrees: lat in [-90, 90], lon in [-180, 180)."""

    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude out of range: {self.latitude}")
        lon = self.longitude
        if not -180.0 <= lon < 180.0:
            lon = math.fmod(lon + 180.0, 360.0)
            if lon < 0.0:
                lon += 360.0
            lon -= 180.0
            object.__setattr__(self, "longitude", lon)

    @classmethod
    def from_state_angles(cls, s: StateAngles) -> "GeoPoint":
        return cls(90.0 - math.degrees(s.theta), math.degrees(s.phi))

    @classmethod
    def from_direction(cls, a: BlochVector) -> "GeoPoint":
        """Geographic point of a Bloch direction (a need not be unit length)."""
        return cls.from_state_angles(angles_from_bloch(a))


@dataclass(frozen=True)
class PlanePoint:
    x: float
    y: float


def _table_coefficients(abs_lat: float) -> tuple[float, float]:
    """Linearly interpolated (X, Y); exact table values at the 5-degree knots."""
    if abs_lat >= 90.0:
        return ROBINSON_X[-1], ROBINSON_Y[-1]
    idx = int(abs_lat // 5.0)
    frac = abs_lat / 5.0 - idx
    x = ROBINSON_X[idx] * (1.0 - frac) + ROBINSON_X[idx + 1] * frac
    y = ROBINSON_Y[idx] * (1.0 - frac) + ROBINSON_Y[idx + 1] * frac
    return x, y


def robinson_project(g: GeoPoint, radius: float = 1.0) -> PlanePoint:
    """Project a geographic point; odd in longitude and in latitude's y."""
    return _project_lat_lon(g.latitude, g.longitude, radius)


def _project_lat_lon(latitude: float, longitude: float, radius: float = 1.0) -> PlanePoint:
    # internal variant without GeoPoint range checks, so callers may pass
    # unwrapped longitudes when drawing across the antimeridian seam
    xc, yc = _table_coefficients(abs(latitude))
    x = LENGTH_SCALE * radius * xc * math.radians(longitude)
    y = math.copysign(HEIGHT_SCALE * radius * yc, latitude)
    return PlanePoint(x, y)


def map_outline(step_deg: float = 2.5, radius: float = 1.0) -> list[PlanePoint]:
    """Closed boundary of the projected map, east edge down then west edge up."""
    points = []
    lat = 90.0
    while lat >= -90.0 - 1e-9:
        points.append(_project_lat_lon(lat, 180.0, radius))
        lat -= step_deg
    lat = -90.0
    while lat <= 90.0 + 1e-9:
        points.append(_project_lat_lon(lat, -180.0, radius))
        lat += step_deg
    return points
