"""Vector field visualisation of a sphere scan as a standalone SVG.

The figure combines three layers on a Robinson-projected Bloch sphere:
a purity heatmap (one filled marker per programmed state, colored by the
purity of its reconstruction), arrows pointing from each programmed state
toward the direction of its reconstructed state, and a vertical color
legend with a red line marking the scan's average purity.

Output is deterministic: no timestamps, fixed element order, and all
numbers formatted with 4 decimals, so renders are byte-stable and can be
golden-file tested.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .bloch import purity
from .robinson import (
    PLANE_X_MAX,
    PLANE_Y_MAX,
    GeoPoint,
    PlanePoint,
    _project_lat_lon,
    map_outline,
    robinson_project,
)
from .scan import ScanResult, ScanRow

_DEGENERATE_NORM = 1e-9


class EmptyScanError(ValueError):
    """No successful rows to draw."""


class DegenerateDirectionWarning(UserWarning):
    """A reconstructed vector is numerically zero; its arrow is suppressed."""


# 33 evenly spaced anchors of the perceptually uniform viridis map.
_VIRIDIS = (
    (0.2670, 0.0049, 0.3294), (0.2770, 0.0503, 0.3757), (0.2823, 0.0950, 0.4173),
    (0.2829, 0.1359, 0.4534), (0.2788, 0.1755, 0.4834), (0.2706, 0.2141, 0.5071),
    (0.2590, 0.2515, 0.5247), (0.2450, 0.2877, 0.5373), (0.2297, 0.3224, 0.5457),
    (0.2143, 0.3556, 0.5512), (0.1994, 0.3876, 0.5546), (0.1856, 0.4186, 0.5568),
    (0.1727, 0.4488, 0.5579), (0.1607, 0.4785, 0.5581), (0.1490, 0.5081, 0.5572),
    (0.1378, 0.5375, 0.5549), (0.1276, 0.5669, 0.5506), (0.1206, 0.5964, 0.5436),
    (0.1206, 0.6258, 0.5335), (0.1323, 0.6550, 0.5197), (0.1579, 0.6838, 0.5017),
    (0.1966, 0.7118, 0.4792), (0.2461, 0.7389, 0.4520), (0.3041, 0.7647, 0.4199),
    (0.3692, 0.7889, 0.3829), (0.4401, 0.8111, 0.3410), (0.5160, 0.8312, 0.2943),
    (0.5958, 0.8487, 0.2433), (0.6785, 0.8637, 0.1895), (0.7624, 0.8764, 0.1371),
    (0.8456, 0.8873, 0.0997), (0.9261, 0.8973, 0.1041), (0.9932, 0.9062, 0.1439),
)

COLORMAPS = ("viridis", "greys")


def colormap_rgb(name: str, t: float) -> tuple[float, float, float]:
    """RGB in [0,1]^3 at normalized position t (clipped to [0, 1])."""
    t = min(1.0, max(0.0, t))
    if name == "greys":
        return (t, t, t)
    if name != "viridis":
        raise ValueError(f"unknown colormap {name!r}; choose from {COLORMAPS}")
    pos = t * (len(_VIRIDIS) - 1)
    idx = min(len(_VIRIDIS) - 2, int(pos))
    frac = pos - idx
    lo, hi = _VIRIDIS[idx], _VIRIDIS[idx + 1]
    return tuple(l * (1.0 - frac) + h * frac for l, h in zip(lo, hi))


def _hex_color(rgb: tuple[float, float, float]) -> str:
    return "#" + "".join(f"{round(255 * min(1.0, max(0.0, c))):02x}" for c in rgb)


def _fmt(value: float) -> str:
    v = float(value)
    if abs(v) < 5e-5:
        v = 0.0
    return f"{v:.4f}"


@dataclass(frozen=True)
class VfvStyle:
    """Appearance knobs for the rendered figure.

    arrow_scale converts angular error (radians between programmed and
    reconstructed directions) to arrow length in pixels; arrows shorter
    than half the marker radius are suppressed, so with the defaults only
    errors above 0.05 rad become visible.  colormap_range of None picks
    [min purity - 0.005, 1.0] from the data.
    """

    colormap: str = "viridis"
    colormap_range: tuple[float, float] | None = None
    arrow_scale: float = 60.0
    marker_radius: float = 6.0
    show_mean_line: bool = True
    width_px: float = 900.0
    height_px: float = 430.0

    def __post_init__(self):
        if self.colormap not in COLORMAPS:
            raise ValueError(f"unknown colormap {self.colormap!r}; choose from {COLORMAPS}")
        if self.colormap_range is not None:
            lo, hi = self.colormap_range
            if not lo < hi:
                raise ValueError(f"colormap range must satisfy low < high, got {self.colormap_range}")
            object.__setattr__(self, "colormap_range", (float(lo), float(hi)))
        if self.arrow_scale < 0.0:
            raise ValueError("arrow_scale must be nonnegative")
        if self.marker_radius <= 0.0:
            raise ValueError("marker_radius must be positive")
        if self.width_px < 200 or self.height_px < 120:
            raise ValueError("figure must be at least 200x120 px")

    @property
    def arrow_min_px(self) -> float:
        return 0.5 * self.marker_radius


_MARGIN = 20.0
_LEGEND_WIDTH = 80.0


class _MapTransform:
    """Plane (projection) coordinates to pixel coordinates, y flipped."""

    def __init__(self, style: VfvStyle):
        avail_w = style.width_px - 2 * _MARGIN - _LEGEND_WIDTH
        avail_h = style.height_px - 2 * _MARGIN
        self.scale = min(avail_w / (2 * PLANE_X_MAX), avail_h / (2 * PLANE_Y_MAX))
        self.cx = _MARGIN + avail_w / 2.0
        self.cy = _MARGIN + avail_h / 2.0

    def __call__(self, p: PlanePoint) -> tuple[float, float]:
        return (self.cx + p.x * self.scale, self.cy - p.y * self.scale)


def render_purity_legend(
    mean: float,
    value_range: tuple[float, float],
    colormap: str = "viridis",
    x: float = 0.0,
    y: float = 0.0,
    bar_width: float = 16.0,
    bar_height: float = 200.0,
    show_mean_line: bool = True,
) -> str:
    """SVG <g> fragment: vertical gradient bar, tick labels, red mean line.

    The red line sits at the proportional position of mean inside
    value_range, measured from the bottom of the bar.
    """
    lo, hi = value_range
    if not lo <= mean <= hi:
        raise ValueError(f"mean {mean} outside legend range [{lo}, {hi}]")
    if not lo < hi:
        raise ValueError("legend range must satisfy low < high")
    parts = [f'<g class="vfv-legend" font-family="sans-serif" font-size="10">']
    parts.append('<defs><linearGradient id="purity-gradient" x1="0" y1="1" x2="0" y2="0">')
    steps = 32
    for k in range(steps + 1):
        t = k / steps
        parts.append(
            f'<stop offset="{_fmt(t)}" stop-color="{_hex_color(colormap_rgb(colormap, t))}"/>'
        )
    parts.append("</linearGradient></defs>")
    parts.append(
        f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(bar_width)}" height="{_fmt(bar_height)}" '
        'fill="url(#purity-gradient)" stroke="#333333" stroke-width="0.5"/>'
    )
    for k in range(5):
        t = k / 4.0
        value = lo + t * (hi - lo)
        ty = y + bar_height * (1.0 - t)
        parts.append(
            f'<line x1="{_fmt(x + bar_width)}" y1="{_fmt(ty)}" x2="{_fmt(x + bar_width + 3)}" '
            f'y2="{_fmt(ty)}" stroke="#333333" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{_fmt(x + bar_width + 5)}" y="{_fmt(ty + 3)}">{_fmt(value)}</text>'
        )
    if show_mean_line:
        frac = (mean - lo) / (hi - lo)
        my = y + bar_height * (1.0 - frac)
        parts.append(
            f'<line class="vfv-mean-line" x1="{_fmt(x - 2)}" y1="{_fmt(my)}" '
            f'x2="{_fmt(x + bar_width + 2)}" y2="{_fmt(my)}" stroke="#cc0000" stroke-width="1.5"/>'
        )
    parts.append("</g>")
    return "\n".join(parts)


def _direction_angle(a_in, a_out) -> float:
    """Great-circle angle between the programmed state and the reconstructed direction."""
    d = a_out.unit()
    c = a_in.dot(d)
    return math.acos(max(-1.0, min(1.0, c)))


def _arrow_segments(row: ScanRow, style: VfvStyle, to_px: _MapTransform):
    """None, or 1-2 pixel-space polyline segments from the marker toward a_out.

    Length in pixels is arrow_scale times the angular error; direction runs
    toward the projected reconstructed direction with longitudes unwrapped,
    and a segment straddling the antimeridian is split at the seam.
    """
    a_out = row.primary_result.estimate
    if a_out.norm() < _DEGENERATE_NORM:
        warnings.warn(
            f"row {row.index}: reconstructed vector is numerically zero, arrow suppressed",
            DegenerateDirectionWarning,
            stacklevel=3,
        )
        return None
    angle = _direction_angle(row.a_in, a_out)
    length_px = style.arrow_scale * angle
    if length_px < style.arrow_min_px:
        return None

    start = GeoPoint.from_state_angles(row.state)
    end = GeoPoint.from_direction(a_out)
    lat1, lon1 = start.latitude, start.longitude
    lat2, lon2 = end.latitude, end.longitude
    if lon2 - lon1 > 180.0:
        lon2 -= 360.0
    elif lon2 - lon1 < -180.0:
        lon2 += 360.0

    p1 = to_px(robinson_project(start))
    p2 = to_px(_project_lat_lon(lat2, lon2))
    full = math.hypot(p2[0] - p1[0], p2[1] - p1[1])
    if full == 0.0:
        return None
    t = length_px / full
    end_lat = lat1 + t * (lat2 - lat1)
    end_lon = lon1 + t * (lon2 - lon1)
    end_lat = max(-90.0, min(90.0, end_lat))

    if -180.0 <= end_lon < 180.0:
        return [[p1, to_px(_project_lat_lon(end_lat, end_lon))]]
    # split at the antimeridian seam
    seam = 180.0 if end_lon >= 180.0 else -180.0
    f = (seam - lon1) / (end_lon - lon1)
    seam_lat = lat1 + f * (end_lat - lat1)
    wrapped_lon = end_lon - math.copysign(360.0, seam)
    seg1 = [p1, to_px(_project_lat_lon(seam_lat, seam))]
    seg2 = [to_px(_project_lat_lon(seam_lat, -seam)), to_px(_project_lat_lon(end_lat, wrapped_lon))]
    return [seg1, seg2]


def render_vfv(scan: ScanResult, style: VfvStyle | None = None) -> str:
    """Render a scan as a complete SVG 1.1 document (returned as text)."""
    style = style or VfvStyle()
    rows = scan.ok_rows
    if not rows:
        raise EmptyScanError("scan has no successful rows to render")

    purities = [r.purity for r in rows]
    mean_purity = sum(purities) / len(purities)
    if style.colormap_range is not None:
        vlo, vhi = style.colormap_range
    else:
        vlo, vhi = min(purities) - 0.005, 1.0
        if vlo >= vhi:
            vlo = vhi - 0.01
    to_px = _MapTransform(style)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(style.width_px)}" height="{_fmt(style.height_px)}" '
        f'viewBox="0 0 {_fmt(style.width_px)} {_fmt(style.height_px)}">',
        '<defs><marker id="arrowhead" markerWidth="6" markerHeight="6" refX="4.2" refY="2.1" '
        'orient="auto"><path d="M 0.0 0.0 L 4.8 2.1 L 0.0 4.2 Z" fill="#1a1a1a"/></marker></defs>',
        f'<rect x="0" y="0" width="{_fmt(style.width_px)}" height="{_fmt(style.height_px)}" fill="#ffffff"/>',
    ]

    outline = " ".join(
        f"{'M' if i == 0 else 'L'} {_fmt(px)} {_fmt(py)}"
        for i, (px, py) in enumerate(to_px(p) for p in map_outline())
    )
    out.append(f'<path class="vfv-outline" d="{outline} Z" fill="#f7f7f7" stroke="#555555" stroke-width="1"/>')

    markers = ['<g class="vfv-states" stroke="#2a2a2a" stroke-width="0.4">']
    arrows = ['<g class="vfv-arrows" stroke="#1a1a1a" stroke-width="1.2" fill="none">']
    n_arrows = 0
    for row in rows:
        px, py = to_px(robinson_project(GeoPoint.from_state_angles(row.state)))
        t = (row.purity - vlo) / (vhi - vlo)
        color = _hex_color(colormap_rgb(style.colormap, t))
        markers.append(
            f'<circle class="vfv-state" cx="{_fmt(px)}" cy="{_fmt(py)}" '
            f'r="{_fmt(style.marker_radius)}" fill="{color}"/>'
        )
        segments = _arrow_segments(row, style, to_px)
        if not segments:
            continue
        n_arrows += 1
        for k, seg in enumerate(segments):
            head = ' marker-end="url(#arrowhead)"' if k == len(segments) - 1 else ""
            pts = " ".join(f"{_fmt(qx)},{_fmt(qy)}" for qx, qy in seg)
            arrows.append(f'<polyline class="vfv-arrow" points="{pts}"{head}/>')
    markers.append("</g>")
    arrows.append("</g>")
    out.extend(markers)
    out.extend(arrows)

    legend_x = style.width_px - _MARGIN - _LEGEND_WIDTH + 10
    legend_h = style.height_px - 2 * _MARGIN - 20
    out.append(render_purity_legend(
        min(vhi, max(vlo, mean_purity)),  # a custom range may not cover the mean
        (vlo, vhi),
        colormap=style.colormap,
        x=legend_x,
        y=_MARGIN + 10,
        bar_height=legend_h,
        show_mean_line=style.show_mean_line,
    ))
    out.append(f'<!-- states={len(rows)} arrows={n_arrows} mean-purity={_fmt(mean_purity)} -->')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def count_arrows(svg_text: str) -> int:
    """Number of drawn arrows (split segments count once via their heads)."""
    return svg_text.count('marker-end="url(#arrowhead)"')
