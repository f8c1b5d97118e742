"""Cubic Bezier path geometry.

Paths are stored as an ``(n, 2)`` array of control points in canvas pixels,
with ``n = 3 * segments + 1``. Closed paths are closed by an implicit straight
edge from the last point back to the first, the same as SVG ``Z``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from hivevec.styles import StyleClass, style_preset

AREA_TOLERANCE = 0.1
_MAX_DEPTH = 18


@dataclass
class VectorPath:
    points: np.ndarray
    closed: bool = True
    fill: np.ndarray | None = None
    stroke: np.ndarray | None = None
    stroke_width: float = 0.0
    style: StyleClass = StyleClass.ICONOGRAPHY
    uid: int = -1
    object_id: int | None = None
    part_id: int | None = None

    def __post_init__(self) -> None:
        self.points = np.array(self.points, dtype=np.float64).reshape(-1, 2)
        if self.fill is not None:
            self.fill = np.array(self.fill, dtype=np.float64).reshape(4)
        if self.stroke is not None:
            self.stroke = np.array(self.stroke, dtype=np.float64).reshape(4)
        self.stroke_width = float(self.stroke_width)
        self.style = StyleClass(self.style)

    @property
    def num_segments(self) -> int:
        return (len(self.points) - 1) // 3

    @property
    def paint(self) -> np.ndarray:
        """The color actually rendered: fill for filled paths, else stroke."""
        return self.fill if self.fill is not None else self.stroke

    @property
    def opacity(self) -> float:
        return float(self.paint[3])

    def copy(self, **changes) -> "VectorPath":
        out = dataclasses.replace(self, **changes)
        if "points" not in changes:
            out.points = self.points.copy()
        if "fill" not in changes and self.fill is not None:
            out.fill = self.fill.copy()
        if "stroke" not in changes and self.stroke is not None:
            out.stroke = self.stroke.copy()
        return out

    def violations(self) -> list[str]:
        problems = []
        n = len(self.points)
        if n < 4 or n % 3 != 1:
            problems.append(f"point count {n} is not 1 (mod 3) and >= 4")
        if not np.all(np.isfinite(self.points)):
            problems.append("non-finite control point")
        if (self.fill is None) == (self.stroke is None):
            problems.append("exactly one of fill/stroke must be set")
        if not self.closed and self.fill is not None:
            problems.append("open path with fill")
        if self.stroke is not None and not self.stroke_width > 0:
            problems.append("stroke present but stroke_width <= 0")
        for name in ("fill", "stroke"):
            color = getattr(self, name)
            if color is not None and (np.any(color < 0) or np.any(color > 1) or not np.all(np.isfinite(color))):
                problems.append(f"{name} color outside [0, 1]")
        preset = style_preset(self.style)
        if preset.closed != self.closed:
            problems.append(f"style {self.style.value} requires closed={preset.closed}")
        if preset.filled != (self.fill is not None):
            problems.append(f"style {self.style.value} requires {'fill' if preset.filled else 'stroke'}")
        return problems

    def validate(self) -> None:
        problems = self.violations()
        if problems:
            raise ValueError("invalid path: " + "; ".join(problems))


def segments(points: np.ndarray) -> np.ndarray:
    """View the control points as an ``(nseg, 4, 2)`` array of cubic segments."""
    points = np.asarray(points, dtype=np.float64)
    nseg = (len(points) - 1) // 3
    idx = 3 * np.arange(nseg)[:, None] + np.arange(4)[None, :]
    return points[idx]


def bezier_eval(seg: np.ndarray, t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)[..., None]
    s = 1.0 - t
    return (s**3) * seg[0] + 3 * (s**2) * t * seg[1] + 3 * s * (t**2) * seg[2] + (t**3) * seg[3]


def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(math.hypot(*(p - a)))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(math.hypot(*(p - (a + t * ab))))


def _flatten_segment(seg: np.ndarray, tolerance: float, out: list, depth: int = 0) -> None:
    # The curve lies in the hull of its controls, so this bounds chord deviation.
    a, b = seg[0], seg[3]
    flat = max(_point_segment_distance(seg[1], a, b), _point_segment_distance(seg[2], a, b))
    if flat <= tolerance or depth >= _MAX_DEPTH:
        out.append(b)
        return
    p01 = 0.5 * (seg[0] + seg[1])
    p12 = 0.5 * (seg[1] + seg[2])
    p23 = 0.5 * (seg[2] + seg[3])
    p012 = 0.5 * (p01 + p12)
    p123 = 0.5 * (p12 + p23)
    mid = 0.5 * (p012 + p123)
    _flatten_segment(np.array([seg[0], p01, p012, mid]), tolerance, out, depth + 1)
    _flatten_segment(np.array([mid, p123, p23, seg[3]]), tolerance, out, depth + 1)


def flatten(path: VectorPath, tolerance: float = AREA_TOLERANCE) -> np.ndarray:
    """Polyline approximation of ``path`` by recursive de Casteljau subdivision.

    Every chord stays within ``tolerance`` pixels of the curve. A closed path
    yields a closed polyline whose last vertex repeats the first.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    pts = path.points
    out = [pts[0]]
    for seg in segments(pts):
        _flatten_segment(seg, tolerance, out)
    if path.closed and not np.array_equal(out[-1], out[0]):
        out.append(pts[0])
    return np.array(out, dtype=np.float64)


def polygon_signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def path_area(path: VectorPath, tolerance: float = AREA_TOLERANCE) -> float:
    if not path.closed:
        raise ValueError("path_area requires a closed path")
    return abs(polygon_signed_area(flatten(path, tolerance)))


def winding_numbers(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Winding number of a closed polyline around each query point."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    a = poly[:-1][None, :, :]
    b = poly[1:][None, :, :]
    px = pts[:, 0:1]
    py = pts[:, 1:2]
    ay, by = a[..., 1], b[..., 1]
    up = (ay <= py) & (by > py)
    down = (by <= py) & (ay > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = (b[..., 0] - a[..., 0]) * (py - ay) - (px - a[..., 0]) * (by - ay)
    wn = np.sum(up & (cross > 0), axis=1) - np.sum(down & (cross < 0), axis=1)
    return wn.astype(np.int64)


def polyline_distance(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Euclidean distance from each query point to the polyline."""
    pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
    if len(poly) == 1:
        return np.hypot(*(pts - poly[0]).T)
    a = poly[:-1][None]
    ab = (poly[1:] - poly[:-1])[None]
    ap = pts[:, None, :] - a
    denom = np.sum(ab * ab, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(denom > 0, np.sum(ap * ab, axis=-1) / denom, 0.0)
    t = np.clip(t, 0.0, 1.0)
    diff = ap - t[..., None] * ab
    return np.sqrt(np.min(np.sum(diff * diff, axis=-1), axis=1))


def point_in_path(path: VectorPath, p, tolerance: float = AREA_TOLERANCE) -> bool:
    """Nonzero-winding containment; open paths test against the stroke band."""
    poly = flatten(path, tolerance)
    p = np.asarray(p, dtype=np.float64).reshape(1, 2)
    if path.closed:
        return bool(winding_numbers(poly, p)[0] != 0)
    return bool(polyline_distance(poly, p)[0] <= path.stroke_width / 2)


def path_bbox(path: VectorPath, tolerance: float = AREA_TOLERANCE) -> tuple[float, float, float, float]:
    """Tight ``(xmin, ymin, xmax, ymax)`` of the flattened path."""
    poly = flatten(path, tolerance)
    lo = poly.min(axis=0)
    hi = poly.max(axis=0)
    return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])


def centroid(path: VectorPath, tolerance: float = AREA_TOLERANCE) -> np.ndarray:
    poly = flatten(path, tolerance)
    if path.closed:
        x, y = poly[:, 0], poly[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cr = x * yn - xn * y
        a = 0.5 * cr.sum()
        if abs(a) > 1e-12:
            return np.array([((x + xn) * cr).sum(), ((y + yn) * cr).sum()]) / (6.0 * a)
    return poly.mean(axis=0)


def split_path(path: VectorPath) -> tuple[VectorPath, VectorPath]:
    """Split a closed path into two halves that tile its footprint.

    Each child is the parent squeezed by 1/2 about the centroid along the
    longer bbox axis, then shifted a quarter of that extent either way, so
    each child has exactly half the parent's area.
    """
    if not path.closed:
        raise ValueError("split_path requires a closed path")
    if not path_area(path) > 0:
        raise ValueError("cannot split a zero-area path; prune it instead")
    x0, y0, x1, y1 = path_bbox(path)
    axis = 0 if (x1 - x0) >= (y1 - y0) else 1
    extent = (x1 - x0) if axis == 0 else (y1 - y0)
    c = centroid(path)
    children = []
    for sign in (-1.0, 1.0):
        pts = path.points.copy()
        pts[:, axis] = c[axis] + 0.5 * (pts[:, axis] - c[axis]) + sign * 0.25 * extent
        children.append(path.copy(points=pts))
    return children[0], children[1]


def clone_path(path: VectorPath, direction) -> VectorPath:
    """Copy of ``path`` moved along ``direction`` so the two bboxes abut."""
    d = np.asarray(direction, dtype=np.float64).reshape(2)
    norm = float(np.hypot(*d))
    if not abs(norm - 1.0) < 1e-6:
        raise ValueError(f"clone direction must be a unit vector, got norm {norm:g}")
    x0, y0, x1, y1 = path_bbox(path)
    shift = abs(d[0]) * (x1 - x0) + abs(d[1]) * (y1 - y0)
    return path.copy(points=path.points + shift * d)


def polygon_points(corners) -> np.ndarray:
    """Closed straight-edged path through ``corners`` as degenerate cubics."""
    c = np.asarray(corners, dtype=np.float64).reshape(-1, 2)
    nxt = np.roll(c, -1, axis=0)
    pts = np.empty((3 * len(c) + 1, 2))
    pts[0:-1:3] = c
    pts[1::3] = c + (nxt - c) / 3.0
    pts[2::3] = c + 2.0 * (nxt - c) / 3.0
    pts[-1] = c[0]
    return pts


def polygon_corners(points: np.ndarray) -> np.ndarray:
    return np.asarray(points)[0:-1:3]


def corner_gradient(grad_points: np.ndarray) -> np.ndarray:
    """Chain a gradient w.r.t. ``polygon_points(corners)`` back onto the corners."""
    g = np.asarray(grad_points, dtype=np.float64)
    k = len(g) // 3
    out = g[0:-1:3].copy()
    h1 = g[1::3]
    h2 = g[2::3]
    out += (2.0 / 3.0) * h1 + (1.0 / 3.0) * h2
    np.add.at(out, np.roll(np.arange(k), -1), (1.0 / 3.0) * h1 + (2.0 / 3.0) * h2)
    out[0] += g[-1]
    return out


def square_points(center, side: float) -> np.ndarray:
    cx, cy = np.asarray(center, dtype=np.float64)
    h = side / 2.0
    return polygon_points([(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)])
