"""Soft signed-distance rasterizer with an analytic backward pass.

Each path is sampled into a polyline at fixed Bezier parameters, so polyline
vertices are linear in the control points. Per-pixel coverage is a smoothstep
of the signed distance to that polyline, and paths are composited back to
front with the premultiplied over operator. The backward pass walks the
layers in reverse and differentiates through coverage and compositing
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from hivevec import geometry
from hivevec.geometry import VectorPath
from hivevec.raster import _backend


@dataclass(frozen=True)
class RasterConfig:
    bandwidth: float = 1.0
    samples_per_segment: int = 16


DEFAULT_CONFIG = RasterConfig()


def _white() -> np.ndarray:
    return np.ones(4)


@dataclass
class Scene:
    width: int
    height: int
    paths: list[VectorPath] = field(default_factory=list)
    background: np.ndarray = field(default_factory=_white)
    next_uid: int = 0

    def __post_init__(self) -> None:
        self.width = int(self.width)
        self.height = int(self.height)
        self.background = np.array(self.background, dtype=np.float64).reshape(4)
        for p in self.paths:
            if p.uid < 0:
                p.uid = self.next_uid
            self.next_uid = max(self.next_uid, p.uid + 1)

    def add(self, path: VectorPath) -> VectorPath:
        """Append ``path``, giving it a fresh uid if it has none."""
        if path.uid < 0:
            path.uid = self.next_uid
        self.next_uid = max(self.next_uid, path.uid + 1)
        self.paths.append(path)
        return path

    def new_uid(self) -> int:
        uid = self.next_uid
        self.next_uid += 1
        return uid

    def copy(self) -> "Scene":
        return Scene(self.width, self.height, [p.copy() for p in self.paths],
                     self.background.copy(), self.next_uid)

    def subset(self, indices) -> "Scene":
        """Scene sharing the given paths (not copied) and the same canvas."""
        return Scene(self.width, self.height, [self.paths[i] for i in indices],
                     self.background.copy(), self.next_uid)

    def index_of(self, uid: int) -> int:
        for i, p in enumerate(self.paths):
            if p.uid == uid:
                return i
        raise KeyError(uid)

    def violations(self) -> list[str]:
        problems = []
        if self.width <= 0 or self.height <= 0:
            problems.append("canvas dimensions must be positive")
        uids = [p.uid for p in self.paths]
        if len(set(uids)) != len(uids):
            problems.append("duplicate path uids")
        for p in self.paths:
            problems.extend(f"path {p.uid}: {msg}" for msg in p.violations())
        return problems


@dataclass
class PathGradient:
    points: np.ndarray
    color: np.ndarray
    width: float = 0.0


@dataclass
class ParamGradients:
    """Gradients congruent with a Scene: one entry per path, in paint order."""

    paths: list[PathGradient]

    @classmethod
    def zeros(cls, scene: Scene) -> "ParamGradients":
        return cls([PathGradient(np.zeros_like(p.points), np.zeros(4)) for p in scene.paths])

    def __len__(self) -> int:
        return len(self.paths)

    def __getitem__(self, i: int) -> PathGradient:
        return self.paths[i]

    def accumulate(self, other: "ParamGradients", indices) -> None:
        """Add ``other`` (gradients for a sub-scene) into the listed paths."""
        for g, i in zip(other.paths, indices):
            mine = self.paths[i]
            mine.points += g.points
            mine.color += g.color
            mine.width += g.width

    def flat(self) -> np.ndarray:
        parts = []
        for g in self.paths:
            parts.extend([g.points.ravel(), g.color, [g.width]])
        return np.concatenate(parts) if parts else np.zeros(0)

    def is_congruent(self, scene: Scene) -> bool:
        return len(self.paths) == len(scene.paths) and all(
            g.points.shape == p.points.shape for g, p in zip(self.paths, scene.paths)
        )


@lru_cache(maxsize=None)
def bezier_basis(samples: int) -> np.ndarray:
    t = np.arange(samples) / samples
    s = 1.0 - t
    basis = np.stack([s**3, 3 * s**2 * t, 3 * s * t**2, t**3], axis=1)
    basis.setflags(write=False)
    return basis


def sample_vertices(points: np.ndarray, samples: int) -> np.ndarray:
    """Fixed-parameter polyline through the path; linear in the control points."""
    segs = geometry.segments(points)
    verts = np.einsum("tk,skd->std", bezier_basis(samples), segs).reshape(-1, 2)
    return np.vstack([verts, points[-1:]])


def _vertex_to_points(grad_verts: np.ndarray, npoints: int, samples: int) -> np.ndarray:
    nseg = (npoints - 1) // 3
    gseg = np.einsum("tk,std->skd", bezier_basis(samples), grad_verts[:-1].reshape(nseg, samples, 2))
    out = np.zeros((npoints, 2))
    for k in range(4):
        out[k:k + 3 * nseg:3] += gseg[:, k]
    out[-1] += grad_verts[-1]
    return out


def coverage(d, bandwidth: float = 1.0):
    """Smoothstep coverage: 1 at ``d = -bandwidth``, 0.5 at 0, 0 at ``+bandwidth``."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    u = np.clip((bandwidth - np.asarray(d, dtype=np.float64)) / (2.0 * bandwidth), 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _coverage_and_slope(d: np.ndarray, bandwidth: float) -> tuple[np.ndarray, np.ndarray]:
    u = np.clip((bandwidth - d) / (2.0 * bandwidth), 0.0, 1.0)
    cov = u * u * (3.0 - 2.0 * u)
    slope = -6.0 * u * (1.0 - u) / (2.0 * bandwidth)
    return cov, slope


def signed_distance(path: VectorPath, p, tolerance: float = 0.01) -> float:
    """Signed distance from ``p`` to the path boundary in pixels.

    Negative inside filled paths; strokes report distance to the centerline
    minus half the stroke width.
    """
    poly = geometry.flatten(path, tolerance)
    p = np.asarray(p, dtype=np.float64).reshape(1, 2)
    dist = float(geometry.polyline_distance(poly, p)[0])
    if path.fill is not None:
        return -dist if geometry.winding_numbers(poly, p)[0] != 0 else dist
    return dist - path.stroke_width / 2


@dataclass
class _Layer:
    index: int
    rows: slice
    cols: slice
    verts: np.ndarray
    filled: bool
    closed: bool
    seg: np.ndarray
    tpar: np.ndarray
    dist: np.ndarray
    sign: np.ndarray | None
    cov: np.ndarray
    slope: np.ndarray
    alpha: np.ndarray
    paint: np.ndarray
    prev: np.ndarray | None = None


def _rasterize(index: int, path: VectorPath, width: int, height: int, cfg: RasterConfig) -> _Layer | None:
    verts = sample_vertices(path.points, cfg.samples_per_segment)
    if not np.all(np.isfinite(verts)):
        raise ValueError(f"path {path.uid} has non-finite control points")
    filled = path.fill is not None
    reach = cfg.bandwidth + (0.0 if filled else path.stroke_width / 2)
    lo = verts.min(axis=0) - reach - 0.5
    hi = verts.max(axis=0) + reach - 0.5
    j0 = max(0, math.ceil(lo[0]))
    i0 = max(0, math.ceil(lo[1]))
    j1 = min(width, math.floor(hi[0]) + 1)
    i1 = min(height, math.floor(hi[1]) + 1)
    if j0 >= j1 or i0 >= i1:
        return None
    nx, ny = j1 - j0, i1 - i0
    dist, seg, tpar, inside = _backend.distance_field(verts, path.closed, filled, reach, j0, i0, nx, ny)
    if filled:
        sign = np.where(inside, -1.0, 1.0)
        d = sign * dist
    else:
        sign = None
        d = dist - path.stroke_width / 2
    cov, slope = _coverage_and_slope(d, cfg.bandwidth)
    paint = np.clip(path.paint, 0.0, 1.0)
    return _Layer(index, slice(i0, i1), slice(j0, j1), verts, filled, path.closed,
                  seg, tpar, dist, sign, cov, slope, cov * paint[3], paint)


def _forward(scene: Scene, cfg: RasterConfig, keep_tape: bool) -> tuple[np.ndarray, list[_Layer]]:
    bg = np.clip(scene.background, 0.0, 1.0)
    img = np.empty((scene.height, scene.width, 4))
    img[..., :3] = bg[:3] * bg[3]
    img[..., 3] = bg[3]
    tape = []
    for k, path in enumerate(scene.paths):
        layer = _rasterize(k, path, scene.width, scene.height, cfg)
        if layer is None:
            continue
        win = img[layer.rows, layer.cols]
        if keep_tape:
            layer.prev = win.copy()
            tape.append(layer)
        a = layer.alpha[..., None]
        win[..., :3] *= 1.0 - a
        win[..., :3] += layer.paint[:3] * a
        win[..., 3] *= 1.0 - layer.alpha
        win[..., 3] += layer.alpha
    return img, tape


def render(scene: Scene, cfg: RasterConfig = DEFAULT_CONFIG, supersample: int = 1) -> np.ndarray:
    """Render to an ``(H, W, 4)`` premultiplied RGBA array in [0, 1].

    ``supersample=s`` renders at ``s`` times the resolution and box-filters
    back down; it is meant for final output, not optimization.
    """
    if supersample > 1:
        big = scale_scene(scene, supersample)
        img = render(big, cfg)
        h, w = scene.height, scene.width
        return img.reshape(h, supersample, w, supersample, 4).mean(axis=(1, 3))
    img, _ = _forward(scene, cfg, keep_tape=False)
    return np.clip(img, 0.0, 1.0, out=img)


def scale_scene(scene: Scene, factor: float) -> Scene:
    out = scene.copy()
    out.width = int(round(scene.width * factor))
    out.height = int(round(scene.height * factor))
    for p in out.paths:
        p.points *= factor
        p.stroke_width *= factor
    return out


def backward(scene: Scene, grad_image: np.ndarray, cfg: RasterConfig = DEFAULT_CONFIG) -> ParamGradients:
    """Gradient of ``sum(grad_image * render(scene))`` w.r.t. every path parameter."""
    grad_image = np.asarray(grad_image, dtype=np.float64)
    if grad_image.shape[:2] != (scene.height, scene.width) or grad_image.shape[2:] not in ((3,), (4,)):
        raise ValueError(
            f"gradient image shape {grad_image.shape} does not match canvas "
            f"{scene.height}x{scene.width}x4"
        )
    if not np.any(grad_image):
        return ParamGradients.zeros(scene)
    _, tape = _forward(scene, cfg, keep_tape=True)
    return backward_from_tape(scene, tape, grad_image, cfg)


def forward_with_tape(scene: Scene, cfg: RasterConfig = DEFAULT_CONFIG) -> tuple[np.ndarray, list]:
    """Render and keep what ``backward_from_tape`` needs, to avoid a second pass."""
    img, tape = _forward(scene, cfg, keep_tape=True)
    return np.clip(img, 0.0, 1.0, out=img), tape


def backward_from_tape(scene: Scene, tape: list, grad_image: np.ndarray,
                       cfg: RasterConfig = DEFAULT_CONFIG) -> ParamGradients:
    G = np.zeros((scene.height, scene.width, 4))
    G[..., : grad_image.shape[2]] = grad_image
    grads = ParamGradients.zeros(scene)
    for layer in reversed(tape):
        path = scene.paths[layer.index]
        out = grads.paths[layer.index]
        Gw = G[layer.rows, layer.cols]
        alpha = layer.alpha
        prev = layer.prev
        paint = layer.paint
        d_alpha = np.einsum("ijc,ijc->ij", Gw[..., :3], paint[:3] - prev[..., :3])
        d_alpha += Gw[..., 3] * (1.0 - prev[..., 3])
        d_rgb = np.einsum("ijc,ij->c", Gw[..., :3], alpha)
        Gw *= (1.0 - alpha)[..., None]

        raw = path.paint
        inside_unit = (raw >= 0.0) & (raw <= 1.0)
        out.color[:3] += d_rgb * inside_unit[:3]
        out.color[3] += float(np.sum(d_alpha * layer.cov)) * inside_unit[3]

        g_d = d_alpha * paint[3] * layer.slope
        if not layer.filled:
            out.width += -0.5 * float(np.sum(g_d))
        active = (layer.seg >= 0) & (g_d != 0.0)
        if not np.any(active):
            continue
        ii, jj = np.nonzero(active)
        g = g_d[ii, jj]
        if layer.sign is not None:
            g = g * layer.sign[ii, jj]
        seg = layer.seg[ii, jj]
        t = layer.tpar[ii, jj]
        dist = layer.dist[ii, jj]
        verts = layer.verts
        nv = len(verts)
        a = verts[seg]
        b = verts[(seg + 1) % nv]
        px = jj + layer.cols.start + 0.5
        py = ii + layer.rows.start + 0.5
        q = a + t[:, None] * (b - a)
        diff = np.stack([px, py], axis=1) - q
        with np.errstate(invalid="ignore", divide="ignore"):
            normal = np.where(dist[:, None] > 0, diff / dist[:, None], 0.0)
        g_q = -g[:, None] * normal
        ga = g_q * (1.0 - t)[:, None]
        gb = g_q * t[:, None]
        gv = np.empty((nv, 2))
        ib = (seg + 1) % nv
        for c in range(2):
            gv[:, c] = np.bincount(seg, ga[:, c], minlength=nv) + np.bincount(ib, gb[:, c], minlength=nv)
        out.points += _vertex_to_points(gv, len(path.points), cfg.samples_per_segment)
    return grads
