"""Path initialization from an importance map."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from hivevec.geometry import VectorPath, square_points
from hivevec.styles import StyleClass, StylePreset, style_preset

UNIFORM_GUARD = 1e-6
GRAY = (0.5, 0.5, 0.5, 1.0)

__all__ = [
    "InitConfig",
    "importance_from_image",
    "initial_first_point_distribution",
    "sample_initial_paths",
    "style_preset",
]


@dataclass
class InitConfig:
    num_paths_per_region: int = 16
    segments_per_path: int = 4
    radius_fraction: float = 0.0005
    seed: int = 0
    style: StyleClass = StyleClass.ICONOGRAPHY
    # side of pixel-art / low-poly squares, as a fraction of the larger canvas side
    square_fraction: float = 1.0 / 32.0
    # overrides the style's default stroke width for stroked styles
    stroke_width: float | None = None

    def __post_init__(self) -> None:
        self.style = StyleClass.parse(self.style) if isinstance(self.style, str) else StyleClass(self.style)
        if self.num_paths_per_region < 1 or self.segments_per_path < 1:
            raise ValueError("path and segment counts must be >= 1")
        if not 0.0 < self.radius_fraction < 0.1:
            raise ValueError("radius_fraction must lie in (0, 0.1)")
        if not 0.0 < self.square_fraction <= 1.0:
            raise ValueError("square_fraction must lie in (0, 1]")
        if self.stroke_width is not None:
            if not self.stroke_width > 0:
                raise ValueError("stroke_width must be positive")
            if style_preset(self.style).filled:
                raise ValueError(f"style {self.style.value} has no stroke; stroke_width does not apply")


def luminance(image: np.ndarray) -> np.ndarray:
    rgb = np.asarray(image, dtype=np.float64)[..., :3]
    return rgb @ np.array([0.299, 0.587, 0.114])


def importance_from_image(target: np.ndarray) -> np.ndarray:
    """Sobel gradient magnitude of luminance scaled to a peak of 1.

    A featureless image gives a small uniform map so sampling stays defined.
    """
    lum = luminance(target)
    gx = ndimage.sobel(lum, axis=1, mode="nearest")
    gy = ndimage.sobel(lum, axis=0, mode="nearest")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if not peak > 1e-12:
        return np.full(lum.shape, UNIFORM_GUARD)
    return mag / peak


def initial_first_point_distribution(importance: np.ndarray, region_mask: np.ndarray | None = None) -> np.ndarray:
    """Softmax (temperature 1) of the map over its positive support inside the region."""
    imp = np.asarray(importance, dtype=np.float64)
    support = imp > 0
    if region_mask is not None:
        region = np.asarray(region_mask, dtype=bool)
        if region.shape != imp.shape:
            raise ValueError(f"region mask shape {region.shape} != importance shape {imp.shape}")
        support &= region
    if not np.any(support):
        raise ValueError("importance map has no mass inside the region")
    logits = np.where(support, imp, -np.inf)
    w = np.exp(logits - imp[support].max())
    return w / w.sum()


def _paint(preset: StylePreset, target: np.ndarray | None, first: np.ndarray) -> np.ndarray:
    if preset.fixed_rgb is not None:
        return np.array([*preset.fixed_rgb, 1.0])
    if target is None:
        return np.array(GRAY)
    h, w = target.shape[:2]
    col = min(w - 1, max(0, int(first[0])))
    row = min(h - 1, max(0, int(first[1])))
    return np.array([*np.clip(target[row, col, :3], 0.0, 1.0), 1.0])


def sample_initial_paths(importance: np.ndarray, region_mask: np.ndarray | None, cfg: InitConfig,
                         seed: int | None = None, target: np.ndarray | None = None) -> list[VectorPath]:
    """Draw ``cfg.num_paths_per_region`` paths whose first points follow the map.

    Remaining control points fall uniformly in a disc of radius
    ``radius_fraction * max(H, W)`` around the first point. Polygon styles
    place a square centred on the sample instead.
    """
    probs = initial_first_point_distribution(importance, region_mask)
    h, w = probs.shape
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    picks = rng.choice(h * w, size=cfg.num_paths_per_region, p=probs.ravel())
    preset = style_preset(cfg.style)
    radius = cfg.radius_fraction * max(h, w)
    nrest = 3 * cfg.segments_per_path
    paths = []
    for flat in picks:
        row, col = divmod(int(flat), w)
        first = np.array([col + 0.5, row + 0.5])
        if preset.polygon:
            points = square_points(first, cfg.square_fraction * max(h, w))
        else:
            r = radius * np.sqrt(rng.uniform(size=nrest))
            theta = rng.uniform(0.0, 2.0 * np.pi, size=nrest)
            rest = first + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
            points = np.vstack([first, rest])
        paint = _paint(preset, target, first)
        paths.append(VectorPath(
            points,
            closed=preset.closed,
            fill=paint if preset.filled else None,
            stroke=None if preset.filled else paint,
            stroke_width=preset.default_width if cfg.stroke_width is None else cfg.stroke_width,
            style=preset.style,
        ))
    return paths
