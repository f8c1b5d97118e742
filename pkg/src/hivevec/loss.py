"""Masked reconstruction losses, PSNR, and external gradient injection.

Each masked term is the mean over the canvas (all RGB values) of the
squared masked difference, so a term's weight grows with its mask area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hivevec.masks import MaskSet
from hivevec.raster import DEFAULT_CONFIG, ParamGradients, RasterConfig, Scene, backward

PSNR_EXACT = math.inf


@dataclass
class LossReport:
    total: float
    per_mask: list[tuple[str, float]]
    grad_image: np.ndarray
    object_grad_images: list[np.ndarray] = field(default_factory=list)


def _rgb(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] not in (3, 4):
        raise ValueError(f"expected an (H, W, 3|4) image, got shape {image.shape}")
    return image[..., :3]


def _check_same(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise ValueError(f"{what}: dimension mismatch {a.shape[:2]} vs {b.shape[:2]}")


def _masked_term(render, target, mask, grad_out) -> float:
    diff = render - target
    m = np.asarray(mask, dtype=np.float64)[..., None]
    norm = diff.size
    value = float(np.sum(m * diff * diff)) / norm
    grad_out[..., :3] += (2.0 / norm) * m * diff
    return value


def _check_masks(masks: MaskSet, shape) -> None:
    if tuple(masks.shape) != tuple(shape):
        raise ValueError(f"mask canvas {tuple(masks.shape)} does not match image {tuple(shape)}")


def sive_loss(render, target, masks: MaskSet, include_background: bool = True) -> LossReport:
    """Object-level masked loss: one term per object mask plus the background."""
    x = _rgb(render)
    target = _rgb(target)
    _check_same(x, target, "sive_loss")
    _check_masks(masks, x.shape[:2])
    grad = np.zeros(x.shape[:2] + (4,))
    per_mask = [(f"object-{i}", _masked_term(x, target, m, grad)) for i, m in enumerate(masks.object_masks)]
    if include_background:
        per_mask.append(("background", _masked_term(x, target, masks.background_mask, grad)))
    return LossReport(math.fsum(v for _, v in per_mask), per_mask, grad)


def hive_loss(render, target, per_object_renders, per_object_targets, masks: MaskSet,
              include_background: bool = True) -> LossReport:
    """Object-level terms on the full render plus part-level terms per object render."""
    report = sive_loss(render, target, masks, include_background)
    if len(per_object_renders) != masks.num_objects or len(per_object_targets) != masks.num_objects:
        raise ValueError(
            f"need {masks.num_objects} object renders and targets, got "
            f"{len(per_object_renders)} and {len(per_object_targets)}"
        )
    per_mask = list(report.per_mask)
    object_grads = []
    for i, (xi, ti) in enumerate(zip(per_object_renders, per_object_targets)):
        xi = _rgb(xi)
        ti = _rgb(ti)
        _check_same(xi, report.grad_image, f"object render {i}")
        _check_same(ti, report.grad_image, f"object target {i}")
        gi = np.zeros(xi.shape[:2] + (4,))
        for j, part in enumerate(masks.part_masks[i]):
            per_mask.append((f"part-{i}-{j}", _masked_term(xi, ti, part, gi)))
        object_grads.append(gi)
    return LossReport(math.fsum(v for _, v in per_mask), per_mask, report.grad_image, object_grads)


def inject_gradient(scene: Scene, grad_image, cfg: RasterConfig = DEFAULT_CONFIG) -> ParamGradients:
    """Route any per-pixel gradient (for example a score-distillation signal)
    through the rasterizer into path parameter gradients."""
    return backward(scene, grad_image, cfg)


def psnr(a, b) -> float:
    """PSNR in dB over RGB for unit-range images; ``PSNR_EXACT`` when identical."""
    a = _rgb(a)
    b = _rgb(b)
    _check_same(a, b, "psnr")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_EXACT
    return 10.0 * math.log10(1.0 / mse)


def composite_over(image, background=(1.0, 1.0, 1.0)) -> np.ndarray:
    """Flatten a straight-alpha RGBA image onto an opaque background color."""
    image = np.asarray(image, dtype=np.float64)
    if image.shape[-1] == 3:
        rgb, alpha = image, np.ones(image.shape[:2])
    else:
        rgb, alpha = image[..., :3], image[..., 3]
    out = np.empty(image.shape[:2] + (4,))
    out[..., :3] = rgb * alpha[..., None] + np.asarray(background[:3]) * (1.0 - alpha[..., None])
    out[..., 3] = 1.0
    return out
