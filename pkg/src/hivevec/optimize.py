"""Adam, learning-rate schedules, and the vectorization loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from hivevec import geometry
from hivevec.control import ControlConfig, control_step, should_fire
from hivevec.initialization import InitConfig, importance_from_image, sample_initial_paths
from hivevec.io.trace import RunTrace, encode_psnr
from hivevec.loss import composite_over, hive_loss, psnr, sive_loss
from hivevec.masks import MaskSet
from hivevec.raster import (
    ParamGradients,
    RasterConfig,
    Scene,
    backward_from_tape,
    forward_with_tape,
    render,
)
from hivevec.styles import style_preset

log = logging.getLogger(__name__)

MIN_STROKE_WIDTH = 1e-3
PSNR_EVERY = 25


class NumericalError(RuntimeError):
    """The loss became non-finite."""


@dataclass
class RunConfig:
    total_iters: int = 700
    warmup_iters: int = 50
    lr_start: float = 0.01
    lr_peak: float = 0.9
    lr_decay_from: float = 0.8
    lr_decay_to: float = 0.4
    color_lr: float = 0.1
    width_lr: float = 0.01
    mode: str = "sive"
    seed: int = 0
    adaptive_control: bool = True
    control: ControlConfig = field(default_factory=ControlConfig)
    init: InitConfig = field(default_factory=InitConfig)
    raster: RasterConfig = field(default_factory=RasterConfig)

    def __post_init__(self) -> None:
        self.mode = self.mode.lower()
        if self.mode not in ("sive", "hive"):
            raise ValueError(f"mode must be 'sive' or 'hive', got {self.mode!r}")
        if self.total_iters < 1:
            raise ValueError("total_iters must be >= 1")
        if self.warmup_iters < 0:
            raise ValueError("warmup_iters must be >= 0")
        for name in ("lr_start", "lr_peak", "lr_decay_from", "lr_decay_to", "color_lr", "width_lr"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def point_lr(self, iteration: int) -> float:
        return point_lr(iteration, self.total_iters, self.warmup_iters, self.lr_start,
                        self.lr_peak, self.lr_decay_from, self.lr_decay_to)


def point_lr(iteration: int, total_iters: int = 700, warmup_iters: int = 50, start: float = 0.01,
             peak: float = 0.9, decay_from: float = 0.8, decay_to: float = 0.4) -> float:
    """Control-point learning rate: linear warm-up, then exponential decay.

    Warm-up climbs from ``start`` toward ``peak`` over ``warmup_iters``; the
    decay then runs from ``decay_from`` to ``decay_to`` over the remaining
    iterations. The drop from ``peak`` to ``decay_from`` is intentional.
    """
    if not 0 <= iteration < total_iters:
        raise ValueError(f"iteration {iteration} outside [0, {total_iters})")
    if iteration < warmup_iters:
        return start + (peak - start) * iteration / warmup_iters
    span = total_iters - warmup_iters
    return decay_from * (decay_to / decay_from) ** ((iteration - warmup_iters) / span)


@dataclass
class _Moments:
    m_points: np.ndarray
    v_points: np.ndarray
    m_color: np.ndarray = field(default_factory=lambda: np.zeros(4))
    v_color: np.ndarray = field(default_factory=lambda: np.zeros(4))
    m_width: float = 0.0
    v_width: float = 0.0
    steps: int = 0


@dataclass
class AdamState:
    """Per-path Adam moments keyed by path uid.

    Paths that appear after a control event start from zero moments and
    their own bias-correction count; removed paths are forgotten.
    """

    beta1: float = 0.9
    beta2: float = 0.9
    eps: float = 1e-6
    step: int = 0
    moments: dict[int, _Moments] = field(default_factory=dict)

    def sync(self, scene: Scene) -> None:
        live = {p.uid for p in scene.paths}
        for uid in list(self.moments):
            if uid not in live:
                del self.moments[uid]
        for p in scene.paths:
            if p.uid not in self.moments:
                self.moments[p.uid] = _Moments(np.zeros_like(p.points), np.zeros_like(p.points))

    def is_congruent(self, scene: Scene) -> bool:
        return set(self.moments) == {p.uid for p in scene.paths} and all(
            self.moments[p.uid].m_points.shape == p.points.shape for p in scene.paths
        )


def _fold_polygon_gradient(grad_points: np.ndarray) -> np.ndarray:
    """Push handle gradients onto the corners they are derived from."""
    g = np.zeros_like(grad_points)
    g[0:-1:3] = geometry.corner_gradient(grad_points)
    return g


def _adam_update(m, v, g, t, lr, state: AdamState):
    m = state.beta1 * m + (1.0 - state.beta1) * g
    v = state.beta2 * v + (1.0 - state.beta2) * g * g
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    return m, v, lr * m_hat / (np.sqrt(v_hat) + state.eps)


def adam_step(scene: Scene, state: AdamState, grads: ParamGradients, lrs: dict) -> tuple[Scene, AdamState]:
    """One Adam update honoring each path's style constraints.

    ``lrs`` maps ``points``, ``color`` and ``width`` to learning rates.
    Colors are clamped to [0, 1] and widths kept positive afterwards.
    """
    if not grads.is_congruent(scene):
        raise ValueError("gradients are not congruent with the scene")
    state.sync(scene)
    state.step += 1
    out = scene.copy()
    for path, g in zip(out.paths, grads.paths):
        mom = state.moments[path.uid]
        mom.steps += 1
        t = mom.steps
        preset = style_preset(path.style)
        if preset.train_points:
            gp = _fold_polygon_gradient(g.points) if preset.polygon else g.points
            mom.m_points, mom.v_points, delta = _adam_update(mom.m_points, mom.v_points, gp, t, lrs["points"], state)
            if preset.polygon:
                corners = geometry.polygon_corners(path.points) - delta[0:-1:3]
                path.points = geometry.polygon_points(corners)
            else:
                path.points = path.points - delta
        mask = np.array([preset.train_rgb] * 3 + [preset.train_alpha], dtype=np.float64)
        gc = g.color * mask
        mom.m_color, mom.v_color, delta = _adam_update(mom.m_color, mom.v_color, gc, t, lrs["color"], state)
        paint = np.clip(path.paint - delta, 0.0, 1.0)
        if path.fill is not None:
            path.fill = paint
        else:
            path.stroke = paint
        if preset.train_width and path.stroke is not None:
            mom.m_width, mom.v_width, delta = _adam_update(mom.m_width, mom.v_width, g.width, t, lrs["width"], state)
            path.stroke_width = max(MIN_STROKE_WIDTH, float(path.stroke_width - delta))
    return out, state


def _region_seed(seed: int, region: int) -> list[int]:
    return [int(seed), 7, int(region)]


def initial_scene(target: np.ndarray, masks: MaskSet, importance: np.ndarray, cfg: RunConfig) -> Scene:
    """Sample paths per object region plus the background, tagging object and part."""
    h, w = target.shape[:2]
    scene = Scene(w, h)
    regions = [(i, m) for i, m in enumerate(masks.object_masks)]
    if masks.background_mask.any():
        regions.append((None, masks.background_mask))
    for k, (obj, region) in enumerate(regions):
        try:
            paths = sample_initial_paths(importance, region, cfg.init, seed=_region_seed(cfg.seed, k), target=target)
        except ValueError:
            # region holds no importance mass: fall back to uniform sampling inside it
            paths = sample_initial_paths(np.ones((h, w)), region, cfg.init, seed=_region_seed(cfg.seed, k), target=target)
        for p in paths:
            p.object_id = obj
            if obj is not None:
                col = min(w - 1, int(p.points[0, 0]))
                row = min(h - 1, int(p.points[0, 1]))
                for j, part in enumerate(masks.part_masks[obj]):
                    if part[row, col]:
                        p.part_id = j
                        break
            scene.add(p)
    return scene


def _evaluate(scene: Scene, target: np.ndarray, masks: MaskSet, cfg: RunConfig):
    img, tape = forward_with_tape(scene, cfg.raster)
    if cfg.mode == "hive":
        groups = [[k for k, p in enumerate(scene.paths) if p.object_id == i] for i in range(masks.num_objects)]
        object_runs = [forward_with_tape(scene.subset(idx), cfg.raster) for idx in groups]
        report = hive_loss(img, target, [r[0] for r in object_runs], [target] * masks.num_objects, masks)
    else:
        report = sive_loss(img, target, masks)
    if not math.isfinite(report.total):
        raise NumericalError(f"non-finite loss {report.total}")
    grads = backward_from_tape(scene, tape, report.grad_image, cfg.raster)
    if cfg.mode == "hive":
        for idx, (_, sub_tape), gi in zip(groups, object_runs, report.object_grad_images):
            if idx and np.any(gi):
                sub = scene.subset(idx)
                grads.accumulate(backward_from_tape(sub, sub_tape, gi, cfg.raster), idx)
    return img, report, grads


def run_vectorize(target: np.ndarray, masks: MaskSet | None = None, importance: np.ndarray | None = None,
                  cfg: RunConfig | None = None, init_scene: Scene | None = None,
                  callback=None) -> tuple[Scene, RunTrace]:
    """Fit vector paths to ``target`` and return the final scene and run trace.

    ``target`` is an ``(H, W, 3|4)`` unit-range image (straight alpha is
    flattened onto white). ``init_scene`` bypasses sampling. ``callback`` is
    called as ``callback(iteration, scene, loss)`` after each step.
    """
    cfg = cfg or RunConfig()
    target = np.asarray(target, dtype=np.float64)
    if target.ndim != 3 or target.shape[2] not in (3, 4):
        raise ValueError(f"target must be (H, W, 3|4), got {target.shape}")
    target = composite_over(target)
    h, w = target.shape[:2]
    if cfg.mode == "hive" and (masks is None or masks.num_objects == 0):
        raise ValueError("HIVE mode requires object masks")
    if masks is None:
        masks = MaskSet.whole_canvas(h, w)
    if tuple(masks.shape) != (h, w):
        raise ValueError(f"mask canvas {tuple(masks.shape)} does not match target {(h, w)}")
    if importance is None:
        importance = importance_from_image(target)

    scene = init_scene.copy() if init_scene is not None else initial_scene(target, masks, importance, cfg)
    problems = scene.violations()
    if problems:
        raise ValueError("invalid initial scene: " + "; ".join(problems[:5]))
    control_cfg = cfg.control
    if control_cfg.max_paths is None:
        control_cfg = ControlConfig(**{**control_cfg.__dict__, "max_paths": 4 * max(1, len(scene.paths))})

    trace = RunTrace()
    trace.append({
        "kind": "start", "width": w, "height": h, "initial_paths": len(scene.paths),
        "mode": cfg.mode, "seed": cfg.seed, "total_iters": cfg.total_iters,
        "adaptive_control": cfg.adaptive_control,
    })
    state = AdamState()
    state.sync(scene)
    for it in range(cfg.total_iters):
        img, report, grads = _evaluate(scene, target, masks, cfg)
        rec = {"kind": "iter", "iteration": it, "loss": report.total, "paths": len(scene.paths)}
        if it % PSNR_EVERY == 0:
            rec["psnr"] = encode_psnr(psnr(img, target))
        trace.append(rec)
        lrs = {"points": cfg.point_lr(it), "color": cfg.color_lr, "width": cfg.width_lr}
        scene, state = adam_step(scene, state, grads, lrs)
        if cfg.adaptive_control and should_fire(it, control_cfg):
            scene, event = control_step(scene, grads, report.grad_image, control_cfg,
                                        seed=[int(cfg.seed), 11, it], iteration=it)
            state.sync(scene)
            trace.append(event.to_record())
            if not event.is_empty:
                log.info("iter %d: pruned %d split %d cloned %d -> %d paths", it,
                         len(event.pruned), len(event.split), len(event.cloned), len(scene.paths))
        if callback is not None:
            callback(it, scene, report.total)

    final = render(scene, cfg.raster)
    final_report = sive_loss(final, target, masks)
    trace.append({
        "kind": "end", "final_paths": len(scene.paths),
        "final_psnr": encode_psnr(psnr(final, target)), "final_loss": final_report.total,
    })
    return scene, trace
