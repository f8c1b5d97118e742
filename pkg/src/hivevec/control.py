"""Adaptive primitive control: prune faint paths, split or clone struggling ones.

A control step runs in two phases. ``plan_event`` inspects the scene and
gradients and records a ``ControlEvent``; ``apply_event`` turns an event into
the post-step scene. Because the event holds every decision (including clone
directions and the uids handed to new paths), replaying it on the pre-step
scene reproduces the post-step scene exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hivevec import geometry
from hivevec.raster import ParamGradients, Scene

_REFERENCE_THRESHOLDS = {1024: 20000.0, 768: 10000.0}


def area_threshold(width: int, height: int) -> float:
    """Split-area threshold in px^2: 20000 at 1024, 10000 at 768, else area-scaled."""
    if width == height and width in _REFERENCE_THRESHOLDS:
        return _REFERENCE_THRESHOLDS[width]
    return 20000.0 * (width * height) / (1024.0 * 1024.0)


@dataclass
class ControlConfig:
    tau_opacity: float = 0.05
    tau_c: float = 1e-5
    tau_a: float | None = None
    start_iter: int = 200
    interval: int = 25
    indicator_points: int = 16
    max_paths: int | None = None

    def __post_init__(self) -> None:
        if not (self.tau_opacity > 0 and self.tau_c > 0):
            raise ValueError("thresholds must be positive")
        if self.tau_a is not None and not self.tau_a > 0:
            raise ValueError("tau_a must be positive")
        if self.start_iter < 1 or self.interval < 1:
            raise ValueError("start_iter and interval must be >= 1")
        if self.indicator_points < 1:
            raise ValueError("indicator_points must be >= 1")
        if self.max_paths is not None and self.max_paths < 1:
            raise ValueError("max_paths must be >= 1")

    def area_threshold(self, scene: Scene) -> float:
        return self.tau_a if self.tau_a is not None else area_threshold(scene.width, scene.height)


@dataclass
class ControlEvent:
    iteration: int
    pruned: list[int] = field(default_factory=list)
    split: list[int] = field(default_factory=list)
    cloned: list[tuple[int, tuple[float, float]]] = field(default_factory=list)
    new_uids: list[int] = field(default_factory=list)
    paths_before: int = 0
    paths_after: int = 0

    @property
    def is_empty(self) -> bool:
        return not (self.pruned or self.split or self.cloned)

    def to_record(self) -> dict:
        return {
            "kind": "control",
            "iteration": self.iteration,
            "pruned": list(self.pruned),
            "split": list(self.split),
            "cloned": [[uid, [float(d[0]), float(d[1])]] for uid, d in self.cloned],
            "new_uids": list(self.new_uids),
            "paths_before": self.paths_before,
            "paths_after": self.paths_after,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ControlEvent":
        return cls(
            iteration=int(rec["iteration"]),
            pruned=[int(u) for u in rec.get("pruned", [])],
            split=[int(u) for u in rec.get("split", [])],
            cloned=[(int(u), (float(d[0]), float(d[1]))) for u, d in rec.get("cloned", [])],
            new_uids=[int(u) for u in rec.get("new_uids", [])],
            paths_before=int(rec.get("paths_before", 0)),
            paths_after=int(rec.get("paths_after", 0)),
        )


def should_fire(iteration: int, cfg: ControlConfig) -> bool:
    if iteration < 0:
        raise ValueError("iteration must be >= 0")
    return iteration >= cfg.start_iter and (iteration - cfg.start_iter) % cfg.interval == 0


def gradient_intensity_map(grad_image) -> np.ndarray:
    """Per-pixel L2 norm of the loss gradient across channels, peak-normalized."""
    g = np.asarray(grad_image, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient image contains non-finite values")
    mag = np.sqrt(np.sum(g * g, axis=-1))
    peak = mag.max() if mag.size else 0.0
    return mag / peak if peak > 0 else np.zeros_like(mag)


def sample_indicator_points(intensity, n: int, seed) -> np.ndarray:
    """Draw ``n`` pixel centres with probability proportional to ``intensity``."""
    m = np.asarray(intensity, dtype=np.float64)
    total = m.sum()
    if not total > 0 or n <= 0:
        return np.zeros((0, 2))
    rng = np.random.default_rng(seed)
    picks = rng.choice(m.size, size=n, p=(m / total).ravel())
    rows, cols = np.divmod(picks, m.shape[1])
    return np.stack([cols + 0.5, rows + 0.5], axis=1).astype(np.float64)


def positional_gradient_strength(grad_points: np.ndarray) -> float:
    return float(np.max(np.hypot(grad_points[:, 0], grad_points[:, 1]))) if len(grad_points) else 0.0


def _clone_direction(grad_points: np.ndarray) -> tuple[float, float]:
    # descent direction: against the mean positional gradient
    d = -grad_points.mean(axis=0)
    norm = float(np.hypot(*d))
    if not norm > 0:
        k = int(np.argmax(np.hypot(grad_points[:, 0], grad_points[:, 1])))
        d = -grad_points[k]
        norm = float(np.hypot(*d))
    if not norm > 0:
        return (1.0, 0.0)
    return (float(d[0] / norm), float(d[1] / norm))


def _contains_any(path: geometry.VectorPath, points: np.ndarray) -> bool:
    if len(points) == 0:
        return False
    poly = geometry.flatten(path)
    if path.closed and path.fill is not None:
        return bool(np.any(geometry.winding_numbers(poly, points) != 0))
    if path.closed:
        return bool(np.any(geometry.winding_numbers(poly, points) != 0)) or bool(
            np.any(geometry.polyline_distance(poly, points) <= path.stroke_width / 2))
    return bool(np.any(geometry.polyline_distance(poly, points) <= path.stroke_width / 2))


def plan_event(scene: Scene, grads: ParamGradients, grad_image, cfg: ControlConfig, seed,
               iteration: int = 0) -> ControlEvent:
    if not grads.is_congruent(scene):
        raise ValueError("gradients are not congruent with the scene")
    event = ControlEvent(iteration, paths_before=len(scene.paths))
    survivors = []
    for i, path in enumerate(scene.paths):
        if path.opacity < cfg.tau_opacity:
            event.pruned.append(path.uid)
        else:
            survivors.append(i)

    indicators = sample_indicator_points(gradient_intensity_map(grad_image), cfg.indicator_points, seed)
    candidates = []
    for i in survivors:
        g = positional_gradient_strength(grads[i].points)
        if g > cfg.tau_c and _contains_any(scene.paths[i], indicators):
            candidates.append((g, i))
    # strongest first; ties resolved by paint order
    candidates.sort(key=lambda c: (-c[0], c[1]))
    budget = len(candidates)
    if cfg.max_paths is not None:
        budget = max(0, min(budget, cfg.max_paths - len(survivors)))
    chosen = sorted(i for _, i in candidates[:budget])

    tau_a = cfg.area_threshold(scene)
    next_uid = scene.next_uid
    for i in chosen:
        path = scene.paths[i]
        if path.closed and geometry.path_area(path) > tau_a:
            event.split.append(path.uid)
            event.new_uids.extend([next_uid, next_uid + 1])
            next_uid += 2
        else:
            event.cloned.append((path.uid, _clone_direction(grads[i].points)))
            event.new_uids.append(next_uid)
            next_uid += 1
    event.paths_after = len(survivors) + len(event.split) + len(event.cloned)
    return event


def apply_event(scene: Scene, event: ControlEvent) -> Scene:
    """Post-step scene for ``event``; the input scene is left untouched."""
    pruned = set(event.pruned)
    split = set(event.split)
    cloned = dict(event.cloned)
    new_uids = iter(event.new_uids)
    out = Scene(scene.width, scene.height, [], scene.background.copy(), scene.next_uid)
    for path in scene.paths:
        if path.uid in pruned:
            continue
        if path.uid in split:
            for child in geometry.split_path(path):
                child.uid = next(new_uids)
                out.add(child)
        elif path.uid in cloned:
            out.add(path.copy())
            twin = geometry.clone_path(path, cloned[path.uid])
            twin.uid = next(new_uids)
            out.add(twin)
        else:
            out.add(path.copy())
    return out


def control_step(scene: Scene, grads: ParamGradients, grad_image, cfg: ControlConfig, seed,
                 iteration: int = 0) -> tuple[Scene, ControlEvent]:
    """One pass of pruning and split/clone control over ``scene``."""
    event = plan_event(scene, grads, grad_image, cfg, seed, iteration)
    return apply_event(scene, event), event
