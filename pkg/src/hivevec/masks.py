"""Object and part masks, background derivation, importance-map binarization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PART_LEAK_TOLERANCE = 0.01


def derive_background(object_masks) -> np.ndarray:
    """Pixelwise complement of the union of the object masks."""
    masks = [np.asarray(m, dtype=bool) for m in object_masks]
    if not masks:
        raise ValueError("need at least one object mask")
    shape = masks[0].shape
    for i, m in enumerate(masks):
        if m.shape != shape:
            raise ValueError(f"object mask {i} has shape {m.shape}, expected {shape}")
    return ~np.logical_or.reduce(masks)


def binarize(importance, threshold: float = 0.5) -> np.ndarray:
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie strictly between 0 and 1")
    return np.asarray(importance, dtype=np.float64) > threshold


def as_importance(values) -> np.ndarray:
    """Validate a grayscale importance map: unit-range floats, not all zero."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"importance map must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("importance values must lie in [0, 1]")
    if not np.any(arr > 0):
        raise ValueError("importance map is all zero")
    return arr


@dataclass
class MaskSet:
    object_masks: list[np.ndarray]
    part_masks: list[list[np.ndarray]]
    background_mask: np.ndarray
    shape: tuple[int, int] = field(default=(0, 0))

    def __post_init__(self) -> None:
        self.object_masks = [np.asarray(m, dtype=bool) for m in self.object_masks]
        self.part_masks = [[np.asarray(m, dtype=bool) for m in parts] for parts in self.part_masks]
        self.background_mask = np.asarray(self.background_mask, dtype=bool)
        if self.shape == (0, 0):
            self.shape = tuple(self.background_mask.shape)

    @classmethod
    def from_objects(cls, object_masks, part_masks=None) -> "MaskSet":
        objects = [np.asarray(m, dtype=bool) for m in object_masks]
        parts = part_masks if part_masks is not None else [[] for _ in objects]
        if len(parts) != len(objects):
            raise ValueError(f"{len(parts)} part-mask lists for {len(objects)} objects")
        return cls(objects, parts, derive_background(objects))

    @classmethod
    def whole_canvas(cls, height: int, width: int) -> "MaskSet":
        """No objects; the background mask covers everything."""
        return cls([], [], np.ones((height, width), dtype=bool))

    @property
    def num_objects(self) -> int:
        return len(self.object_masks)

    @property
    def num_parts(self) -> int:
        return sum(len(p) for p in self.part_masks)


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    detail: str


def validate(maskset: MaskSet) -> list[Violation]:
    """Check every MaskSet invariant and report problems instead of raising."""
    report = []
    shape = tuple(maskset.shape)
    dims_ok = True

    def check_dims(mask, where):
        nonlocal dims_ok
        if mask.shape != shape:
            dims_ok = False
            report.append(Violation("dimension", where, f"shape {mask.shape} != canvas {shape}"))
            return False
        return True

    check_dims(maskset.background_mask, "background")
    objects_ok = [check_dims(m, f"object {i}") for i, m in enumerate(maskset.object_masks)]
    if len(maskset.part_masks) != len(maskset.object_masks):
        report.append(Violation(
            "count", "parts",
            f"{len(maskset.part_masks)} part lists for {len(maskset.object_masks)} objects",
        ))
    for i, parts in enumerate(maskset.part_masks):
        for j, part in enumerate(parts):
            if not check_dims(part, f"part {i}.{j}"):
                continue
            if i >= len(maskset.object_masks) or not objects_ok[i]:
                continue
            area = int(part.sum())
            if area == 0:
                continue
            leaked = int(np.count_nonzero(part & ~maskset.object_masks[i]))
            if leaked / area > PART_LEAK_TOLERANCE:
                report.append(Violation(
                    "subset", f"part {i}.{j}",
                    f"{leaked / area:.1%} of part pixels lie outside object {i}",
                ))

    if dims_ok:
        if maskset.object_masks:
            expected = derive_background(maskset.object_masks)
        else:
            expected = np.ones(shape, dtype=bool)
        mismatch = int(np.count_nonzero(expected != maskset.background_mask))
        if mismatch:
            report.append(Violation(
                "background", "background",
                f"{mismatch} pixels differ from the complement of the object union",
            ))
    return report
