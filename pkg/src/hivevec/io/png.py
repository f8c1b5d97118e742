"""PNG ingestion for targets, masks and importance maps (8- and 16-bit)."""

from __future__ import annotations

import numpy as np
import png


class PngError(ValueError):
    pass


def _decode(path) -> tuple[np.ndarray, int]:
    """Raw samples as ``(H, W, planes)`` integers plus the bit depth."""
    try:
        width, height, rows, info = png.Reader(filename=str(path)).asDirect()
        data = np.array([np.asarray(r, dtype=np.uint32) for r in rows])
    except FileNotFoundError:
        raise
    except (png.Error, OSError, ValueError) as exc:
        raise PngError(f"{path}: cannot decode PNG ({exc})") from None
    if width == 0 or height == 0:
        raise PngError(f"{path}: image has zero size")
    planes = info["planes"]
    return data.reshape(height, width, planes), info["bitdepth"]


def read_png(path) -> np.ndarray:
    """RGBA image as unit-range floats (straight alpha)."""
    raw, depth = _decode(path)
    x = raw.astype(np.float64) / float(2**depth - 1)
    h, w, planes = x.shape
    out = np.ones((h, w, 4))
    if planes in (1, 2):
        out[..., :3] = x[..., :1]
    else:
        out[..., :3] = x[..., :3]
    if planes in (2, 4):
        out[..., 3] = x[..., -1]
    return out


def read_gray(path) -> np.ndarray:
    """Single-channel unit-range floats; color files are reduced to luminance."""
    raw, depth = _decode(path)
    x = raw.astype(np.float64) / float(2**depth - 1)
    if x.shape[2] in (1, 2):
        return x[..., 0]
    return x[..., :3] @ np.array([0.299, 0.587, 0.114])


def read_mask(path) -> np.ndarray:
    """Binary mask: a sample is set when it is at least 128 on the 8-bit scale."""
    raw, depth = _decode(path)
    gray = raw[..., 0] if raw.shape[2] in (1, 2) else np.round(
        raw[..., :3].astype(np.float64) @ np.array([0.299, 0.587, 0.114]))
    threshold = 128 * (2**depth - 1) / 255.0
    return gray >= threshold


def write_png(path, image: np.ndarray) -> None:
    """Write a unit-range ``(H, W)``, ``(H, W, 3)`` or ``(H, W, 4)`` array as 8-bit PNG."""
    img = np.asarray(image, dtype=np.float64)
    q = np.round(np.clip(img, 0.0, 1.0) * 255).astype(np.uint8)
    if q.ndim == 2:
        writer = png.Writer(q.shape[1], q.shape[0], greyscale=True, bitdepth=8)
        rows = q
    else:
        planes = q.shape[2]
        writer = png.Writer(q.shape[1], q.shape[0], greyscale=False, alpha=planes == 4, bitdepth=8)
        rows = q.reshape(q.shape[0], -1)
    with open(path, "wb") as fh:
        writer.write(fh, rows.tolist())
