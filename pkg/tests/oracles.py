"""Brute-force reference computations, written without the package's geometry code."""

import numpy as np


def dense_curve(points, closed, samples_per_segment=2000):
    """Sample every cubic on a fine uniform parameter grid."""
    pts = np.asarray(points, dtype=np.float64)
    t = np.linspace(0.0, 1.0, samples_per_segment + 1)[:, None]
    out = []
    for k in range(0, len(pts) - 1, 3):
        p0, p1, p2, p3 = pts[k:k + 4]
        s = 1.0 - t
        out.append(s**3 * p0 + 3 * s * s * t * p1 + 3 * s * t * t * p2 + t**3 * p3)
    poly = np.vstack(out)
    if closed:
        poly = np.vstack([poly, pts[:1]])
    return poly


def raycast_winding(poly, qx, qy):
    """Signed crossings of a rightward ray from (qx, qy) with a closed polyline."""
    x0, y0 = poly[:-1, 0], poly[:-1, 1]
    x1, y1 = poly[1:, 0], poly[1:, 1]
    total = 0
    upward = (y0 <= qy) & (y1 > qy)
    downward = (y1 <= qy) & (y0 > qy)
    hit = upward | downward
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x0 + (qy - y0) * (x1 - x0) / (y1 - y0)
    right = hit & (xi > qx)
    total += int(np.sum(right & upward)) - int(np.sum(right & downward))
    return total


def min_distance(poly, q):
    a = poly[:-1]
    ab = poly[1:] - a
    ap = np.asarray(q, dtype=np.float64) - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.divide(np.einsum("ij,ij->i", ap, ab), denom, out=np.zeros_like(denom), where=denom > 0), 0, 1)
    d = ap - t[:, None] * ab
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", d, d))))


def pixel_count_area(points, closed, width, height, sub=4):
    """Area by counting covered sub-pixel centres with the ray-cast test."""
    poly = dense_curve(points, closed, 400)
    xs = (np.arange(width * sub) + 0.5) / sub
    ys = (np.arange(height * sub) + 0.5) / sub
    count = 0
    x0, y0 = poly[:-1, 0], poly[:-1, 1]
    x1, y1 = poly[1:, 0], poly[1:, 1]
    for qy in ys:
        upward = (y0 <= qy) & (y1 > qy)
        downward = (y1 <= qy) & (y0 > qy)
        hit = upward | downward
        if not hit.any():
            continue
        xi = x0[hit] + (qy - y0[hit]) * (x1[hit] - x0[hit]) / (y1[hit] - y0[hit])
        sign = np.where(upward[hit], 1, -1)
        # winding at each x is the signed count of crossings to its right
        order = np.argsort(xi)
        xs_sorted, s_sorted = xi[order], sign[order]
        suffix = np.concatenate([np.cumsum(s_sorted[::-1])[::-1], [0]])
        idx = np.searchsorted(xs_sorted, xs, side="right")
        count += int(np.count_nonzero(suffix[idx] != 0))
    return count / (sub * sub)
