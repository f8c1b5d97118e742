"""Pure numpy distance-field kernel; same contract as the compiled ``_kernels``."""

from __future__ import annotations

import math

import numpy as np


def distance_field(verts, closed, filled, reach, x0, y0, nx, ny):
    """Nearest-edge distance and nonzero-winding inside test on a pixel window.

    Only pixels within ``reach`` of some edge receive a real distance; every
    other pixel reports exactly ``reach`` with segment index -1. Pixel ``(i, j)``
    of the window is sampled at ``(x0 + j + 0.5, y0 + i + 0.5)``.
    Returns ``(dist, seg, t, inside)``.
    """
    verts = np.ascontiguousarray(verts, dtype=np.float64)
    nv = len(verts)
    best = np.full((ny, nx), reach * reach)
    seg = np.full((ny, nx), -1, dtype=np.int32)
    tpar = np.zeros((ny, nx))
    ne = nv if closed else nv - 1
    for e in range(ne):
        ax, ay = verts[e]
        bx, by = verts[(e + 1) % nv]
        jlo = max(x0, math.ceil(min(ax, bx) - reach - 0.5))
        jhi = min(x0 + nx - 1, math.floor(max(ax, bx) + reach - 0.5))
        ilo = max(y0, math.ceil(min(ay, by) - reach - 0.5))
        ihi = min(y0 + ny - 1, math.floor(max(ay, by) + reach - 0.5))
        if jlo > jhi or ilo > ihi:
            continue
        px = np.arange(jlo, jhi + 1) + 0.5
        py = (np.arange(ilo, ihi + 1) + 0.5)[:, None]
        abx = bx - ax
        aby = by - ay
        len2 = abx * abx + aby * aby
        if len2 > 0.0:
            tt = ((px - ax) * abx + (py - ay) * aby) / len2
            tt = np.minimum(np.maximum(tt, 0.0), 1.0)
        else:
            tt = np.zeros((len(py), len(px)))
        dx = px - (ax + tt * abx)
        dy = py - (ay + tt * aby)
        d2 = dx * dx + dy * dy
        rows = slice(ilo - y0, ihi - y0 + 1)
        cols = slice(jlo - x0, jhi - x0 + 1)
        sub = best[rows, cols]
        closer = d2 < sub
        sub[closer] = d2[closer]
        seg[rows, cols][closer] = e
        tpar[rows, cols][closer] = tt[closer]
    dist = np.sqrt(best)

    inside = np.zeros((ny, nx), dtype=bool)
    if filled:
        wind = np.zeros((ny, nx + 1), dtype=np.int32)
        for e in range(nv):
            ax, ay = verts[e]
            bx, by = verts[(e + 1) % nv]
            if ay == by:
                continue
            ilo = max(y0, math.ceil(min(ay, by) - 0.5))
            ihi = min(y0 + ny - 1, math.floor(max(ay, by) - 0.5) + 1)
            if ilo > ihi:
                continue
            py = np.arange(ilo, ihi + 1) + 0.5
            if by > ay:
                hit = (ay <= py) & (py < by)
                step = 1
            else:
                hit = (by <= py) & (py < ay)
                step = -1
            rows = np.arange(ilo, ihi + 1)[hit] - y0
            if len(rows) == 0:
                continue
            xc = ax + (py[hit] - ay) * (bx - ax) / (by - ay)
            k = np.clip(np.ceil(xc - 0.5) - x0, 0, nx).astype(np.int64)
            np.add.at(wind, (rows, np.zeros_like(rows)), step)
            np.add.at(wind, (rows, k), -step)
        inside = np.cumsum(wind[:, :nx], axis=1) != 0
    return dist, seg, tpar, inside
