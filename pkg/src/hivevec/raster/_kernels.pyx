# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled distance-field kernel. Mirrors ``_fallback.distance_field``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, ceil

cnp.import_array()


cdef inline double _fmin(double a, double b) nogil:
    return a if a < b else b


cdef inline double _fmax(double a, double b) nogil:
    return a if a > b else b


cdef inline Py_ssize_t _clampi(double x, Py_ssize_t lo, Py_ssize_t hi) nogil:
    # NaN and out-of-range coordinates never reach the integer cast.
    if not (x >= lo):
        return lo
    if x > hi:
        return hi
    return <Py_ssize_t> x


def distance_field(verts, bint closed, bint filled, double reach,
                   Py_ssize_t x0, Py_ssize_t y0, Py_ssize_t nx, Py_ssize_t ny):
    cdef double[:, ::1] v = np.ascontiguousarray(verts, dtype=np.float64)
    cdef Py_ssize_t nv = v.shape[0]
    best_arr = np.full((ny, nx), reach * reach)
    seg_arr = np.full((ny, nx), -1, dtype=np.int32)
    t_arr = np.zeros((ny, nx))
    inside_arr = np.zeros((ny, nx), dtype=np.uint8)
    cdef double[:, ::1] best = best_arr
    cdef int[:, ::1] seg = seg_arr
    cdef double[:, ::1] tpar = t_arr
    cdef unsigned char[:, ::1] inside = inside_arr
    cdef int[:, ::1] wind
    cdef Py_ssize_t e, ne, i, j, ilo, ihi, jlo, jhi, k
    cdef double ax, ay, bx, by, abx, aby, len2, px, py, tt, dx, dy, d2, xc
    cdef int step, acc

    ne = nv if closed else nv - 1
    with nogil:
        for e in range(ne):
            ax = v[e, 0]
            ay = v[e, 1]
            bx = v[(e + 1) % nv, 0]
            by = v[(e + 1) % nv, 1]
            jlo = _clampi(ceil(_fmin(ax, bx) - reach - 0.5), x0, x0 + nx)
            jhi = _clampi(floor(_fmax(ax, bx) + reach - 0.5), x0 - 1, x0 + nx - 1)
            ilo = _clampi(ceil(_fmin(ay, by) - reach - 0.5), y0, y0 + ny)
            ihi = _clampi(floor(_fmax(ay, by) + reach - 0.5), y0 - 1, y0 + ny - 1)
            abx = bx - ax
            aby = by - ay
            len2 = abx * abx + aby * aby
            for i in range(ilo, ihi + 1):
                py = i + 0.5
                for j in range(jlo, jhi + 1):
                    px = j + 0.5
                    if len2 > 0.0:
                        tt = ((px - ax) * abx + (py - ay) * aby) / len2
                        tt = _fmin(_fmax(tt, 0.0), 1.0)
                    else:
                        tt = 0.0
                    dx = px - (ax + tt * abx)
                    dy = py - (ay + tt * aby)
                    d2 = dx * dx + dy * dy
                    if d2 < best[i - y0, j - x0]:
                        best[i - y0, j - x0] = d2
                        seg[i - y0, j - x0] = <int> e
                        tpar[i - y0, j - x0] = tt
        for i in range(ny):
            for j in range(nx):
                best[i, j] = sqrt(best[i, j])

    if filled:
        wind = np.zeros((ny, nx + 1), dtype=np.int32)
        with nogil:
            for e in range(nv):
                ax = v[e, 0]
                ay = v[e, 1]
                bx = v[(e + 1) % nv, 0]
                by = v[(e + 1) % nv, 1]
                if ay == by:
                    continue
                ilo = _clampi(ceil(_fmin(ay, by) - 0.5), y0, y0 + ny)
                ihi = _clampi(floor(_fmax(ay, by) - 0.5) + 1, y0 - 1, y0 + ny - 1)
                for i in range(ilo, ihi + 1):
                    py = i + 0.5
                    if by > ay:
                        if not (ay <= py and py < by):
                            continue
                        step = 1
                    else:
                        if not (by <= py and py < ay):
                            continue
                        step = -1
                    xc = ax + (py - ay) * (bx - ax) / (by - ay)
                    k = _clampi(ceil(xc - 0.5) - x0, 0, nx)
                    wind[i - y0, 0] += step
                    wind[i - y0, k] -= step
            for i in range(ny):
                acc = 0
                for j in range(nx):
                    acc = acc + wind[i, j]
                    inside[i, j] = acc != 0
    return best_arr, seg_arr, t_arr, inside_arr.view(bool)
