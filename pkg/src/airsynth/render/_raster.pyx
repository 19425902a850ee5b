# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled triangle rasterization kernel.

Semantics are shared with raster_py.fill_triangles: top-left fill rule on
pixel centers, perspective-correct depth via 1/z interpolation, strictly-less
z-test with first-written-wins on exact ties.
"""

import numpy as np
cimport numpy as cnp

from libc.math cimport floor, ceil


cdef inline bint _edge_accepts(double ax, double ay, double bx, double by) nogil:
    cdef double dy = by - ay
    if dy < 0.0:
        return True
    return dy == 0.0 and (bx - ax) > 0.0


def fill_triangles(double[:, :, ::1] pts, double[:, ::1] invz,
                   unsigned char[:, ::1] colors, int[::1] ids,
                   unsigned char[:, :, ::1] rgb, double[:, ::1] depth,
                   int[:, ::1] seg):
    cdef Py_ssize_t n = pts.shape[0]
    cdef Py_ssize_t height = seg.shape[0]
    cdef Py_ssize_t width = seg.shape[1]
    cdef Py_ssize_t t, px, py
    cdef double x0, y0, x1, y1, x2, y2, q0, q1, q2, tmp
    cdef double area, cx, cy, w0, w1, w2, q, z
    cdef double lox, hix, loy, hiy
    cdef Py_ssize_t xmin, xmax, ymin, ymax
    cdef bint a0, a1, a2, inside
    cdef int tid
    cdef unsigned char cr, cg, cb

    with nogil:
        for t in range(n):
            x0 = pts[t, 0, 0]; y0 = pts[t, 0, 1]
            x1 = pts[t, 1, 0]; y1 = pts[t, 1, 1]
            x2 = pts[t, 2, 0]; y2 = pts[t, 2, 1]
            area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
            if area == 0.0:
                continue
            q0 = invz[t, 0]; q1 = invz[t, 1]; q2 = invz[t, 2]
            if area < 0.0:
                tmp = x1; x1 = x2; x2 = tmp
                tmp = y1; y1 = y2; y2 = tmp
                tmp = q1; q1 = q2; q2 = tmp
                area = -area

            lox = x0
            if x1 < lox: lox = x1
            if x2 < lox: lox = x2
            hix = x0
            if x1 > hix: hix = x1
            if x2 > hix: hix = x2
            loy = y0
            if y1 < loy: loy = y1
            if y2 < loy: loy = y2
            hiy = y0
            if y1 > hiy: hiy = y1
            if y2 > hiy: hiy = y2

            xmin = <Py_ssize_t>floor(lox - 0.5)
            if xmin < 0: xmin = 0
            xmax = <Py_ssize_t>ceil(hix - 0.5) + 1
            if xmax > width: xmax = width
            ymin = <Py_ssize_t>floor(loy - 0.5)
            if ymin < 0: ymin = 0
            ymax = <Py_ssize_t>ceil(hiy - 0.5) + 1
            if ymax > height: ymax = height
            if xmin >= xmax or ymin >= ymax:
                continue

            a0 = _edge_accepts(x1, y1, x2, y2)
            a1 = _edge_accepts(x2, y2, x0, y0)
            a2 = _edge_accepts(x0, y0, x1, y1)
            tid = ids[t]
            cr = colors[t, 0]; cg = colors[t, 1]; cb = colors[t, 2]

            for py in range(ymin, ymax):
                cy = py + 0.5
                for px in range(xmin, xmax):
                    cx = px + 0.5
                    w0 = (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)
                    if w0 < 0.0 or (w0 == 0.0 and not a0):
                        continue
                    w1 = (x0 - x2) * (cy - y2) - (y0 - y2) * (cx - x2)
                    if w1 < 0.0 or (w1 == 0.0 and not a1):
                        continue
                    w2 = (x1 - x0) * (cy - y0) - (y1 - y0) * (cx - x0)
                    if w2 < 0.0 or (w2 == 0.0 and not a2):
                        continue
                    q = (w0 * q0 + w1 * q1 + w2 * q2) / area
                    if q <= 0.0:
                        continue
                    z = 1.0 / q
                    if z < depth[py, px]:
                        depth[py, px] = z
                        seg[py, px] = tid
                        rgb[py, px, 0] = cr
                        rgb[py, px, 1] = cg
                        rgb[py, px, 2] = cb
