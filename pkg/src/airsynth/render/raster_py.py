"""Pure-NumPy triangle rasterization kernel (fallback when the compiled
extension is unavailable). Semantics match the Cython kernel exactly:
top-left fill rule on pixel centers, perspective-correct depth from 1/z,
strictly-less z-test with first-written-wins ties."""

from __future__ import annotations

import numpy as np


def _edge_accepts(ax, ay, bx, by) -> bool:
    # boundary pixels belong to the triangle whose edge runs upward, or
    # horizontally left-to-right (top-left rule for positive-area winding)
    dy = by - ay
    return dy < 0.0 or (dy == 0.0 and (bx - ax) > 0.0)


def fill_triangles(pts, invz, colors, ids, rgb, depth, seg):
    """Rasterize triangles into shared rgb / depth / segmap buffers.

    pts: (n, 3, 2) float64 screen coords; invz: (n, 3) float64 1/z_cam;
    colors: (n, 3) uint8; ids: (n,) int32 (0 = no segmap write).
    Buffers are updated in place.
    """
    height, width = seg.shape
    n = pts.shape[0]
    for t in range(n):
        x0, y0 = pts[t, 0]
        x1, y1 = pts[t, 1]
        x2, y2 = pts[t, 2]
        area = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area == 0.0:
            continue
        q0, q1, q2 = invz[t]
        if area < 0.0:
            x1, y1, x2, y2 = x2, y2, x1, y1
            q1, q2 = q2, q1
            area = -area

        xmin = max(int(np.floor(min(x0, x1, x2) - 0.5)), 0)
        xmax = min(int(np.ceil(max(x0, x1, x2) - 0.5)) + 1, width)
        ymin = max(int(np.floor(min(y0, y1, y2) - 0.5)), 0)
        ymax = min(int(np.ceil(max(y0, y1, y2) - 0.5)) + 1, height)
        if xmin >= xmax or ymin >= ymax:
            continue

        px = np.arange(xmin, xmax, dtype=np.float64) + 0.5
        py = np.arange(ymin, ymax, dtype=np.float64) + 0.5
        gx, gy = np.meshgrid(px, py)

        w0 = (x2 - x1) * (gy - y1) - (y2 - y1) * (gx - x1)
        w1 = (x0 - x2) * (gy - y2) - (y0 - y2) * (gx - x2)
        w2 = (x1 - x0) * (gy - y0) - (y1 - y0) * (gx - x0)

        inside = (
            ((w0 > 0) | ((w0 == 0) & _edge_accepts(x1, y1, x2, y2)))
            & ((w1 > 0) | ((w1 == 0) & _edge_accepts(x2, y2, x0, y0)))
            & ((w2 > 0) | ((w2 == 0) & _edge_accepts(x0, y0, x1, y1)))
        )
        if not inside.any():
            continue

        q = (w0 * q0 + w1 * q1 + w2 * q2) / area
        with np.errstate(divide="ignore"):
            z = np.where(q > 0, 1.0 / np.where(q > 0, q, 1.0), np.inf)

        tile_depth = depth[ymin:ymax, xmin:xmax]
        win = inside & (z < tile_depth)
        if not win.any():
            continue
        tile_depth[win] = z[win]
        seg[ymin:ymax, xmin:xmax][win] = ids[t]
        rgb[ymin:ymax, xmin:xmax][win] = colors[t]
