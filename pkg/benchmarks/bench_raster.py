"""Compare the compiled rasterizer kernel against the NumPy fallback.

Renders the same random triangle batches through both kernels, reports
per-frame timings and the speedup, and checks the outputs stay bitwise
identical. Run with: python3 benchmarks/bench_raster.py
"""

import argparse
import time

import numpy as np

from airsynth.render import FrameBundle
from airsynth.render.raster_py import fill_triangles as fill_numpy

try:
    from airsynth.render._raster import fill_triangles as fill_compiled
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def make_batch(n_triangles, width, height, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-50, width + 50, size=(n_triangles, 3, 2))
    pts[:, :, 1] = rng.uniform(-50, height + 50, size=(n_triangles, 3))
    # keep triangles screen-sized, not full-frame slivers
    anchor = pts[:, :1, :]
    pts = anchor + (pts - anchor) * 0.15
    invz = 1.0 / rng.uniform(5.0, 120.0, size=(n_triangles, 3))
    colors = rng.integers(0, 256, size=(n_triangles, 3), dtype=np.uint8)
    ids = rng.integers(1, 40, size=n_triangles, dtype=np.int32)
    return (np.ascontiguousarray(pts), np.ascontiguousarray(invz),
            np.ascontiguousarray(colors), np.ascontiguousarray(ids))


def time_kernel(fill, batch, width, height, repeats):
    best = float("inf")
    for _ in range(repeats):
        fb = FrameBundle.blank(width, height)
        t0 = time.perf_counter()
        fill(*batch, fb.rgb, fb.depth, fb.segmap)
        best = min(best, time.perf_counter() - t0)
    return best, fb


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--width", type=int, default=1920)
    ap.add_argument("--height", type=int, default=1080)
    ap.add_argument("--triangles", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    batch = make_batch(args.triangles, args.width, args.height, args.seed)
    t_np, fb_np = time_kernel(fill_numpy, batch, args.width, args.height,
                              args.repeats)
    print(f"{args.triangles} triangles at {args.width}x{args.height}, "
          f"best of {args.repeats}:")
    print(f"  numpy fallback : {t_np * 1000:8.2f} ms "
          f"({1 / t_np:6.1f} frames/s)")
    if not HAVE_COMPILED:
        print("  compiled kernel: not built (install with the Cython "
              "extension to compare)")
        return
    t_c, fb_c = time_kernel(fill_compiled, batch, args.width, args.height,
                            args.repeats)
    print(f"  compiled kernel: {t_c * 1000:8.2f} ms "
          f"({1 / t_c:6.1f} frames/s)")
    print(f"  speedup        : {t_np / t_c:8.2f}x")
    identical = (np.array_equal(fb_np.rgb, fb_c.rgb)
                 and np.array_equal(fb_np.depth, fb_c.depth)
                 and np.array_equal(fb_np.segmap, fb_c.segmap))
    print(f"  outputs bitwise identical: {identical}")
    if not identical:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
