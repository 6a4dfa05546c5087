"""Compare the compiled kernels against the numpy fallback.

Times every kernel on tile-scale inputs (224x224, the production tile
size) under both backends and checks that their outputs stay
bit-identical while it is at it.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from damageseg import _kernels
from damageseg.edges import SOBEL_X, gaussian_kernel


def make_workloads(seed=0):
    rng = np.random.default_rng(seed)
    size = 224
    plane = rng.normal(0.0, 40.0, (size, size))
    mask = (rng.random((size, size)) < 0.3).astype(np.uint8)
    other = (rng.random((size, size)) < 0.2).astype(np.uint8)
    img = rng.integers(0, 256, (size, size), dtype=np.uint8)
    rgb = rng.integers(0, 256, (size, size, 3), dtype=np.uint8)
    gx = rng.normal(0.0, 1.0, (size, size))
    gy = rng.normal(0.0, 1.0, (size, size))
    mag = np.hypot(gx, gy)
    disk = np.array(
        [(dr, dc) for dr in range(-2, 3) for dc in range(-2, 3)
         if dr * dr + dc * dc <= 4],
        dtype=np.int64,
    )
    gauss = gaussian_kernel(1.4)
    return [
        ("convolve2d 3x3", lambda: _kernels.convolve2d(plane, SOBEL_X)),
        ("convolve2d 9x9", lambda: _kernels.convolve2d(plane, gauss)),
        ("dilate_square r=2", lambda: _kernels.dilate_square(mask, 2)),
        ("dilate_offsets disk", lambda: _kernels.dilate_offsets(mask, disk)),
        ("boundary4", lambda: _kernels.boundary4(mask)),
        ("confusion_binary", lambda: _kernels.confusion_binary(mask, other)),
        ("nms", lambda: _kernels.nms(mag, gx, gy)),
        ("hysteresis", lambda: _kernels.hysteresis(other, mask)),
        ("zero_crossings", lambda: _kernels.zero_crossings(plane, 1.0)),
        ("resize_bilinear 2x rgb", lambda: _kernels.resize_bilinear_u8(rgb, 448, 448)),
        ("resize_nearest 2x", lambda: _kernels.resize_nearest_u8(img, 448, 448)),
    ]


def best_of(fn, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=7,
                        help="timing repeats per kernel (best-of)")
    args = parser.parse_args()

    backends = _kernels.available_backends()
    if len(backends) < 2:
        print(f"only {backends[0]} available; nothing to compare")
        return

    rows = []
    for name, fn in make_workloads():
        timings = {}
        results = {}
        for backend in backends:
            prev = _kernels.use_backend(backend)
            try:
                timings[backend], results[backend] = best_of(fn, args.repeats)
            finally:
                _kernels.use_backend(prev)
        a, b = (np.asarray(results[be]) for be in backends)
        identical = a.dtype == b.dtype and np.array_equal(a, b)
        rows.append((name, timings, identical))

    header = f"{'kernel':<24}" + "".join(f"{be:>12}" for be in backends)
    header += f"{'speedup':>10}  match"
    print(header)
    print("-" * len(header))
    mismatches = 0
    for name, timings, identical in rows:
        cells = "".join(f"{timings[be] * 1e3:>10.3f}ms" for be in backends)
        speedup = timings["python"] / timings["compiled"]
        mark = "yes" if identical else "NO"
        mismatches += not identical
        print(f"{name:<24}{cells}{speedup:>9.1f}x  {mark}")
    if mismatches:
        raise SystemExit(f"{mismatches} kernel(s) disagree between backends")


if __name__ == "__main__":
    main()
