"""Time the numba and numpy geometry kernels on the same inputs.

    python3 benchmarks/bench_kernels.py [--boxes 64] [--repeat 5]

Both backends are imported in-process; numba timings exclude the first
(compiling) call.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from tsdsm.geometry import kernels


def _boxes(n: int, rng: np.random.Generator) -> np.ndarray:
    return np.column_stack([rng.uniform(-3, 3, (n, 2)), rng.uniform(0, 1, n),
                            rng.uniform(0.1, 1.0, (n, 3)), rng.uniform(-np.pi, np.pi, n)])


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--boxes", type=int, default=64, help="boxes per scene")
    ap.add_argument("--scenes", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    scenes = [_boxes(args.boxes, rng) for _ in range(args.scenes)]
    colors = rng.integers(40, 256, (args.boxes, 3)).astype(np.uint8)
    order = np.arange(args.boxes, dtype=np.int64)
    bg = np.zeros(3, dtype=np.uint8)
    tasks = {
        "iou_matrix": lambda k: [k.iou_matrix(s) for s in scenes],
        "rasterize 64px": lambda k: [k.rasterize(s, colors, order, 64, 4.0, bg) for s in scenes],
    }
    names = sorted(kernels.BACKENDS)
    print(f"{args.scenes} scenes x {args.boxes} boxes, best of {args.repeat}")
    print(f"{'kernel':<16}" + "".join(f"{n:>12}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, task in tasks.items():
        row = {}
        for n in names:
            k = kernels.BACKENDS[n]
            task(k)  # warm-up, triggers compilation
            row[n] = _best(lambda: task(k), args.repeat)
        line = f"{label:<16}" + "".join(f"{row[n] * 1e3:>10.1f}ms" for n in names)
        if "numba" in row:
            line += f"   {row['numpy'] / row['numba']:>6.1f}x"
        print(line)


if __name__ == "__main__":
    main()
