"""Time the numba and numpy kernel backends on the same workloads.

    python3 benchmarks/bench_backends.py [--repeat 3]

Each workload runs once per backend untimed (JIT compile or cache load),
then ``--repeat`` times; the best time is reported.
"""
import argparse
import time

import numpy as np

from simplexmap import kernels
from simplexmap._backend import HAVE_NUMBA, use_backend
from simplexmap.core import simplex_volume
from simplexmap.maps import decompose_trapezoids, grid_bb, grid_h2d, grid_h3d, grid_lambda, grid_rb
from simplexmap.simulator import check_cover, domain_of_side


def cover(grids, side, m=2):
    def go():
        counts = np.zeros(simplex_volume(side, m), dtype=np.uint16)
        for g in grids:
            kernels.cover_into(g, side, counts)
    return go


def trapezoid_sweep(lo, hi, T):
    def go():
        for n in range(lo, hi):
            check_cover([p.grid for p in decompose_trapezoids(n, T)], domain_of_side(2, n - 1))
    return go


def targets(grid):
    return lambda: kernels.block_targets(grid)


WORKLOADS = [
    ("cover h2d n=4096", cover([grid_h2d(4096)], 4095)),
    ("cover h2d n=256 rho=8", cover([grid_h2d(256).with_rho(8)], 255 * 8)),
    ("cover rb n=4096", cover([grid_rb(4096)], 4096)),
    ("cover bb m=3 n=192", cover([grid_bb(192, 3)], 192, 3)),
    ("cover h3d n=128 rho=2", cover([grid_h3d(128).with_rho(2)], 254, 3)),
    ("trapezoid sweep n=2..400 T=4", trapezoid_sweep(2, 400, 4)),
    ("targets lambda n=2048", targets(grid_lambda(2048))),
    ("lambda fp32 scan 2^24", lambda: kernels.lambda_fp32_first_bad(1 << 24)),
]


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    print(f"{'workload':32s}" + "".join(f"{b:>12s}" for b in backends) + f"{'speedup':>10s}")
    for name, fn in WORKLOADS:
        row = []
        for b in backends:
            with use_backend(b):
                row.append(best_of(fn, args.repeat))
        speed = f"{row[1] / row[0]:9.1f}x" if len(row) == 2 else ""
        print(f"{name:32s}" + "".join(f"{t:11.4f}s" for t in row) + speed)


if __name__ == "__main__":
    main()
