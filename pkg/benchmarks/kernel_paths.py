"""Compare the jit and plain-numpy clearance kernels on synthetic pockets.

Run as a script:

    python3 benchmarks/kernel_paths.py [--sizes 500,2000,8000] [--reps 5]

Both paths count the same grid points bit for bit; this only reports how
long each takes. The jit path needs numba; without it only the numpy
column is filled.
"""

from __future__ import annotations

import argparse
import os
import statistics
import time

import numpy as np

from molblocks import _kernels
from molblocks.hotspots import GridConfig, _grid_offsets


def make_pocket(n_receptor: int, seed: int):
    rng = np.random.default_rng(seed)
    receptor = rng.uniform(-20.0, 20.0, size=(n_receptor, 3))
    ligand = rng.uniform(-5.0, 5.0, size=(24, 3))
    cfg = GridConfig()
    points = ligand[0] + _grid_offsets(cfg.edge, cfg.resolution)
    return points, receptor, ligand, cfg


def time_path(points, receptor, ligand, cfg, reps: int) -> tuple[float, int]:
    rc2 = cfg.receptor_clearance ** 2
    lc2 = cfg.ligand_clearance ** 2
    # Warm once so jit compilation stays out of the timings.
    count = _kernels.count_clear_points(points, receptor, ligand, rc2, lc2)
    laps = []
    for _ in range(reps):
        start = time.perf_counter()
        got = _kernels.count_clear_points(points, receptor, ligand, rc2, lc2)
        laps.append(time.perf_counter() - start)
        assert got == count
    return statistics.median(laps), count


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="500,2000,8000",
                        help="comma-separated receptor atom counts")
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    header = f"{'receptor':>8} {'numpy_s':>12} {'jit_s':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for size in sizes:
        points, receptor, ligand, cfg = make_pocket(size, seed=args.seed)
        os.environ["MOLBLOCKS_DISABLE_NUMBA"] = "1"
        plain_t, plain_count = time_path(points, receptor, ligand, cfg,
                                         args.reps)
        os.environ["MOLBLOCKS_DISABLE_NUMBA"] = "0"
        if _kernels.NUMBA_AVAILABLE:
            jit_t, jit_count = time_path(points, receptor, ligand, cfg,
                                         args.reps)
            assert jit_count == plain_count
            print(f"{size:>8} {plain_t:>12.6f} {jit_t:>12.6f} "
                  f"{plain_t / jit_t:>8.2f}")
        else:
            print(f"{size:>8} {plain_t:>12.6f} {'n/a':>12} {'n/a':>8}")


if __name__ == "__main__":
    main()
