"""Timing comparison of the compiled kernels against the numpy fallback.

Runs the per-frequency response solve and the patch slope-difference scan
at a few problem sizes and reports the best-of-N wall time per backend.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --modes 4 16 64 --points 50000
"""

import argparse
import time

import numpy as np

from piezodamp import BeamProperties, ModalPlant, analytic_cantilever_modes, \
    plant_system
from piezodamp._kernels import BACKEND, delta_theta_scan, frf_solve, \
    numpy_reference


def best_of(fn, repeats: int) -> float:
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def frf_case(n_modes: int, n_points: int):
    rng = np.random.default_rng(42)
    freqs = np.sort(rng.uniform(20.0, 500.0, n_modes))
    plant = ModalPlant(2.0 * np.pi * freqs,
                       np.full(n_modes, 0.01),
                       rng.uniform(-1.0, 1.0, n_modes))
    sys_ = plant_system(plant)
    omegas = np.linspace(2.0 * np.pi * 10.0, 2.0 * np.pi * 600.0, n_points)
    return sys_.A, sys_.B[:, 0].copy(), sys_.C[0, :].copy(), 0.0, omegas


def scan_case(n_grid: int, n_starts: int):
    model = analytic_cantilever_modes(BeamProperties(1.0, 1.0, 1.0),
                                      n_modes=8, n_grid=n_grid)
    theta = np.vstack([m.theta for m in model.modes])
    starts = np.linspace(0.0, 0.9, n_starts)
    return model.grid, theta, starts, 0.1


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, nargs="+", default=[2, 5, 10, 20],
                    help="modal model sizes for the response solve")
    ap.add_argument("--points", type=int, default=20001,
                    help="frequency samples per solve")
    ap.add_argument("--grid", type=int, default=2001,
                    help="grid points for the slope scan")
    ap.add_argument("--starts", type=int, default=20001,
                    help="candidate positions for the slope scan")
    ap.add_argument("--repeats", type=int, default=5,
                    help="keep the best of this many runs")
    args = ap.parse_args()

    frf_np, scan_np = numpy_reference()
    print(f"active backend: {BACKEND}")
    if BACKEND == "numpy":
        print("numba unavailable or disabled; both columns use numpy")

    print(f"\nresponse solve, {args.points} frequency samples")
    print(f"{'states':>8} {BACKEND + ' ms':>12} {'numpy ms':>12} "
          f"{'speedup':>8}")
    for n in args.modes:
        A, b, c, d, omegas = frf_case(n, args.points)
        frf_solve(A, b, c, d, omegas)  # warm-up / jit compile
        t_active = best_of(lambda: frf_solve(A, b, c, d, omegas),
                           args.repeats)
        t_numpy = best_of(lambda: frf_np(A, b, c, d, omegas), args.repeats)
        print(f"{2 * n:>8} {1e3 * t_active:>12.2f} {1e3 * t_numpy:>12.2f} "
              f"{t_numpy / t_active:>8.2f}")

    print(f"\nslope-difference scan, {args.starts} candidates x 8 modes, "
          f"{args.grid}-point grid")
    x, theta, starts, plen = scan_case(args.grid, args.starts)
    delta_theta_scan(x, theta, starts, plen)  # warm-up / jit compile
    t_active = best_of(lambda: delta_theta_scan(x, theta, starts, plen),
                       args.repeats)
    t_numpy = best_of(lambda: scan_np(x, theta, starts, plen), args.repeats)
    print(f"{'':>8} {1e3 * t_active:>12.2f} {1e3 * t_numpy:>12.2f} "
          f"{t_numpy / t_active:>8.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
