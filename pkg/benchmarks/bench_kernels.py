"""Time the steady-state sweep on each available backend.

Compares the compiled kernel with the numpy fallback, solving either the
full 64 x 64 system per detuning or only the population block.

    python benchmarks/bench_kernels.py --points 400 --threads 1 4
"""

import argparse
import time

import numpy as np

from darkthermo import _backend
from darkthermo.levels import (DriveConfig, ZeemanField, build_ca40_system, collapse_operators,
                               detuning_pattern, hamiltonian)
from darkthermo.steadystate import assemble_liouvillian, diagonal_shift, steady_state_batch


def sweep_inputs(points):
    system = build_ca40_system()
    H = hamiltonian(system, DriveConfig(-14.0, 12.0, 397.0, 0.45),
                    DriveConfig(0.0, 8.0, 866.0, 0.49), ZeemanField(4.7e-4))
    L = assemble_liouvillian(H, collapse_operators(system, 0.45, 0.49))
    _, pb = detuning_pattern(system)
    grid = np.linspace(-40.0, 12.0, points)
    return L, diagonal_shift(grid[:, None] * pb)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=400, help="detuning points per sweep")
    ap.add_argument("--threads", type=int, nargs="+", default=[1], help="thread counts to try")
    ap.add_argument("--repeat", type=int, default=3, help="timing repetitions (best is kept)")
    args = ap.parse_args(argv)

    L, shifts = sweep_inputs(args.points)
    ref = steady_state_batch(L, shifts, backend="python", reduce=False)
    print(f"{args.points} points, backends: {', '.join(_backend.available_backends())}")
    print(f"{'backend':>8} {'system':>8} {'threads':>7} {'time [s]':>9} {'us/point':>9} {'max dev':>9}")
    for backend in _backend.available_backends():
        for reduce in (False, True):
            for threads in args.threads:
                if backend == "python" and threads > 1:
                    continue  # fallback is single-threaded
                run = lambda: steady_state_batch(L, shifts, backend=backend, threads=threads,
                                                 reduce=reduce)
                dt = best_of(run, args.repeat)
                dev = np.max(np.abs(run() - ref))
                print(f"{backend:>8} {'block' if reduce else 'full':>8} {threads:>7d} {dt:9.4f} "
                      f"{1e6 * dt / args.points:9.1f} {dev:9.1e}")


if __name__ == "__main__":
    main()
