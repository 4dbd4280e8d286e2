"""Compare the compiled and numpy sweep kernels.

    python benchmarks/bench_sweep.py [--points 2000] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from mrcarray import _backend
from mrcarray.model import build_linear_chain, identical_coils
from mrcarray.sweep import DriveSpec, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    print(f"{'N':>3} {'backend':>8} {'ms/sweep':>10} {'speedup':>8} {'max rel diff':>13}")
    for n in (3, 5, 10, 20):
        model = build_linear_chain(identical_coils(n, 10e-6, 150e-12, 1.0), 0.14)
        f = np.linspace(3e6, 5.5e6, args.points)
        ref = sweep(model, DriveSpec(0), frequencies=f, backend="python").input_impedance
        times = {}
        for name in sorted(_backend.KERNELS, reverse=True):
            run = lambda: sweep(model, DriveSpec(0), frequencies=f, backend=name)  # noqa: E731
            times[name] = min(timeit.repeat(run, number=1, repeat=args.repeat)) * 1e3
            z = run().input_impedance
            diff = float(np.max(np.abs(z - ref) / np.abs(ref)))
            speed = times["python"] / times[name] if "python" in times else float("nan")
            print(f"{n:>3} {name:>8} {times[name]:>10.3f} {speed:>8.2f} {diff:>13.1e}")


if __name__ == "__main__":
    main()
