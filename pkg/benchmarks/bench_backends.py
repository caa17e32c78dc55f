"""Time the table-evaluation kernels on every available backend.

Runs meas_entries (the full 8x8 conditional-probability table, the inner
loop of every fit) and reconstruct_chi under each backend and prints a
small table.  Usage:

    python3 benchmarks/bench_backends.py [--repeats 200]
"""

import argparse
import time

import numpy as np

from mismatch_qpt import model, reconstruct_chi
from mismatch_qpt._backend import available_backends, backend_name, using


def _time(fn, repeats):
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    taus = rng.uniform(-1.5, 1.5, 5)
    mdl = model()
    mdl.meas_entries(taus)  # warm the table cache before timing

    print(f"default backend: {backend_name()}")
    print(f"{'backend':<10} {'meas_entries':>14} {'reconstruct_chi':>16}")
    times = {}
    for name in available_backends():
        with using(name):
            t_entries = _time(lambda: mdl.meas_entries(taus), args.repeats)
            t_chi = _time(lambda: reconstruct_chi(taus), max(1, args.repeats // 10))
        times[name] = t_entries
        print(f"{name:<10} {t_entries * 1e6:>11.1f} us {t_chi * 1e6:>13.1f} us")

    if len(times) == 2:
        ratio = times["python"] / times["cython"]
        print(f"cython speedup on meas_entries: {ratio:.2f}x")


if __name__ == "__main__":
    main()
