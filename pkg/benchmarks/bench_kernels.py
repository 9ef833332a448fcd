"""Compare the numba and numpy backends on the two hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from ccbell import _kernels


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), result


def partition_case(nx=10, ny=4, blocks=4, seed=0):
    w = np.random.default_rng(seed).random((nx, ny, 2))
    return w / w.sum(), blocks


def pib_case(cells=16, trials=200_000, copies=8, seed=0):
    rng = np.random.default_rng(seed)
    cum = np.cumsum(rng.dirichlet(np.ones(4), size=cells), axis=1)
    valid = rng.random((cells, 2)) < 0.5
    return (rng.integers(0, cells, trials), rng.random((trials, copies)), rng.random(trials), cum, valid)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        print("numba not installed; only the numpy backend is available")
        return
    w, m = partition_case()
    pib = pib_case()
    cases = [
        (f"partition_search nx={w.shape[0]} blocks<={m} ({_kernels.count_partitions(w.shape[0], m)} partitions)",
         lambda b: _kernels.partition_search(w, m, backend=b)[0]),
        (f"pib_success_count trials={len(pib[0])} copies={pib[1].shape[1]}",
         lambda b: _kernels.pib_success_count(*pib, backend=b)),
    ]
    for label, fn in cases:
        fn("numba")  # compile
        t_nb, r_nb = best_time(lambda: fn("numba"), args.repeat)
        t_np, r_np = best_time(lambda: fn("numpy"), args.repeat)
        print(f"{label}\n  numba {t_nb * 1e3:9.2f} ms   numpy {t_np * 1e3:9.2f} ms   "
              f"speedup {t_np / t_nb:6.1f}x   same result: {r_nb == r_np}")


if __name__ == "__main__":
    main()
