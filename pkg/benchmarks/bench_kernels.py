"""Compare the compiled and pure-Python kernels.

Times DTW cost, DTW with path, soft-DTW and log-GAK on random pairs, then
one full 33 x 33 matrix build per backend. Results also get checked for
agreement between backends.

    python benchmarks/bench_kernels.py --length 89 --vars 15
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mtscluster import _backend
from mtscluster.distance import distance_matrix, dtw, softdtw
from mtscluster.kernel import GakConfig, kernel_matrix, log_gak
from mtscluster.synthetic import random_cohort

KERNELS = {
    "dtw": lambda x, y: dtw(x, y),
    "dtw_path": lambda x, y: dtw(x, y, return_path=True)[0],
    "softdtw": lambda x, y: softdtw(x, y, 1.0),
    "log_gak": lambda x, y: log_gak(x, y, 5.0),
}


def best_time(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=89)
    ap.add_argument("--vars", type=int, default=15)
    ap.add_argument("--pairs", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--matrix-n", type=int, default=33,
                    help="cohort size for the matrix build (0 skips it)")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    pairs = [(rng.normal(size=(args.length, args.vars)), rng.normal(size=(args.length, args.vars)))
             for _ in range(args.pairs)]
    backends = ["python"]
    try:
        _backend.use("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled extension not available; timing the Python kernels only")

    print(f"per-pair time, T={args.length}, V={args.vars}, best of {args.repeat}")
    print(f"{'kernel':<10}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for name, fn in KERNELS.items():
        times, values = [], []
        for b in backends:
            _backend.use(b)
            t, v = best_time(lambda: [fn(x, y) for x, y in pairs], args.repeat)
            times.append(t / len(pairs))
            values.append(np.array(v))
        if len(values) == 2:
            np.testing.assert_allclose(values[0], values[1], rtol=1e-9)
        speed = f"{times[-1] / times[0]:9.0f}x" if len(times) == 2 else ""
        print(f"{name:<10}" + "".join(f"{t * 1e3:12.3f}ms" for t in times) + f" {speed}")

    if args.matrix_n:
        ds = random_cohort(n=args.matrix_n, v=args.vars, t=args.length)
        print(f"\nmatrix build, N={args.matrix_n}")
        for b in backends:
            _backend.use(b)
            t_dtw, _ = best_time(lambda: distance_matrix(ds), 1)
            t_gak, _ = best_time(lambda: kernel_matrix(ds, GakConfig()), 1)
            print(f"{b:<10} DTW {t_dtw:8.2f} s   GAK {t_gak:8.2f} s")


if __name__ == "__main__":
    main()
