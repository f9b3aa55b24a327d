"""Time the float64 Jacobi eigensolver with and without numba.

    python3 benchmarks/bench_jacobi.py --sizes 50 100 200 --repeat 3

The numpy path is the one selected by TRACESPEC_DISABLE_NUMBA=1.  Results are
checked against numpy.linalg.eigvalsh before timing.
"""

import argparse
import time

import numpy as np

from tracespec._accel import HAVE_NUMBA, jacobi_float
from tracespec.oracle import nystrom_spectrum
from tracespec.presets import polygauss_family


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--nystrom-m", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    if HAVE_NUMBA:
        jacobi_float(np.eye(3) + 0.1, use_numba=True)  # compile outside the timing
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'n':>6} {'numpy [s]':>12} {'numba [s]':>12} {'speedup':>9} {'max err':>10}")
    for n in args.sizes:
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        ref = np.sort(np.linalg.eigvalsh(a))
        vals, _, _ = jacobi_float(a, use_numba=False)
        err = np.max(np.abs(np.sort(vals) - ref))
        t_np = _time(lambda: jacobi_float(a, use_numba=False), args.repeat)
        if HAVE_NUMBA:
            t_nb = _time(lambda: jacobi_float(a, use_numba=True), args.repeat)
            print(f"{n:>6} {t_np:>12.4f} {t_nb:>12.4f} {t_np / t_nb:>9.1f} {err:>10.2e}")
        else:
            print(f"{n:>6} {t_np:>12.4f} {'-':>12} {'-':>9} {err:>10.2e}")

    k = polygauss_family(40)
    m = args.nystrom_m
    t_np = _time(lambda: nystrom_spectrum(k, m, use_numba=False), 1)
    line = f"nystrom m={m}: numpy {t_np:.3f} s"
    if HAVE_NUMBA:
        t_nb = _time(lambda: nystrom_spectrum(k, m, use_numba=True), 1)
        line += f", numba {t_nb:.3f} s"
    print(line)


if __name__ == "__main__":
    main()
