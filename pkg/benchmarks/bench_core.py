"""Compare the compiled and numpy kernels on the hot paths.

    python3 benchmarks/bench_core.py [--n 100 200] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from graphon_lab import _pycore

try:
    from graphon_lab import _core
except ImportError:  # extension not built
    _core = None


def cases(n: int, rng):
    w = rng.random((n, n))
    x = rng.random((n, 2))
    sym = (w + w.T) / 2
    lap = np.diag(sym.sum(1)) - sym
    return {
        "laplacian_drift": lambda m: m.laplacian_drift(w, x),
        "pairwise_dist": lambda m: m.pairwise_dist(x),
        "pair_overlap_min": lambda m: m.pair_overlap_min(w, n),
        "jacobi_eigenvalues": lambda m: m.jacobi_eigenvalues(lap[: min(n, 60), : min(n, 60)].copy()),
        "perron_iterate": lambda m: m.perron_iterate(w),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    mods = [("numpy", _pycore)] + ([("cython", _core)] if _core is not None else [])
    print(f"{'op':<20}{'N':>6}" + "".join(f"{name:>14}" for name, _ in mods) + ("    speedup" if len(mods) > 1 else ""))
    for n in args.n:
        for op, fn in cases(n, rng).items():
            best = []
            for _, mod in mods:
                number = 3
                best.append(min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number)
            row = f"{op:<20}{n:>6}" + "".join(f"{b * 1e3:>12.3f}ms" for b in best)
            if len(best) > 1:
                row += f"  {best[0] / best[1]:>8.2f}x"
            print(row)


if __name__ == "__main__":
    main()
