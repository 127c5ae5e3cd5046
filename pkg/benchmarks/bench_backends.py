"""Time the Cython core against the NumPy fallback.

    python3 benchmarks/bench_backends.py [--n 200000] [--repeat 5]

Prints one line per routine with the best-of-``repeat`` time for each backend
and the speedup. Both backends are imported directly, so the selection made by
``BESSELHEAT_BACKEND`` does not matter here.
"""

import argparse
import timeit

import numpy as np

from besselheat import _pycore

try:
    from besselheat import _ccore
except ImportError:
    _ccore = None


def cases(n, seed=0):
    rng = np.random.default_rng(seed)
    z = 10 ** rng.uniform(-4, 4, n)
    zj = rng.uniform(0, 500, n)
    s = 10 ** rng.uniform(-5, 1, n)
    x = 10 ** rng.uniform(-3, 1.5, n)
    y = x * 10 ** rng.uniform(-1, 1, n)
    return [
        ("ive(0.7)", "ive", (0.7, z)),
        ("ive_diffs(1.3)", "ive_diffs", (1.3, z)),
        ("jv(2.5)", "jv", (2.5, zj)),
        ("heat_w(1.0)", "heat_w", (1.0, s, x, y)),
        ("kernel_k(1.0)", "kernel_k", (1.0, s, x, y)),
        ("kernel_kt(-0.5)", "kernel_kt", (-0.5, s, x, y)),
        ("kernel_dxw(2.0)", "kernel_dxw", (2.0, s, x, y)),
    ]


def best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'routine':<18}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for label, name, fargs in cases(args.n):
        tp = best(getattr(_pycore, name), fargs, args.repeat)
        if _ccore is None:
            print(f"{label:<18}{tp:>12.4f}{'n/a':>12}{'':>10}")
            continue
        tc = best(getattr(_ccore, name), fargs, args.repeat)
        print(f"{label:<18}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
