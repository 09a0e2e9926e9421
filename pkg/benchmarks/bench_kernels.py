"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from stamlab import _kernels_py

try:
    from stamlab import _kernels as compiled
except ImportError:
    compiled = None


def bench(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if compiled is None:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(0)
    cases = []
    for n in (8, 10, 12):
        vals = rng.uniform(0, 1, size=2 ** n - 1)
        cases.append((f"supermodular_scan n={n}", "supermodular_scan", (vals, n)))
        cases.append((f"supermodular_local_scan n={n}", "supermodular_local_scan", (vals, n)))
    for n in (4, 5):
        cases.append((f"extreme_supports n={n}", "extreme_supports", (n,)))

    print(f"{'kernel':34s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for label, name, call_args in cases:
        t_py = bench(lambda: getattr(_kernels_py, name)(*call_args), args.repeat)
        if compiled is None:
            print(f"{label:34s} {t_py:12.5f} {'-':>12s} {'-':>9s}")
            continue
        t_c = bench(lambda: getattr(compiled, name)(*call_args), args.repeat)
        print(f"{label:34s} {t_py:12.5f} {t_c:12.5f} {t_py / t_c:8.1f}x")


if __name__ == "__main__":
    main()
