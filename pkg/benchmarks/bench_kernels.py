"""Time ``momentum_roots`` on the compiled and numpy backends.

Usage: python benchmarks/bench_kernels.py [--nodes N] [--terms K] [--repeat R]
"""
import argparse
import timeit

import numpy as np

from fwclassical import _backend


def make_inputs(n, K, seed=0):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.5, 4.0, n)
    d0 = rng.uniform(0.2, 0.25, n)
    coeffs = rng.uniform(0.0, 0.5, (n, K))
    return w, d0, coeffs


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=100_000)
    ap.add_argument("--terms", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    w, d0, coeffs = make_inputs(args.nodes, args.terms)
    names = ["python"] + (["cython"] if _backend._compiled is not None else [])
    best = {}
    for name in names:
        kern = _backend.get_kernels(name)
        call = lambda: kern.momentum_roots(w, d0, coeffs, 1.0, 10.0, 1e-15)
        call()
        best[name] = min(timeit.repeat(call, number=1, repeat=args.repeat))
        print(f"{name:>7}: {best[name] * 1e3:9.2f} ms  ({args.nodes} nodes, {args.terms} momentum terms)")
    if len(best) == 2:
        print(f"speedup: {best['python'] / best['cython']:.1f}x")
    else:
        print("compiled backend not built; rebuild with `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
