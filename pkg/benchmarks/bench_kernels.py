#!/usr/bin/env python3
"""Numba vs pure-numpy timings for the modular kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 64 128 256]

Both paths are called directly (the env flag only picks the default), and
every pair of outputs is checked for equality before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from commvar import _kernels as K
from commvar.census import nilpotent_stack
from commvar.exactfield import DEFAULT_PRIME


def _random(shape, p, seed):
    return np.random.default_rng(seed).integers(0, p, size=shape, dtype=np.int64)


def _best(fn, repeat):
    fn()  # warm-up, includes JIT compilation / cache load
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def cases(sizes):
    p = DEFAULT_PRIME
    for n in sizes:
        a = _random((n, n), p, n)
        # rank-deficient input exercises the non-pivot branch
        a[n // 2:] = a[: n - n // 2] * 3 % p
        yield f"rref {n}x{n}", (K.rref_modp_numpy, K.rref_modp_numba), (a, p)
    for n in sizes:
        a, b = _random((n, n), p, 2 * n), _random((n, n), p, 3 * n)
        yield f"matmul {n}x{n}", (K.matmul_modp_numpy, K.matmul_modp_numba), (a, b, p)
    for n, q in [(3, 2), (2, 7), (2, 11)]:
        stack = nilpotent_stack(n, q)
        yield f"commute table n={n} q={q} ({len(stack)}^2)", (K.commute_table_numpy, K.commute_table_numba), (stack, q)


def _same(x, y):
    if isinstance(x, tuple):
        return all(np.array_equal(u, v) for u, v in zip(x, y))
    return np.array_equal(x, y)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':<36} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, (ref, jit), call_args in cases(args.sizes):
        if not _same(ref(*call_args), jit(*call_args)):
            raise SystemExit(f"{name}: numpy and numba disagree")
        t_np = _best(lambda: ref(*call_args), args.repeat)
        t_nb = _best(lambda: jit(*call_args), args.repeat)
        print(f"{name:<36} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
