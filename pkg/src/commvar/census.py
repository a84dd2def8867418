"""Brute-force point counts of C_r(N_n) over small prime fields F_q."""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .exactfield import is_prime

DEFAULT_SPACE_BUDGET = 2**16  # q^(n^2) matrices enumerated
DEFAULT_TUPLE_BUDGET = 2**20  # tuples visited by full enumeration
DEFAULT_TABLE_BUDGET = 2**24  # entries of the pairwise commuting table

METHODS = ("centralizer-pruned", "full-enumeration")


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class CountResult:
    n: int
    r: int
    q: int
    count: int
    elapsed: float
    method: str

    def csv_row(self, timing: bool = True) -> str:
        row = f"{self.n},{self.r},{self.q},{self.count},{self.method}"
        return row + f",{self.elapsed * 1000:.3f}" if timing else row


CSV_HEADER = "n,r,q,count,method,elapsed_ms"
CSV_HEADER_NO_TIMING = "n,r,q,count,method"


def _check_q(q: int):
    if not is_prime(q):
        raise ValueError(f"census works over prime fields only, got q={q}")


def _all_matrices(n: int, q: int, budget: int) -> np.ndarray:
    size = q ** (n * n)
    if size > budget:
        raise BudgetExceeded(f"q^(n^2) = {size} matrices exceeds budget {budget}")
    idx = np.arange(size, dtype=np.int64)
    digits = np.empty((size, n * n), dtype=np.int64)
    for k in range(n * n):
        digits[:, n * n - 1 - k] = idx % q
        idx //= q
    return digits.reshape(size, n, n)


def _nilpotent_mask(stack: np.ndarray, q: int) -> np.ndarray:
    n = stack.shape[1]
    power = stack.copy()
    e = 1
    while e < n:
        power = np.matmul(power, power) % q
        e *= 2
    return ~np.any(power.reshape(len(stack), -1), axis=1)


def nilpotent_stack(n: int, q: int, budget: int = DEFAULT_SPACE_BUDGET) -> np.ndarray:
    """All nilpotent n x n matrices over F_q as an ``(k, n, n)`` int64 array, lexicographic order."""
    _check_q(q)
    if n < 1:
        raise ValueError("n must be >= 1")
    stack = _all_matrices(n, q, budget)
    return stack[_nilpotent_mask(stack, q)]


def enumerate_nilpotent(n: int, q: int, budget: int = DEFAULT_SPACE_BUDGET) -> list[list[list[int]]]:
    return nilpotent_stack(n, q, budget).tolist()


def _pruned(table: np.ndarray, idx: np.ndarray, depth: int) -> int:
    if depth == 1:
        return len(idx)
    if depth == 2:
        return int(table[np.ix_(idx, idx)].sum())
    total = 0
    for a in idx:
        total += _pruned(table, idx[table[a, idx]], depth - 1)
    return total


def _full(stack: np.ndarray, q: int, r: int, budget: int) -> int:
    k = len(stack)
    if k ** r > budget:
        raise BudgetExceeded(f"{k}^{r} tuples exceeds budget {budget}")
    mats = [m for m in stack]
    total = 0
    for tup in itertools.product(range(k), repeat=r):
        ok = True
        for i in range(r):
            for j in range(i + 1, r):
                x, y = mats[tup[i]], mats[tup[j]]
                if np.any((x @ y - y @ x) % q):
                    ok = False
                    break
            if not ok:
                break
        total += ok
    return total


def count_commuting_nilpotent(
    n: int,
    r: int,
    q: int,
    method: str = "centralizer-pruned",
    budget: int | None = None,
) -> CountResult:
    """Exact number of commuting r-tuples of nilpotent n x n matrices over F_q.

    ``centralizer-pruned`` restricts each successive entry to the common
    centralizer of the previous ones via a precomputed commuting table;
    ``full-enumeration`` checks every tuple directly. An explicit ``budget``
    caps every stage (matrix space, table entries, tuples); otherwise the
    module defaults apply.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if r < 1:
        raise ValueError("r must be >= 1")
    start = time.perf_counter()
    stack = nilpotent_stack(n, q, budget or DEFAULT_SPACE_BUDGET)
    if method == "full-enumeration":
        count = _full(stack, q, r, budget or DEFAULT_TUPLE_BUDGET)
    else:
        k = len(stack)
        limit = budget or DEFAULT_TABLE_BUDGET
        if k * k > limit:
            raise BudgetExceeded(f"commuting table of {k}^2 entries exceeds budget {limit}")
        table = _kernels.commute_table(stack, q) if r > 1 else None
        count = k if r == 1 else _pruned(table, np.arange(k), r)
    return CountResult(n, r, q, count, time.perf_counter() - start, method)


def growth_probe(n: int, r: int, q_list) -> list[dict]:
    """Counts against the regular-component dimension n^2 - n + (r-1)(n-1)."""
    dim = n * n - n + (r - 1) * (n - 1)
    rows = []
    for q in q_list:
        res = count_commuting_nilpotent(n, r, q)
        rows.append({
            "q": q,
            "count": res.count,
            "log_q_count": math.log(res.count, q) if res.count > 1 else 0.0,
            "dim_formula": dim,
        })
    return rows
