"""Hot integer kernels: modular row reduction, modular matmul, commuting tables.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy version
with identical results. The numba path is used when numba imports and the
environment variable ``COMMVAR_DISABLE_JIT`` is unset (or ``0``). Both paths
are importable under explicit names so tests and the benchmark can compare
them directly.

All arrays are ``int64`` with entries in ``[0, p)`` and ``p < 2**31``, so a
single product fits in a signed 64-bit word.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

JIT_DISABLED = os.environ.get("COMMVAR_DISABLE_JIT", "0") not in ("", "0")
USE_JIT = HAVE_NUMBA and not JIT_DISABLED

MAX_MODULUS = 2**31


def thread_cap() -> int | None:
    raw = os.environ.get("COMMVAR_THREADS")
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        return None
    return max(1, value)


# the default TBB layer warns on old libtbb; workqueue is always available
if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

if USE_JIT:
    _cap = thread_cap()
    if _cap is not None:
        numba.set_num_threads(min(_cap, numba.config.NUMBA_NUM_THREADS))


# --------------------------------------------------------------------------
# numpy reference path
# --------------------------------------------------------------------------

def _inv_mod(a: int, p: int) -> int:
    return pow(int(a), -1, int(p))


def rref_modp_numpy(a: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row-echelon form of ``a`` over F_p.

    Returns ``(R, pivots)``; pivots are chosen leftmost column first, and
    within a column the topmost nonzero row at or below the current row.
    """
    m = np.array(a, dtype=np.int64, copy=True)
    rows, cols = m.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row >= rows:
            break
        nz = np.flatnonzero(m[row:, col])
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            m[[row, piv]] = m[[piv, row]]
        inv = _inv_mod(m[row, col], p)
        m[row] = (m[row] * inv) % p
        factors = m[:, col].copy()
        factors[row] = 0
        hit = np.flatnonzero(factors)
        if hit.size:
            sub = (factors[hit, None] * m[row][None, :]) % p
            m[hit] = (m[hit] - sub) % p
        pivots.append(col)
        row += 1
    return m, np.array(pivots, dtype=np.int64)


def matmul_modp_numpy(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # split b into 16-bit halves so that every partial dot product stays below 2**63
    b = np.asarray(b, dtype=np.int64)
    lo = b & 0xFFFF
    hi = b >> 16
    a = np.asarray(a, dtype=np.int64)
    part_lo = (a @ lo) % p
    part_hi = (a @ hi) % p
    return (part_lo + (part_hi * 65536) % p) % p


def commute_table_numpy(stack: np.ndarray, q: int) -> np.ndarray:
    """Boolean table ``T[i, j] = (x_i x_j == x_j x_i)`` over F_q for a stack of matrices."""
    k = stack.shape[0]
    table = np.zeros((k, k), dtype=np.bool_)
    for i in range(k):
        left = (stack[i] @ stack) % q
        right = (stack @ stack[i]) % q
        table[i] = np.all((left - right).reshape(k, -1) == 0, axis=1)
    return table


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _inv_mod_jit(a, p):
        # extended Euclid on int64
        t, new_t = 0, 1
        r, new_r = p, a % p
        while new_r != 0:
            quo = r // new_r
            t, new_t = new_t, t - quo * new_t
            r, new_r = new_r, r - quo * new_r
        if t < 0:
            t += p
        return t

    @njit(cache=True)
    def _rref_modp_inplace(m, p):
        rows, cols = m.shape
        pivots = np.empty(min(rows, cols), dtype=np.int64)
        rank = 0
        for col in range(cols):
            if rank >= rows:
                break
            piv = -1
            for i in range(rank, rows):
                if m[i, col] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != rank:
                for j in range(cols):
                    tmp = m[rank, j]
                    m[rank, j] = m[piv, j]
                    m[piv, j] = tmp
            inv = _inv_mod_jit(m[rank, col], p)
            for j in range(col, cols):
                m[rank, j] = (m[rank, j] * inv) % p
            for i in range(rows):
                if i == rank:
                    continue
                f = m[i, col]
                if f == 0:
                    continue
                for j in range(col, cols):
                    v = m[rank, j]
                    if v != 0:
                        m[i, j] = (m[i, j] - f * v) % p
            pivots[rank] = col
            rank += 1
        return pivots[:rank]

    def rref_modp_numba(a: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
        m = np.array(a, dtype=np.int64, copy=True)
        if m.size == 0:
            return m, np.zeros(0, dtype=np.int64)
        pivots = _rref_modp_inplace(m, np.int64(p))
        return m, pivots.copy()

    @njit(cache=True)
    def _matmul_modp_jit(a, b, p):
        # b split into 16-bit limbs: each product is < 2**47, so 2**15 of them
        # can be summed before a reduction is needed
        n, k = a.shape
        m = b.shape[1]
        b_lo = b & 0xFFFF
        b_hi = b >> 16
        lo = np.zeros((n, m), dtype=np.int64)
        hi = np.zeros((n, m), dtype=np.int64)
        for i in range(n):
            pending = 0
            for t in range(k):
                x = a[i, t]
                if x == 0:
                    continue
                for j in range(m):
                    lo[i, j] += x * b_lo[t, j]
                    hi[i, j] += x * b_hi[t, j]
                pending += 1
                if pending == 32768:
                    for j in range(m):
                        lo[i, j] %= p
                        hi[i, j] %= p
                    pending = 0
        out = np.empty((n, m), dtype=np.int64)
        for i in range(n):
            for j in range(m):
                out[i, j] = (lo[i, j] % p + ((hi[i, j] % p) * 65536) % p) % p
        return out

    def matmul_modp_numba(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
        return _matmul_modp_jit(
            np.ascontiguousarray(a, dtype=np.int64),
            np.ascontiguousarray(b, dtype=np.int64),
            np.int64(p),
        )

    @njit(cache=True, parallel=True)
    def _commute_table_jit(stack, q):
        k, n, _ = stack.shape
        table = np.zeros((k, k), dtype=np.bool_)
        for i in prange(k):
            x = stack[i]
            for j in range(i, k):
                y = stack[j]
                ok = True
                for a in range(n):
                    if not ok:
                        break
                    for b in range(n):
                        s = 0
                        for c in range(n):
                            s += x[a, c] * y[c, b] - y[a, c] * x[c, b]
                        if s % q != 0:
                            ok = False
                            break
                table[i, j] = ok
        for i in range(k):
            for j in range(i):
                table[i, j] = table[j, i]
        return table

    def commute_table_numba(stack: np.ndarray, q: int) -> np.ndarray:
        return _commute_table_jit(np.ascontiguousarray(stack, dtype=np.int64), np.int64(q))


if USE_JIT:
    rref_modp = rref_modp_numba
    matmul_modp = matmul_modp_numba
    commute_table = commute_table_numba
else:
    rref_modp = rref_modp_numpy
    matmul_modp = matmul_modp_numpy
    commute_table = commute_table_numpy


def backend() -> str:
    return "numba" if USE_JIT else "numpy"
