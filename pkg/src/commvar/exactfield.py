"""Exact dense linear algebra over Q and prime fields F_p.

Matrices over F_p are stored as read-only ``int64`` arrays with entries in
``[0, p)``; the heavy lifting goes through :mod:`commvar._kernels`. Matrices
over Q are stored as read-only object arrays of :class:`fractions.Fraction`
and are reduced in pure Python.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

DEFAULT_PRIME = 2147483647


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for all n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class ShapeError(ValueError):
    pass


class FieldMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind == "Q":
            if self.p is not None:
                raise ValueError("the rational field takes no modulus")
        elif self.kind == "Fp":
            if self.p is None or not is_prime(self.p) or self.p <= 2:
                raise ValueError(f"modulus must be an odd prime, got {self.p!r}")
            if self.p >= _kernels.MAX_MODULUS:
                raise ValueError(f"modulus must be below 2**31, got {self.p}")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls("Q")

    @classmethod
    def prime(cls, p: int = DEFAULT_PRIME) -> "FieldSpec":
        return cls("Fp", int(p))

    @classmethod
    def parse(cls, text: str) -> "FieldSpec":
        """Parse ``q`` / ``Q`` or ``fp:<p>``."""
        t = text.strip().lower()
        if t in ("q", "qq", "rationals"):
            return cls.rationals()
        if t.startswith("fp:"):
            return cls.prime(int(t[3:]))
        raise ValueError(f"unrecognised field spec {text!r}")

    @property
    def is_prime_field(self) -> bool:
        return self.kind == "Fp"

    @property
    def characteristic(self) -> int:
        return self.p if self.kind == "Fp" else 0

    @property
    def dtype(self):
        return np.int64 if self.kind == "Fp" else object

    def __str__(self) -> str:
        return "Q" if self.kind == "Q" else f"Fp({self.p})"

    def to_json(self) -> dict:
        if self.kind == "Q":
            return {"kind": "Q"}
        return {"kind": "Fp", "p": self.p}

    @classmethod
    def from_json(cls, obj: dict) -> "FieldSpec":
        if obj.get("kind") == "Q":
            return cls.rationals()
        if obj.get("kind") == "Fp":
            return cls.prime(int(obj["p"]))
        raise ValueError(f"bad field object {obj!r}")

    def scalar(self, x):
        """Canonical representative of ``x`` in this field."""
        if self.kind == "Fp":
            if isinstance(x, Fraction):
                return (x.numerator % self.p) * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        if isinstance(x, str):
            return Fraction(x)
        return Fraction(x)

    def zero(self):
        return 0 if self.kind == "Fp" else Fraction(0)

    def one(self):
        return 1 if self.kind == "Fp" else Fraction(1)

    def inv(self, x):
        if self.kind == "Fp":
            x = int(x) % self.p
            if x == 0:
                raise ZeroDivisionError("inverse of zero")
            return pow(x, -1, self.p)
        return 1 / Fraction(x)

    def array(self, values) -> np.ndarray:
        """Coerce a nested sequence (or ndarray) into this field's canonical array."""
        if self.kind == "Fp":
            arr = np.asarray(values)
            if arr.dtype == object:
                arr = np.vectorize(self.scalar, otypes=[np.int64])(arr) if arr.size else arr.astype(np.int64)
            return np.mod(arr.astype(np.int64), self.p)
        arr = np.asarray(values, dtype=object)
        out = np.empty(arr.shape, dtype=object)
        flat_in = arr.reshape(-1)
        flat_out = out.reshape(-1)
        for i, v in enumerate(flat_in):
            flat_out[i] = v if type(v) is Fraction else Fraction(v)
        return out

    def encode(self, x):
        if self.kind == "Fp":
            return int(x)
        f = Fraction(x)
        return f"{f.numerator}/{f.denominator}"

    def decode(self, v):
        if self.kind == "Fp":
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"prime-field entry must be an integer, got {v!r}")
            if not 0 <= v < self.p:
                raise ValueError(f"prime-field entry {v} outside [0, {self.p})")
            return v
        if isinstance(v, int) and not isinstance(v, bool):
            return Fraction(v)
        if not isinstance(v, str):
            raise ValueError(f"rational entry must be a string 'a/b', got {v!r}")
        return Fraction(v)


QQ = FieldSpec.rationals()


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class Mat:
    """Immutable dense matrix over a :class:`FieldSpec`."""

    __slots__ = ("field", "a")

    def __init__(self, field: FieldSpec, values, *, _trusted: bool = False):
        arr = values if _trusted else field.array(values)
        if arr.ndim != 2:
            raise ShapeError(f"matrix must be two-dimensional, got shape {arr.shape}")
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "a", _readonly(arr))

    def __setattr__(self, key, value):
        raise AttributeError("Mat is immutable")

    @classmethod
    def _wrap(cls, field: FieldSpec, arr: np.ndarray) -> "Mat":
        return cls(field, arr, _trusted=True)

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int | None = None) -> "Mat":
        cols = rows if cols is None else cols
        if field.kind == "Fp":
            return cls._wrap(field, np.zeros((rows, cols), dtype=np.int64))
        arr = np.empty((rows, cols), dtype=object)
        arr.fill(Fraction(0))
        return cls._wrap(field, arr)

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "Mat":
        return cls(field, np.eye(n, dtype=np.int64))

    @classmethod
    def elementary(cls, field: FieldSpec, n: int, i: int, j: int) -> "Mat":
        """Matrix unit with a single 1 at (i, j), zero-based."""
        arr = np.zeros((n, n), dtype=np.int64)
        arr[i, j] = 1
        return cls(field, arr)

    @classmethod
    def from_flat(cls, field: FieldSpec, rows: int, cols: int, vec) -> "Mat":
        arr = np.asarray(vec, dtype=field.dtype).reshape(rows, cols).copy()
        return cls._wrap(field, arr) if field.kind == "Fp" else cls(field, arr)

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def entries(self) -> list[list]:
        return self.a.tolist()

    def flat(self) -> np.ndarray:
        return self.a.reshape(-1)

    def __getitem__(self, idx):
        return self.a[idx]

    def _check(self, other: "Mat"):
        if not isinstance(other, Mat):
            raise TypeError(f"expected Mat, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __add__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"{self.shape} + {other.shape}")
        if self.field.kind == "Fp":
            return Mat._wrap(self.field, (self.a + other.a) % self.field.p)
        return Mat._wrap(self.field, self.a + other.a)

    def __sub__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"{self.shape} - {other.shape}")
        if self.field.kind == "Fp":
            return Mat._wrap(self.field, (self.a - other.a) % self.field.p)
        return Mat._wrap(self.field, self.a - other.a)

    def __neg__(self) -> "Mat":
        if self.field.kind == "Fp":
            return Mat._wrap(self.field, (-self.a) % self.field.p)
        return Mat._wrap(self.field, -self.a)

    def scale(self, c) -> "Mat":
        c = self.field.scalar(c)
        if self.field.kind == "Fp":
            return Mat._wrap(self.field, (self.a * c) % self.field.p)
        return Mat._wrap(self.field, self.a * c)

    def __matmul__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.cols != other.rows:
            raise ShapeError(f"{self.shape} @ {other.shape}")
        if self.field.kind == "Fp":
            return Mat._wrap(self.field, _kernels.matmul_modp(self.a, other.a, self.field.p))
        return Mat._wrap(self.field, _q_matmul(self.a, other.a))

    def __pow__(self, k: int) -> "Mat":
        if not self.is_square or k < 0:
            raise ShapeError("power needs a square matrix and k >= 0")
        result = Mat.identity(self.field, self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            k >>= 1
            if k:
                base = base @ base
        return result

    @property
    def T(self) -> "Mat":
        return Mat._wrap(self.field, self.a.T.copy())

    def is_zero(self) -> bool:
        return not np.any(self.a != 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and bool(np.all(self.a == other.a))

    def __hash__(self):
        return hash((self.field, self.shape, tuple(self.field.encode(v) for v in self.flat())))

    def __repr__(self) -> str:
        return f"Mat({self.field}, {[[self.field.encode(v) for v in row] for row in self.a.tolist()]})"

    # -- JSON ---------------------------------------------------------------

    def encoded_entries(self) -> list[list]:
        enc = self.field.encode
        return [[enc(v) for v in row] for row in self.a.tolist()]

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "rows": self.rows,
            "cols": self.cols,
            "entries": self.encoded_entries(),
        }

    @classmethod
    def from_entries(cls, field: FieldSpec, entries: Sequence[Sequence]) -> "Mat":
        decoded = [[field.decode(v) for v in row] for row in entries]
        widths = {len(row) for row in decoded}
        if len(widths) > 1:
            raise ShapeError("ragged matrix rows")
        if not decoded:
            raise ShapeError("matrix needs at least one row")
        return cls(field, decoded)

    @classmethod
    def from_json(cls, obj: dict) -> "Mat":
        field = FieldSpec.from_json(obj["field"])
        mat = cls.from_entries(field, obj["entries"])
        if mat.shape != (obj["rows"], obj["cols"]):
            raise ShapeError(f"declared shape {(obj['rows'], obj['cols'])} but entries are {mat.shape}")
        return mat


def _q_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    rows, inner = a.shape
    cols = b.shape[1]
    out = np.empty((rows, cols), dtype=object)
    zero = Fraction(0)
    bl = b.tolist()
    for i, arow in enumerate(a.tolist()):
        acc = [zero] * cols
        for t, x in enumerate(arow):
            if x:
                brow = bl[t]
                for j in range(cols):
                    y = brow[j]
                    if y:
                        acc[j] = acc[j] + x * y
        out[i, :] = acc
    return out


# ---------------------------------------------------------------------------
# row reduction
# ---------------------------------------------------------------------------

def _q_rref(rows_in: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    m = [list(r) for r in rows_in]
    nrows = len(m)
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        piv = next((i for i in range(row, nrows) if m[i][col]), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        prow = m[row]
        inv = 1 / prow[col]
        if inv != 1:
            prow = [v * inv if v else v for v in prow]
            m[row] = prow
        nz = [j for j in range(col, ncols) if prow[j]]
        for i in range(nrows):
            if i == row:
                continue
            f = m[i][col]
            if f:
                target = m[i]
                for j in nz:
                    target[j] = target[j] - f * prow[j]
        pivots.append(col)
        row += 1
    return m, pivots


def rref_array(field: FieldSpec, arr: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Row reduce a raw array in ``field``'s representation."""
    if arr.size == 0:
        return arr.copy(), []
    if field.kind == "Fp":
        r, piv = _kernels.rref_modp(arr, field.p)
        return r, [int(c) for c in piv]
    rows, piv = _q_rref(arr.tolist(), arr.shape[1])
    out = np.empty(arr.shape, dtype=object)
    for i, row in enumerate(rows):
        out[i, :] = row
    return out, piv


def rank_array(field: FieldSpec, arr: np.ndarray) -> int:
    return len(rref_array(field, arr)[1])


def rref(m: Mat) -> tuple[Mat, int, list[int]]:
    """Reduced row-echelon form, rank and pivot columns (leftmost column, topmost row)."""
    r, piv = rref_array(m.field, m.a)
    return Mat._wrap(m.field, r), len(piv), piv


def rank(m: Mat) -> int:
    return rank_array(m.field, m.a)


def _nullspace_from_rref(field: FieldSpec, r: np.ndarray, pivots: list[int], ncols: int) -> list[tuple]:
    pivot_set = set(pivots)
    free = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    one, zero = field.one(), field.zero()
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for i, pc in enumerate(pivots):
            coeff = r[i, f]
            if coeff:
                v[pc] = (-int(coeff)) % field.p if field.kind == "Fp" else -coeff
        basis.append(tuple(int(x) for x in v) if field.kind == "Fp" else tuple(v))
    return basis


def nullspace_array(field: FieldSpec, arr: np.ndarray) -> list[tuple]:
    ncols = arr.shape[1]
    if arr.shape[0] == 0:
        r, piv = arr, []
    else:
        r, piv = rref_array(field, arr)
    return _nullspace_from_rref(field, r, piv, ncols)


def nullspace(m: Mat) -> list[tuple]:
    """Basis of ``{v : m v = 0}``, one vector per free column of the rref."""
    return nullspace_array(m.field, m.a)


def _stack_flat(vs: Sequence[Mat]) -> np.ndarray:
    first = vs[0]
    for v in vs[1:]:
        if v.field != first.field:
            raise FieldMismatch(f"{first.field} vs {v.field}")
        if v.shape != first.shape:
            raise ShapeError(f"{first.shape} vs {v.shape}")
    return np.stack([v.flat() for v in vs])


def span_dim(vs: Sequence[Mat]) -> int:
    """Dimension of the linear span of same-shape matrices."""
    vs = list(vs)
    if not vs:
        return 0
    return rank_array(vs[0].field, _stack_flat(vs))


def span_basis(vs: Sequence[Mat]) -> list[Mat]:
    """Canonical basis of the span: the nonzero rows of the rref, reshaped."""
    vs = list(vs)
    if not vs:
        return []
    field = vs[0].field
    rows, cols = vs[0].shape
    r, piv = rref_array(field, _stack_flat(vs))
    return [Mat._wrap(field, np.array(r[i]).reshape(rows, cols)) for i in range(len(piv))]


def same_span(a: Sequence[Mat], b: Sequence[Mat]) -> bool:
    da, db = span_dim(a), span_dim(b)
    return da == db == span_dim(list(a) + list(b))


def solve(m: Mat, b: Sequence) -> tuple | None:
    """One solution of ``m x = b`` with free variables set to zero, or ``None``."""
    field = m.field
    if len(b) != m.rows:
        raise ShapeError(f"rhs length {len(b)} != {m.rows} rows")
    col = field.array([[v] for v in b]) if m.rows else np.zeros((0, 1), dtype=field.dtype)
    aug = np.concatenate([m.a, col], axis=1)
    r, piv = rref_array(field, aug)
    if m.cols in piv:
        return None
    x = [field.zero()] * m.cols
    for i, pc in enumerate(piv):
        x[pc] = int(r[i, m.cols]) if field.kind == "Fp" else r[i, m.cols]
    return tuple(x)


def inverse(m: Mat) -> Mat:
    if not m.is_square:
        raise ShapeError("inverse of a non-square matrix")
    n = m.rows
    eye = Mat.identity(m.field, n).a
    r, piv = rref_array(m.field, np.concatenate([m.a, eye], axis=1))
    if piv != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return Mat._wrap(m.field, np.array(r[:, n:]))


def mat_vec(m: Mat, v: Sequence) -> tuple:
    col = Mat(m.field, [[x] for x in v])
    return tuple((m @ col).flat().tolist())


def to_field(m: Mat, field: FieldSpec) -> Mat:
    """Map a matrix into another field (Q -> F_p needs p-integral entries)."""
    if m.field == field:
        return m
    if field.kind == "Fp":
        return Mat(field, [[field.scalar(v) for v in row] for row in m.a.tolist()])
    if m.field.kind == "Fp":
        return Mat(field, m.a.astype(object))
    raise FieldMismatch(f"cannot map {m.field} into {field}")


def as_matrix(field: FieldSpec, rows: Iterable[Iterable]) -> Mat:
    return Mat(field, [list(r) for r in rows])
