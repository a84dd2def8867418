"""Commutators, nilpotency, centralizers and non-unital generated algebras."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exactfield import (
    FieldMismatch,
    FieldSpec,
    Mat,
    ShapeError,
    inverse,
    nullspace_array,
    rank_array,
    span_basis,
)


@dataclass(frozen=True)
class MatTuple:
    """Ordered r-tuple of n x n matrices over one field."""

    mats: tuple[Mat, ...]

    def __post_init__(self):
        mats = tuple(self.mats)
        if not mats:
            raise ShapeError("a tuple needs at least one matrix")
        first = mats[0]
        if not first.is_square:
            raise ShapeError(f"tuple entries must be square, got {first.shape}")
        for m in mats[1:]:
            if m.field != first.field:
                raise FieldMismatch(f"{first.field} vs {m.field}")
            if m.shape != first.shape:
                raise ShapeError(f"{first.shape} vs {m.shape}")
        object.__setattr__(self, "mats", mats)

    @classmethod
    def of(cls, *mats: Mat) -> "MatTuple":
        return cls(tuple(mats))

    @property
    def field(self) -> FieldSpec:
        return self.mats[0].field

    @property
    def n(self) -> int:
        return self.mats[0].rows

    @property
    def r(self) -> int:
        return len(self.mats)

    def __iter__(self):
        return iter(self.mats)

    def __len__(self):
        return len(self.mats)

    def __getitem__(self, i):
        return self.mats[i]

    def to_json(self) -> dict:
        return {
            "field": self.field.to_json(),
            "n": self.n,
            "r": self.r,
            "mats": [m.encoded_entries() for m in self.mats],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MatTuple":
        field = FieldSpec.from_json(obj["field"])
        mats = tuple(Mat.from_entries(field, e) for e in obj["mats"])
        t = cls(mats)
        if t.r != obj.get("r", t.r) or t.n != obj.get("n", t.n):
            raise ShapeError(f"declared n={obj.get('n')}, r={obj.get('r')} but found n={t.n}, r={t.r}")
        return t


@dataclass(frozen=True)
class AlgebraClosure:
    basis: tuple[Mat, ...]
    dim: int
    generations: int


def commutator(x: Mat, y: Mat) -> Mat:
    if x.shape != y.shape or not x.is_square:
        raise ShapeError(f"commutator of {x.shape} and {y.shape}")
    return x @ y - y @ x


def is_nilpotent(x: Mat) -> bool:
    """True iff x^n = 0, tested by repeated squaring."""
    if not x.is_square:
        raise ShapeError("nilpotency needs a square matrix")
    n = x.rows
    power, e = x, 1
    while e < n:
        power = power @ power
        e *= 2
        if power.is_zero():
            return True
    return power.is_zero()


def is_commuting_tuple(t: MatTuple) -> bool:
    mats = t.mats
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if not commutator(mats[i], mats[j]).is_zero():
                return False
    return True


def regular_nilpotent(n: int, field: FieldSpec) -> Mat:
    """The single n x n Jordan block with eigenvalue 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Mat(field, np.eye(n, k=1, dtype=np.int64))


def ad_matrix(x: Mat) -> np.ndarray:
    """Matrix of ``y -> xy - yx`` on row-major flattened n x n matrices."""
    n = x.rows
    field = x.field
    eye = np.eye(n, dtype=np.int64)
    if field.kind == "Fp":
        left = np.kron(x.a, eye)
        right = np.kron(eye, x.a.T)
        return (left - right) % field.p
    eye_q = field.array(eye)
    return np.kron(x.a, eye_q) - np.kron(eye_q, x.a.T)


def _basis_from_vectors(field: FieldSpec, n: int, vecs) -> tuple[Mat, ...]:
    return tuple(Mat.from_flat(field, n, n, v) for v in vecs)


def centralizer(x: Mat) -> tuple[tuple[Mat, ...], int]:
    """Basis and dimension of ``{y : xy = yx}``."""
    if not x.is_square:
        raise ShapeError("centralizer needs a square matrix")
    vecs = nullspace_array(x.field, ad_matrix(x))
    return _basis_from_vectors(x.field, x.rows, vecs), len(vecs)


def _stacked_ad(t: MatTuple) -> np.ndarray:
    return np.concatenate([ad_matrix(m) for m in t.mats], axis=0)


def simultaneous_centralizer(t: MatTuple) -> tuple[tuple[Mat, ...], int]:
    vecs = nullspace_array(t.field, _stacked_ad(t))
    return _basis_from_vectors(t.field, t.n, vecs), len(vecs)


def centralizer_dim(x: Mat) -> int:
    n = x.rows
    return n * n - rank_array(x.field, ad_matrix(x))


def is_regular_nilpotent(x: Mat) -> bool:
    return is_nilpotent(x) and centralizer_dim(x) == x.rows


def algebra_closure(t: MatTuple | Sequence[Mat]) -> AlgebraClosure:
    """Smallest product-closed linear span of the generators (no identity adjoined).

    Each round multiplies every ordered pair of current basis elements and
    re-spans, stopping once the dimension no longer grows.
    """
    mats = list(t.mats if isinstance(t, MatTuple) else t)
    basis = span_basis(mats)
    generations = 0
    while basis:
        products = [a @ b for a in basis for b in basis]
        grown = span_basis(basis + products)
        generations += 1
        if len(grown) == len(basis):
            break
        basis = grown
    return AlgebraClosure(basis=tuple(basis), dim=len(basis), generations=generations)


def conjugate(g: Mat, t: MatTuple) -> MatTuple:
    """``(g x_i g^-1)_i``; raises ``ZeroDivisionError`` for singular g."""
    g_inv = inverse(g)
    return MatTuple(tuple(g @ x @ g_inv for x in t.mats))


def orbit_dim(t: MatTuple) -> int:
    # n^2 minus the simultaneous centralizer dimension
    return rank_array(t.field, _stacked_ad(t))


def powers(x: Mat, upto: int) -> list[Mat]:
    """``[x, x^2, ..., x^upto]``."""
    out = [x]
    for _ in range(upto - 1):
        out.append(out[-1] @ x)
    return out
