"""Explicit witness objects: the parabolic nilradical u_P, the matrix v and its
linear family Gamma inside z(v), and samplers for the regular component.

Randomness comes from :class:`SplitMix64`, a fixed 64-bit generator whose
output depends only on the seed, so witnesses are byte-reproducible on every
platform and numpy version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exactfield import FieldSpec, Mat, ShapeError, nullspace_array, rank_array
from .nilcore import MatTuple, conjugate, powers, regular_nilpotent

MASK64 = (1 << 64) - 1
RATIONAL_SAMPLE_RANGE = (-9, 9)


class SeedExhausted(RuntimeError):
    """Bounded retries ran out without producing a valid sample."""


class SplitMix64:
    """SplitMix64 (Steele, Lea and Flood): 64-bit state, increment 0x9E3779B97F4A7C15."""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % bound

    def scalar(self, field: FieldSpec):
        if field.kind == "Fp":
            return self.below(field.p)
        lo, hi = RATIONAL_SAMPLE_RANGE
        return lo + self.below(hi - lo + 1)

    def matrix(self, field: FieldSpec, rows: int, cols: int | None = None) -> Mat:
        cols = rows if cols is None else cols
        vals = [[self.scalar(field) for _ in range(cols)] for _ in range(rows)]
        return Mat(field, vals)


def random_invertible(rng: SplitMix64, field: FieldSpec, n: int, max_tries: int = 64) -> Mat:
    for _ in range(max_tries):
        g = rng.matrix(field, n)
        if rank_array(field, g.a) == n:
            return g
    raise SeedExhausted(f"no invertible {n}x{n} matrix in {max_tries} draws")


# ---------------------------------------------------------------------------
# parabolic nilradical
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParabolicShape:
    """Two-block partition [top, bottom] of n with top = ceil(n/2), bottom = floor(n/2)."""

    n: int

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def top(self) -> int:
        return self.n - self.n // 2

    @property
    def bottom(self) -> int:
        return self.n // 2

    @property
    def dim_u(self) -> int:
        return self.top * self.bottom

    def positions(self) -> list[tuple[int, int]]:
        """Zero-based (row, col) slots of the lower-left block, row-major."""
        return [(i, j) for i in range(self.top, self.n) for j in range(self.top)]


def parabolic_nilradical(n: int, field: FieldSpec) -> tuple[ParabolicShape, list[Mat]]:
    if n < 2:
        raise ValueError("u_P needs n >= 2")
    shape = ParabolicShape(n)
    basis = [Mat.elementary(field, n, i, j) for i, j in shape.positions()]
    return shape, basis


def nilradical_element(shape: ParabolicShape, field: FieldSpec, coords) -> Mat:
    arr = np.zeros((shape.n, shape.n), dtype=object)
    arr[:] = 0
    for (i, j), c in zip(shape.positions(), coords, strict=True):
        arr[i, j] = c
    return Mat(field, arr)


def in_nilradical(x: Mat, shape: ParabolicShape) -> bool:
    mask = np.ones((shape.n, shape.n), dtype=bool)
    for i, j in shape.positions():
        mask[i, j] = False
    return x.shape == (shape.n, shape.n) and not np.any(x.a[mask] != 0)


# ---------------------------------------------------------------------------
# v and Gamma in gl_{4s}
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaCoords:
    """Coordinates (A1, A2, A3, A4) of a point of Gamma, each s x s."""

    A1: Mat
    A2: Mat
    A3: Mat
    A4: Mat

    def __post_init__(self):
        s = self.A1.rows
        for a in self.blocks:
            if a.shape != (s, s):
                raise ShapeError(f"Gamma blocks must all be {s}x{s}, got {a.shape}")
            if a.field != self.A1.field:
                raise ShapeError("Gamma blocks over different fields")

    @property
    def blocks(self) -> tuple[Mat, Mat, Mat, Mat]:
        return (self.A1, self.A2, self.A3, self.A4)

    @property
    def s(self) -> int:
        return self.A1.rows

    @property
    def field(self) -> FieldSpec:
        return self.A1.field

    def vector(self) -> list:
        return [v for a in self.blocks for v in a.flat().tolist()]

    @classmethod
    def from_vector(cls, field: FieldSpec, s: int, vec) -> "GammaCoords":
        vec = list(vec)
        if len(vec) != 4 * s * s:
            raise ShapeError(f"expected {4 * s * s} coordinates, got {len(vec)}")
        k = s * s
        return cls(*(Mat.from_flat(field, s, s, vec[i * k:(i + 1) * k]) for i in range(4)))

    @classmethod
    def zero(cls, field: FieldSpec, s: int) -> "GammaCoords":
        z = Mat.zeros(field, s)
        return cls(z, z, z, z)

    def to_json(self) -> dict:
        return {"s": self.s, "blocks": [a.encoded_entries() for a in self.blocks]}

    @classmethod
    def from_json(cls, field: FieldSpec, obj: dict) -> "GammaCoords":
        return cls(*(Mat.from_entries(field, e) for e in obj["blocks"]))


# block slots (row block, col block) zero-based, per coordinate
GAMMA_SLOTS = {0: [(0, 1), (1, 3)], 1: [(0, 2)], 2: [(0, 3)], 3: [(2, 3)]}


def _place_blocks(field: FieldSpec, s: int, placed: list[tuple[int, int, Mat]]) -> Mat:
    n = 4 * s
    out = Mat.zeros(field, n).a.copy()
    for bi, bj, block in placed:
        out[bi * s:(bi + 1) * s, bj * s:(bj + 1) * s] = block.a
    return Mat._wrap(field, out)


def gamma_v(s: int, field: FieldSpec) -> Mat:
    """4s x 4s matrix with I_s in blocks (1,2) and (2,4), zero elsewhere."""
    if s < 1:
        raise ValueError("s must be >= 1")
    eye = Mat.identity(field, s)
    return _place_blocks(field, s, [(0, 1, eye), (1, 3, eye)])


def gamma_element(coords: GammaCoords) -> Mat:
    placed = []
    for idx, block in enumerate(coords.blocks):
        for bi, bj in GAMMA_SLOTS[idx]:
            placed.append((bi, bj, block))
    return _place_blocks(coords.field, coords.s, placed)


def block(x: Mat, s: int, bi: int, bj: int) -> Mat:
    """Zero-based (bi, bj) block of size s."""
    return Mat._wrap(x.field, x.a[bi * s:(bi + 1) * s, bj * s:(bj + 1) * s].copy())


def gamma_commutator_block(x: GammaCoords, y: GammaCoords) -> Mat:
    """The (1,4) block A1 B1 + A2 B4 - B1 A1 - B2 A4 of the commutator of two Gamma points.

    Every other block of the commutator is zero.
    """
    a1, a2, _, a4 = x.blocks
    b1, b2, _, b4 = y.blocks
    return a1 @ b1 + a2 @ b4 - b1 @ a1 - b2 @ a4


def _kron_left(a: Mat) -> np.ndarray:
    # vec(A B) = (A kron I) vec(B), row-major
    eye = a.field.array(np.eye(a.rows, dtype=np.int64))
    out = np.kron(a.a, eye)
    return out % a.field.p if a.field.kind == "Fp" else out


def _kron_right(a: Mat) -> np.ndarray:
    # vec(B A) = (I kron A^T) vec(B), row-major
    eye = a.field.array(np.eye(a.rows, dtype=np.int64))
    out = np.kron(eye, a.a.T)
    return out % a.field.p if a.field.kind == "Fp" else out


def _neg(field: FieldSpec, arr: np.ndarray) -> np.ndarray:
    return (-arr) % field.p if field.kind == "Fp" else -arr


def gamma_partner_matrix(x: GammaCoords) -> np.ndarray:
    """Matrix (s^2 x 4s^2) of the linear map Y -> gamma_commutator_block(X, Y)."""
    field = x.field
    a1, a2, _, a4 = x.blocks
    k = x.s * x.s
    b1_part = _kron_left(a1) - _kron_right(a1)
    b2_part = _neg(field, _kron_right(a4))
    b3_part = Mat.zeros(field, k).a
    b4_part = _kron_left(a2)
    out = np.concatenate([b1_part, b2_part, b3_part, b4_part], axis=1)
    return out % field.p if field.kind == "Fp" else out


def gamma_partner_space(x: GammaCoords) -> tuple[list[GammaCoords], int]:
    """Basis of ``{Y in Gamma : [X, Y] = 0}`` and its dimension (always >= 3 s^2)."""
    vecs = nullspace_array(x.field, gamma_partner_matrix(x))
    return [GammaCoords.from_vector(x.field, x.s, v) for v in vecs], len(vecs)


def random_gamma_coords(rng: SplitMix64, field: FieldSpec, s: int) -> GammaCoords:
    return GammaCoords(*(rng.matrix(field, s) for _ in range(4)))


def generic_gamma_point(s: int, field: FieldSpec, seed: int, max_tries: int = 8) -> tuple[GammaCoords, int, int]:
    """First seed in ``seed, seed+1, ...`` whose Gamma sample has partner space of dim 3 s^2.

    Returns ``(X, seed_used, partner_dim)``. Degenerate draws are skipped, not
    hidden: the seed actually used is reported.
    """
    for k in range(max_tries):
        used = seed + k
        x = random_gamma_coords(SplitMix64(used), field, s)
        dim = gamma_partner_space(x)[1]
        if dim == 3 * s * s:
            return x, used, dim
    raise SeedExhausted(f"no generic Gamma point in seeds {seed}..{seed + max_tries - 1}")


# ---------------------------------------------------------------------------
# regular component sampler
# ---------------------------------------------------------------------------

def sample_regular_tuple(n: int, r: int, field: FieldSpec, seed: int, max_tries: int = 64) -> MatTuple:
    """g . (x_reg, p_1(x_reg), ..., p_{r-1}(x_reg)) . g^-1 with random p_i (no constant term).

    Draw order: the r-1 coefficient vectors (n-1 each, lowest power first),
    then entries of g row by row, redrawing g while singular.
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be >= 1")
    if field.kind == "Fp" and field.p <= n:
        raise ValueError(f"need p > n, got p={field.p}, n={n}")
    rng = SplitMix64(seed)
    x = regular_nilpotent(n, field)
    pw = powers(x, n - 1) if n > 1 else []
    mats = [x]
    for _ in range(r - 1):
        acc = Mat.zeros(field, n)
        for xp in pw:
            acc = acc + xp.scale(rng.scalar(field))
        mats.append(acc)
    g = random_invertible(rng, field, n, max_tries)
    return conjugate(g, MatTuple(tuple(mats)))


def witness_json(construction: str, params: dict, t: MatTuple) -> dict:
    """Self-contained witness record: construction name, parameters and realized matrices."""
    return {
        "construction": construction,
        "params": params,
        "field": t.field.to_json(),
        "n": t.n,
        "r": t.r,
        "mats": [m.encoded_entries() for m in t.mats],
    }


def tuple_from_witness(obj: dict) -> MatTuple:
    return MatTuple.from_json(obj)
