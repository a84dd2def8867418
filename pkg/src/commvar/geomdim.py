"""Linearized dimension witnesses.

Upper-bound probes: tangent spaces of the commuting scheme at a point.
Lower-bound witnesses: ranks of differentials of explicit parametrizations
at explicit points (rank at a point never exceeds the generic rank, which is
at most the dimension of the closure of the image).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction

import numpy as np

from .exactfield import DEFAULT_PRIME, FieldSpec, Mat, rank_array
from .nilcore import MatTuple, ad_matrix, centralizer_dim, is_commuting_tuple
from .witnesses import (
    GAMMA_SLOTS,
    GammaCoords,
    ParabolicShape,
    SplitMix64,
    gamma_commutator_block,
    gamma_element,
    gamma_partner_matrix,
    gamma_partner_space,
    gamma_v,
    generic_gamma_point,
    in_nilradical,
    nilradical_element,
    sample_regular_tuple,
)

KINDS = ("OrbitOfTuple", "ParabolicFamily", "GammaFamily")


class InvalidMapSpec(ValueError):
    pass


def _neg(fld: FieldSpec, arr: np.ndarray) -> np.ndarray:
    return (-arr) % fld.p if fld.kind == "Fp" else -arr


def _zeros(fld: FieldSpec, rows: int, cols: int) -> np.ndarray:
    return Mat.zeros(fld, rows, cols).a.copy()


# ---------------------------------------------------------------------------
# tangent probes
# ---------------------------------------------------------------------------

def commuting_tangent_matrix(t: MatTuple) -> np.ndarray:
    """Rows of ``[xi_i, x_j] + [x_i, xi_j] = 0`` for i < j; columns are (xi_1, ..., xi_r)."""
    n, r, fld = t.n, t.r, t.field
    nn = n * n
    ads = [ad_matrix(x) for x in t.mats]
    blocks = []
    for i in range(r):
        for j in range(i + 1, r):
            row = _zeros(fld, nn, r * nn)
            row[:, i * nn:(i + 1) * nn] = _neg(fld, ads[j])
            row[:, j * nn:(j + 1) * nn] = ads[i]
            blocks.append(row)
    if not blocks:
        return _zeros(fld, 0, r * nn)
    return np.concatenate(blocks, axis=0)


def commuting_tangent_dim(t: MatTuple) -> int:
    if not is_commuting_tuple(t):
        raise ValueError("tangent space of the commuting scheme needs a commuting tuple")
    m = commuting_tangent_matrix(t)
    return m.shape[1] - (rank_array(t.field, m) if m.shape[0] else 0)


def nilpotent_tangent_rows(x: Mat) -> np.ndarray:
    """n rows; row k-1 is the functional xi -> k tr(x^(k-1) xi), k = 1..n."""
    n, fld = x.rows, x.field
    if fld.kind == "Fp" and fld.p <= n:
        raise ValueError(f"trace-power linearization needs p > n (p={fld.p}, n={n})")
    rows = []
    power = Mat.identity(fld, n)
    for k in range(1, n + 1):
        # tr(P xi) = sum_{a,b} P[a,b] xi[b,a], so the row is vec(P^T) scaled by k
        rows.append(power.T.scale(k).flat())
        power = power @ x
    return np.stack(rows)


def nilpotent_commuting_tangent_dim(t: MatTuple) -> int:
    """Tangent probe for tuples of nilpotents: commuting rows plus trace-power rows per entry."""
    if not is_commuting_tuple(t):
        raise ValueError("needs a commuting tuple")
    n, r, fld = t.n, t.r, t.field
    nn = n * n
    parts = [commuting_tangent_matrix(t)]
    for i, x in enumerate(t.mats):
        block = _zeros(fld, n, r * nn)
        block[:, i * nn:(i + 1) * nn] = nilpotent_tangent_rows(x)
        parts.append(block)
    m = np.concatenate(parts, axis=0)
    return r * nn - rank_array(fld, m)


# ---------------------------------------------------------------------------
# parametrization ranks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaBase:
    x: GammaCoords
    y: GammaCoords


@dataclass(frozen=True)
class MapSpec:
    """A parametrized family through a base point.

    * ``OrbitOfTuple``: g -> g . t
    * ``ParabolicFamily``: (g, w_1..w_r) -> g . (w_1..w_r), w_i in u_P
    * ``GammaFamily``: (g, X, Y) -> g . (v, X, Y), (X, Y) in C_2(Gamma)
    """

    kind: str
    field: FieldSpec
    n: int
    r: int = 1
    s: int | None = None
    base: MatTuple | GammaBase | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidMapSpec(f"unknown family kind {self.kind!r}")
        if self.kind == "GammaFamily":
            if self.s is None or self.s < 1 or self.n != 4 * self.s or self.r != 3:
                raise InvalidMapSpec("GammaFamily needs s >= 1, n = 4s, r = 3")
        if self.n < 1 or self.r < 1:
            raise InvalidMapSpec("n and r must be >= 1")
        if self.kind == "ParabolicFamily" and self.n < 2:
            raise InvalidMapSpec("ParabolicFamily needs n >= 2")


@dataclass
class RankWitness:
    kind: str
    n: int
    r: int
    s: int | None
    seed: int | None
    field: FieldSpec
    rank_field: FieldSpec
    base: MatTuple | GammaBase
    jacobian_shape: tuple[int, int]
    rank: int
    extra: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        if isinstance(self.base, GammaBase):
            base = {"X": self.base.x.to_json(), "Y": self.base.y.to_json()}
        else:
            base = self.base.to_json()
        spec = {"kind": self.kind, "n": self.n, "r": self.r}
        if self.s is not None:
            spec["s"] = self.s
        return {
            "spec": spec,
            "seed": self.seed,
            "field": self.field.to_json(),
            "rank_field": self.rank_field.to_json(),
            "base_point": base,
            "jacobian_shape": list(self.jacobian_shape),
            "rank": self.rank,
            **({"extra": self.extra} if self.extra else {}),
        }


def spec_from_json(obj: dict) -> MapSpec:
    s = obj["spec"]
    fld = FieldSpec.from_json(obj["field"])
    bp = obj["base_point"]
    if s["kind"] == "GammaFamily":
        base = GammaBase(GammaCoords.from_json(fld, bp["X"]), GammaCoords.from_json(fld, bp["Y"]))
    else:
        base = MatTuple.from_json(bp)
    return MapSpec(kind=s["kind"], field=fld, n=s["n"], r=s["r"], s=s.get("s"), base=base)


def default_base(spec: MapSpec, seed: int):
    """Seeded base point for a family."""
    fld = spec.field
    if spec.kind == "OrbitOfTuple":
        return sample_regular_tuple(spec.n, spec.r, fld, seed)
    if spec.kind == "ParabolicFamily":
        shape = ParabolicShape(spec.n)
        rng = SplitMix64(seed)
        mats = tuple(
            nilradical_element(shape, fld, [rng.scalar(fld) for _ in range(shape.dim_u)])
            for _ in range(spec.r)
        )
        return MatTuple(mats)
    x, used, _ = generic_gamma_point(spec.s, fld, seed)
    basis, _ = gamma_partner_space(x)
    rng = SplitMix64(used ^ 0x5DEECE66D)
    coeffs = [rng.scalar(fld) for _ in basis]
    vec = [fld.zero()] * (4 * spec.s * spec.s)
    for c, b in zip(coeffs, basis):
        bv = b.vector()
        vec = [fld.scalar(a + c * w) for a, w in zip(vec, bv)]
    return GammaBase(x, GammaCoords.from_vector(fld, spec.s, vec))


def _embedding(fld: FieldSpec, n: int, slots: list[int]) -> np.ndarray:
    emb = np.zeros((n * n, len(slots)), dtype=np.int64)
    for k, flat in enumerate(slots):
        emb[flat, k] = 1
    return fld.array(emb)


def _gamma_slots(s: int) -> list[list[int]]:
    """Flat indices (in the realized 4s x 4s matrix) carrying each Gamma coordinate."""
    n = 4 * s
    out = []
    for c in range(4):
        for a in range(s):
            for b in range(s):
                out.append([(bi * s + a) * n + bj * s + b for bi, bj in GAMMA_SLOTS[c]])
    return out


def jacobian(spec: MapSpec) -> tuple[np.ndarray, int]:
    """Differential at (identity, base) and the number of trailing tangency rows.

    Returns ``(J, k)``: the last ``k`` rows of ``J`` cut out the tangent space of
    the parameter variety (only nonzero for the Gamma family).
    """
    if spec.base is None:
        raise InvalidMapSpec("jacobian needs a base point")
    fld, n = spec.field, spec.n
    nn = n * n
    if spec.kind == "OrbitOfTuple":
        t = spec.base
        if not isinstance(t, MatTuple) or t.n != n or t.r != spec.r or t.field != fld:
            raise InvalidMapSpec("orbit base point does not match the MapSpec")
        return np.concatenate([_neg(fld, ad_matrix(x)) for x in t.mats], axis=0), 0

    if spec.kind == "ParabolicFamily":
        t = spec.base
        shape = ParabolicShape(n)
        if not isinstance(t, MatTuple) or t.n != n or t.r != spec.r or t.field != fld:
            raise InvalidMapSpec("parabolic base point does not match the MapSpec")
        if not all(in_nilradical(w, shape) for w in t.mats):
            raise InvalidMapSpec("parabolic base point leaves u_P")
        d = shape.dim_u
        emb = _embedding(fld, n, [i * n + j for i, j in shape.positions()])
        rows = []
        for i, w in enumerate(t.mats):
            block = _zeros(fld, nn, nn + spec.r * d)
            block[:, :nn] = _neg(fld, ad_matrix(w))
            block[:, nn + i * d: nn + (i + 1) * d] = emb
            rows.append(block)
        return np.concatenate(rows, axis=0), 0

    base = spec.base
    if not isinstance(base, GammaBase):
        raise InvalidMapSpec("Gamma base point must be a GammaBase")
    s = spec.s
    g = 4 * s * s
    k = s * s
    xh, yh = gamma_element(base.x), gamma_element(base.y)
    if not _base_commutes(base):
        raise InvalidMapSpec("Gamma base point does not commute")
    v = gamma_v(s, fld)
    slots = _gamma_slots(s)
    emb = np.zeros((nn, g), dtype=np.int64)
    for c, flats in enumerate(slots):
        for f in flats:
            emb[f, c] = 1
    emb = fld.array(emb)
    cols = nn + 2 * g
    comp_v = _zeros(fld, nn, cols)
    comp_v[:, :nn] = _neg(fld, ad_matrix(v))
    comp_x = _zeros(fld, nn, cols)
    comp_x[:, :nn] = _neg(fld, ad_matrix(xh))
    comp_x[:, nn:nn + g] = emb
    comp_y = _zeros(fld, nn, cols)
    comp_y[:, :nn] = _neg(fld, ad_matrix(yh))
    comp_y[:, nn + g:] = emb
    tangent = _zeros(fld, k, cols)
    # d(block(X, Y)) = block(dX, Y) + block(X, dY) = -P(Y) dX + P(X) dY
    tangent[:, nn:nn + g] = _neg(fld, gamma_partner_matrix(base.y))
    tangent[:, nn + g:] = gamma_partner_matrix(base.x)
    return np.concatenate([comp_v, comp_x, comp_y, tangent], axis=0), k


def _base_commutes(base: GammaBase) -> bool:
    return gamma_commutator_block(base.x, base.y).is_zero()


def _rank_in(fld: FieldSpec, arr: np.ndarray, exact: bool) -> tuple[int, FieldSpec]:
    """Rank, taking the modular fast path for integral rational matrices unless ``exact``."""
    if fld.kind == "Q" and not exact:
        flat = arr.reshape(-1)
        if all(Fraction(v).denominator == 1 for v in flat):
            target = FieldSpec.prime(DEFAULT_PRIME)
            mod = np.array([int(v) % DEFAULT_PRIME for v in flat], dtype=np.int64).reshape(arr.shape)
            return rank_array(target, mod), target
    return rank_array(fld, arr), fld


def rank_witness(spec: MapSpec, seed: int | None = None, exact: bool = False) -> RankWitness:
    """Rank of the family's differential at its base point (seeded if absent)."""
    if spec.base is None:
        if seed is None:
            raise InvalidMapSpec("need a base point or a seed")
        spec = replace(spec, base=default_base(spec, seed))
    jac, k = jacobian(spec)
    full, rank_field = _rank_in(spec.field, jac, exact)
    extra = {}
    if k:
        eq_rank, _ = _rank_in(spec.field, jac[-k:], exact)
        if eq_rank != k:
            raise InvalidMapSpec("base point is not a smooth point of the parameter variety")
        rank = full - eq_rank
        extra = {"tangency_rows": k, "stacked_rank": full}
    else:
        rank = full
    return RankWitness(
        kind=spec.kind, n=spec.n, r=spec.r, s=spec.s, seed=seed, field=spec.field,
        rank_field=rank_field, base=spec.base, jacobian_shape=tuple(jac.shape), rank=rank, extra=extra,
    )


def param_rank(spec: MapSpec, seed: int | None = None, exact: bool = False) -> int:
    return rank_witness(spec, seed, exact).rank


def recompute_rank(obj: dict) -> int:
    """Rank from a serialized rank witness, using only the stored base point."""
    spec = spec_from_json(obj)
    rank_field = FieldSpec.from_json(obj["rank_field"])
    exact = rank_field == spec.field
    return rank_witness(spec, obj.get("seed"), exact=exact).rank


def gamma_family_dim(s: int, field: FieldSpec, seed: int) -> tuple[int, dict]:
    """Additive lower bound dim G.v + dim Gamma + dim of the partner space of a generic X."""
    n = 4 * s
    zv = centralizer_dim(gamma_v(s, field))
    x, used, partner = generic_gamma_point(s, field, seed)
    parts = {
        "n": n,
        "s": s,
        "orbit_term": n * n - zv,
        "centralizer_v": zv,
        "gamma_dim": 4 * s * s,
        "partner_dim": partner,
        "seed_used": used,
        "X": x.to_json(),
    }
    return parts["orbit_term"] + parts["gamma_dim"] + partner, parts
