"""Dimension formulas, reducibility certificates and their re-verification.

A certificate is plain JSON: witness data, a recomputable quantity, a
threshold and a verdict. ``verify_certificate`` recomputes the quantity from
the stored witness alone. The tool never claims irreducibility: when no
method produces a strict violation the verdict is ``NOT_FOUND``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Any

import numpy as np

from .exactfield import FieldSpec, Mat, nullspace_array
from .geomdim import MapSpec, rank_witness, recompute_rank, gamma_family_dim
from .nilcore import MatTuple, algebra_closure, centralizer_dim, is_commuting_tuple, is_nilpotent
from .witnesses import (
    GammaCoords,
    ParabolicShape,
    SplitMix64,
    gamma_partner_space,
    gamma_v,
    parabolic_nilradical,
    nilradical_element,
)

FORMAT_VERSION = 1
REDUCIBLE, NOT_FOUND, UNKNOWN = "REDUCIBLE", "NOT_FOUND", "UNKNOWN"
KINDS = ("AlgebraDim", "ComponentDim", "GammaDim")
DEFAULT_BUDGET = 16

BASIS = {
    "AlgebraDim": (
        "a commuting nilpotent r-tuple in the closure of the regular-first-entry locus generates "
        "a non-unital algebra of dimension at most n-1; a tuple generating dimension >= n lies "
        "in another component"
    ),
    "ComponentDim": (
        "the closed family G.u_P^r of commuting nilpotent tuples has dimension at least the "
        "differential rank at a point; exceeding n^2-n+(r-1)(n-1), the dimension of the "
        "regular component, forces a second component"
    ),
    "GammaDim": (
        "dim G.v + dim Gamma + dim of the commuting partners of a generic X in Gamma bounds "
        "the triple family G.(v, C_2(Gamma)) from below (fiber-dimension count over the orbit "
        "of v); exceeding n^2+n-2 forces a second component of C_3(N_n)"
    ),
}


class CertificateError(ValueError):
    """Malformed certificate data (as opposed to a failed re-verification)."""


# ---------------------------------------------------------------------------
# formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DimReport:
    n: int
    r: int
    dim_N_component: int
    dim_G_component: int
    dim_uP: int
    dim_VP: int
    lower_bound_nilpotent: int
    lower_bound_general: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def formula_dims(n: int, r: int) -> DimReport:
    if n < 1 or r < 1:
        raise ValueError("n and r must be >= 1")
    dim_n = n * n - n + (r - 1) * (n - 1)
    dim_g = n * n + (r - 1) * n
    dim_u = (n * n) // 4
    dim_vp = (r + 1) * dim_u
    return DimReport(
        n=n, r=r,
        dim_N_component=dim_n,
        dim_G_component=dim_g,
        dim_uP=dim_u,
        dim_VP=dim_vp,
        lower_bound_nilpotent=max(dim_n, dim_vp),
        lower_bound_general=max(dim_g, dim_vp + r),
    )


def bounds_ledger() -> list[dict]:
    """Known ranges for the least n making C_r(N_n) / C_r(gl_n) reducible."""
    return [
        {"quantity": "n'_r", "variety": "C_r(N_n)", "r": ">=4", "lower": 4, "upper": 4},
        {"quantity": "n'_3", "variety": "C_3(N_n)", "r": "3", "lower": 4, "upper": 16},
        {"quantity": "n_r", "variety": "C_r(gl_n)", "r": ">=4", "lower": 4, "upper": 4},
        {"quantity": "n_3", "variety": "C_3(gl_n)", "r": "3", "lower": 11, "upper": 29},
    ]


# ---------------------------------------------------------------------------
# certificate record
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    kind: str
    n: int
    r: int
    field: FieldSpec
    witness: dict
    quantity: int
    threshold: int
    verdict: str
    seed: int | None = None
    budget: int | None = None
    attempts: list["Certificate"] = dc_field(default_factory=list)

    @property
    def paper_basis(self) -> str:
        return BASIS[self.kind]

    @property
    def semantics(self) -> str:
        if self.field.kind == "Q":
            return "characteristic 0"
        return f"characteristic {self.field.p}"

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "n": self.n,
            "r": self.r,
            "field": self.field.to_json(),
            "witness": self.witness,
            "quantity": self.quantity,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "paper_basis": self.paper_basis,
            "semantics": self.semantics,
            "seed": self.seed,
            "budget": self.budget,
        }
        if self.attempts:
            out["attempts"] = [a.to_json() for a in self.attempts]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Certificate":
        try:
            kind = obj["kind"]
            if kind not in KINDS:
                raise CertificateError(f"unknown certificate kind {kind!r}")
            verdict = obj["verdict"]
            if verdict not in (REDUCIBLE, NOT_FOUND, UNKNOWN):
                raise CertificateError(f"unknown verdict {verdict!r}")
            for key in ("n", "r", "quantity", "threshold"):
                if not isinstance(obj[key], int) or isinstance(obj[key], bool):
                    raise CertificateError(f"{key} must be an integer")
            return cls(
                kind=kind,
                n=obj["n"],
                r=obj["r"],
                field=FieldSpec.from_json(obj["field"]),
                witness=dict(obj["witness"]),
                quantity=obj["quantity"],
                threshold=obj["threshold"],
                verdict=verdict,
                seed=obj.get("seed"),
                budget=obj.get("budget"),
                attempts=[cls.from_json(a) for a in obj.get("attempts", [])],
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, CertificateError):
                raise
            raise CertificateError(f"malformed certificate: {exc}") from exc


def _verdict(quantity: int, threshold: int) -> str:
    return REDUCIBLE if quantity > threshold else NOT_FOUND


# ---------------------------------------------------------------------------
# AlgebraDim
# ---------------------------------------------------------------------------

def _padded_nilradical_tuple(n: int, r: int, field: FieldSpec) -> MatTuple:
    _, basis = parabolic_nilradical(n, field)
    chosen = basis[:n]
    chosen = chosen + [chosen[-1]] * (r - len(chosen))
    return MatTuple(tuple(chosen))


def _layer_shapes(n: int, r: int) -> list[tuple[int, int, int]]:
    """Layer sizes (a, b, c) with more unknowns than product-matching equations,
    largest product block first."""
    shapes = [
        (a, b, n - a - b)
        for a in range(1, n)
        for b in range(1, n - a)
        if 2 * a > (r - 1) * (n - a - b)
    ]
    return sorted(shapes, key=lambda sh: (-min(sh[1] * sh[2], r * (r + 1) // 2), -sh[0], sh[1]))


def _layered_tuple(n: int, r: int, field: FieldSpec, shape: tuple[int, int, int], rng: SplitMix64) -> MatTuple | None:
    """Random commuting tuple on k^b -> k^a -> k^c (plus a free k^b -> k^c part).

    The middle maps are chosen first; the first-layer maps are then a random
    point of the linear space where all pairwise products agree.
    """
    a, b, c = shape
    mids = [rng.matrix(field, c, a) for _ in range(r)]
    nu = a * b
    eye_b = field.array(np.eye(b, dtype=np.int64))
    kron = [np.kron(m.a, eye_b) for m in mids]
    rows = []
    for i in range(r):
        for j in range(i + 1, r):
            blk = Mat.zeros(field, c * b, r * nu).a.copy()
            blk[:, j * nu:(j + 1) * nu] = kron[i]
            blk[:, i * nu:(i + 1) * nu] = -kron[j]
            rows.append(blk)
    if rows:
        system = np.concatenate(rows, axis=0)
        if field.kind == "Fp":
            system %= field.p
        null = nullspace_array(field, system)
    else:
        null = [tuple(int(i == k) for i in range(r * nu)) for k in range(r * nu)]
    if not null:
        return None
    coeffs = [rng.scalar(field) for _ in null]
    firsts = [field.scalar(sum(cf * v[k] for cf, v in zip(coeffs, null))) for k in range(r * nu)]
    mats = []
    for i in range(r):
        x = Mat.zeros(field, n).a.copy()
        x[b:b + a, 0:b] = np.array(firsts[i * nu:(i + 1) * nu], dtype=field.dtype).reshape(a, b)
        x[b + a:, b:b + a] = mids[i].a
        x[b + a:, 0:b] = rng.matrix(field, c, b).a
        mats.append(Mat(field, x))
    return MatTuple(tuple(mats))


def _random_nilradical_tuple(n: int, r: int, field: FieldSpec, rng: SplitMix64) -> MatTuple:
    shape = ParabolicShape(n)
    return MatTuple(tuple(
        nilradical_element(shape, field, [rng.scalar(field) for _ in range(shape.dim_u)]) for _ in range(r)
    ))


def certify_algebra(n: int, r: int, field: FieldSpec, seed: int = 0, budget: int = DEFAULT_BUDGET) -> Certificate:
    """Search for a commuting nilpotent r-tuple whose generated algebra has dimension >= n."""
    if n < 2 or r < 2:
        raise ValueError("n and r must be >= 2")
    threshold = n - 1
    if r >= n >= 4:
        t = _padded_nilradical_tuple(n, r, field)
        dim = algebra_closure(t).dim
        witness = {"family": "nilradical-catalog", "tuple": t.to_json()}
        return Certificate("AlgebraDim", n, r, field, witness, dim, threshold, _verdict(dim, threshold), seed, budget)

    best: tuple[int, MatTuple, str] | None = None
    shapes = _layer_shapes(n, r)
    for trial in range(budget):
        rng = SplitMix64((seed << 20) ^ trial)
        if shapes and trial % 2 == 0:
            shape = shapes[(trial // 2) % len(shapes)]
            t = _layered_tuple(n, r, field, shape, rng)
            family = f"layered{shape}"
        else:
            t = _random_nilradical_tuple(n, r, field, rng)
            family = "nilradical-random"
        if t is None:
            continue
        dim = algebra_closure(t).dim
        if best is None or dim > best[0]:
            best = (dim, t, family)
        if dim > threshold:
            break
    assert best is not None
    dim, t, family = best
    witness = {"family": family, "tuple": t.to_json()}
    return Certificate("AlgebraDim", n, r, field, witness, dim, threshold, _verdict(dim, threshold), seed, budget)


def _recompute_algebra(cert: Certificate) -> int:
    t = MatTuple.from_json(cert.witness["tuple"])
    if t.n != cert.n or t.r != cert.r or t.field != cert.field:
        raise CertificateError("witness tuple does not match the certificate header")
    if not is_commuting_tuple(t) or not all(is_nilpotent(x) for x in t):
        return -1
    return algebra_closure(t).dim


# ---------------------------------------------------------------------------
# ComponentDim
# ---------------------------------------------------------------------------

def certify_component_dim(
    n: int, r: int, field: FieldSpec, seed: int = 0, budget: int = DEFAULT_BUDGET, exact: bool = False
) -> Certificate:
    """Differential rank of (g, w) -> g.w on G x u_P^r against the regular-component dimension.

    Seeds ``seed, seed+1, ...`` are tried (at most ``budget``) until the rank
    reaches its ceiling (r+1) dim u_P; the best witness is kept.
    """
    if n < 2 or r < 2:
        raise ValueError("n and r must be >= 2")
    report = formula_dims(n, r)
    ceiling = (r + 1) * ParabolicShape(n).dim_u
    best = None
    for k in range(max(1, budget)):
        w = rank_witness(MapSpec("ParabolicFamily", field, n, r), seed=seed + k, exact=exact)
        if best is None or w.rank > best.rank:
            best = w
        if w.rank >= ceiling:
            break
    threshold = report.dim_N_component
    return Certificate(
        "ComponentDim", n, r, field, {"rank_witness": best.to_json()}, best.rank, threshold,
        _verdict(best.rank, threshold), seed, budget,
    )


def _recompute_component(cert: Certificate) -> int:
    rw = cert.witness["rank_witness"]
    spec = rw["spec"]
    if spec["kind"] != "ParabolicFamily" or spec["n"] != cert.n or spec["r"] != cert.r:
        raise CertificateError("rank witness does not match the certificate header")
    return recompute_rank(rw)


# ---------------------------------------------------------------------------
# GammaDim
# ---------------------------------------------------------------------------

def certify_gamma(s: int, field: FieldSpec, seed: int = 0, exact: bool = False) -> Certificate:
    """C_3(N_{4s}) via the v / Gamma family; also records the family's differential rank."""
    if s < 1:
        raise ValueError("s must be >= 1")
    n = 4 * s
    quantity, parts = gamma_family_dim(s, field, seed)
    jac = rank_witness(MapSpec("GammaFamily", field, n, 3, s), seed=parts["seed_used"], exact=exact)
    witness = {"parts": parts, "jacobian": jac.to_json()}
    threshold = n * n + n - 2
    return Certificate("GammaDim", n, 3, field, witness, quantity, threshold, _verdict(quantity, threshold), seed, None)


def _recompute_gamma(cert: Certificate) -> int:
    parts = cert.witness["parts"]
    s = parts["s"]
    n = 4 * s
    if cert.n != n or cert.r != 3:
        raise CertificateError("GammaDim certificate needs n = 4s and r = 3")
    fld = cert.field
    x = GammaCoords.from_json(fld, parts["X"])
    zv = centralizer_dim(gamma_v(s, fld))
    partner = gamma_partner_space(x)[1]
    recomputed = {"orbit_term": n * n - zv, "centralizer_v": zv, "gamma_dim": 4 * s * s, "partner_dim": partner}
    for key, val in recomputed.items():
        if parts.get(key) != val:
            return -1
    jac = cert.witness.get("jacobian")
    if jac is not None and recompute_rank(jac) != jac["rank"]:
        return -1
    return recomputed["orbit_term"] + recomputed["gamma_dim"] + partner


_RECOMPUTE = {
    "AlgebraDim": _recompute_algebra,
    "ComponentDim": _recompute_component,
    "GammaDim": _recompute_gamma,
}


def _threshold(kind: str, n: int, r: int) -> int:
    if kind == "AlgebraDim":
        return n - 1
    if kind == "ComponentDim":
        return formula_dims(n, r).dim_N_component
    return n * n + n - 2


# ---------------------------------------------------------------------------
# dispatcher and verification
# ---------------------------------------------------------------------------

def certify(
    n: int, r: int, field: FieldSpec, seed: int = 0, budget: int = DEFAULT_BUDGET, exact: bool = False
) -> Certificate:
    """ComponentDim, then AlgebraDim, then (r = 3, 4 | n) GammaDim; first REDUCIBLE wins."""
    if n < 2 or r < 2:
        raise ValueError("n and r must be >= 2")
    attempts = [certify_component_dim(n, r, field, seed, budget, exact)]
    if attempts[-1].verdict != REDUCIBLE:
        attempts.append(certify_algebra(n, r, field, seed, budget))
    if attempts[-1].verdict != REDUCIBLE and r == 3 and n % 4 == 0:
        attempts.append(certify_gamma(n // 4, field, seed, exact))
    last = attempts[-1]
    if last.verdict == REDUCIBLE:
        return last
    head = attempts[0]
    return Certificate(
        head.kind, n, r, field, head.witness, head.quantity, head.threshold, NOT_FOUND,
        seed, budget, attempts=attempts,
    )


def verify_certificate(cert: Certificate | dict) -> tuple[bool, str]:
    """Recompute the quantity from the stored witness and check the claimed verdict.

    Raises :class:`CertificateError` when the data cannot be interpreted.
    """
    if isinstance(cert, dict):
        cert = Certificate.from_json(cert)
    try:
        recomputed = _RECOMPUTE[cert.kind](cert)
    except CertificateError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateError(f"cannot rebuild witness: {exc}") from exc
    if recomputed < 0:
        return False, "witness does not satisfy its defining conditions"
    if recomputed != cert.quantity:
        return False, f"recomputed quantity {recomputed} != stored {cert.quantity}"
    threshold = _threshold(cert.kind, cert.n, cert.r)
    if threshold != cert.threshold:
        return False, f"threshold {cert.threshold} != formula value {threshold}"
    expected = _verdict(recomputed, threshold)
    if cert.attempts:
        for sub in cert.attempts:
            ok, msg = verify_certificate(sub)
            if not ok:
                return False, f"attempt {sub.kind}: {msg}"
            if sub.verdict == REDUCIBLE:
                return False, f"attempt {sub.kind} is REDUCIBLE but the summary verdict is {cert.verdict}"
        expected = NOT_FOUND
    if cert.verdict != expected:
        return False, f"verdict {cert.verdict} inconsistent with {recomputed} vs {threshold}"
    return True, f"{cert.kind}: {recomputed} {'>' if recomputed > threshold else '<='} {threshold}"
