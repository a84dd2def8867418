import pytest
from hypothesis import given, strategies as st

from commvar.exactfield import QQ, FieldSpec, Mat
from commvar.geomdim import (
    GammaBase,
    InvalidMapSpec,
    MapSpec,
    commuting_tangent_dim,
    gamma_family_dim,
    jacobian,
    nilpotent_commuting_tangent_dim,
    param_rank,
    rank_witness,
    recompute_rank,
    spec_from_json,
)
from commvar.nilcore import MatTuple, conjugate, orbit_dim, regular_nilpotent
from commvar.witnesses import SplitMix64, random_invertible, sample_regular_tuple

from conftest import SMALL_P
from oracles import tangent_oracle

seeds = st.integers(0, 2**32)


class TestTangent:
    @pytest.mark.parametrize("n", range(2, 7))
    def test_regular_with_zero(self, field, n):
        t = MatTuple.of(regular_nilpotent(n, field), Mat.zeros(field, n))
        assert commuting_tangent_dim(t) == n * n + n

    def test_regular_pair_n2(self):
        x = regular_nilpotent(2, QQ)
        assert commuting_tangent_dim(MatTuple.of(x, x)) == 6

    @pytest.mark.parametrize("n,r,seed", [(2, 2, 0), (3, 2, 1), (3, 3, 2), (4, 2, 3)])
    def test_matches_oracle(self, n, r, seed):
        t = sample_regular_tuple(n, r, QQ, seed)
        assert commuting_tangent_dim(t) == tangent_oracle(t)

    @given(seeds, seeds)
    def test_conjugation_invariance(self, a, b):
        t = sample_regular_tuple(3, 2, SMALL_P, a)
        g = random_invertible(SplitMix64(b), SMALL_P, 3)
        assert commuting_tangent_dim(t) == commuting_tangent_dim(conjugate(g, t))

    def test_nilpotent_rows_cut_down(self):
        t = MatTuple.of(regular_nilpotent(3, SMALL_P), Mat.zeros(SMALL_P, 3))
        assert nilpotent_commuting_tangent_dim(t) < commuting_tangent_dim(t)

    def test_nilpotent_rows_need_large_p(self):
        t = MatTuple.of(regular_nilpotent(3, FieldSpec.prime(3)))
        with pytest.raises(ValueError):
            nilpotent_commuting_tangent_dim(t)


class TestParamRank:
    @pytest.mark.parametrize("n,r,expected", [(4, 2, 12), (4, 6, 28), (5, 3, 24), (6, 4, 45), (8, 4, 80)])
    def test_parabolic_family(self, n, r, expected):
        assert param_rank(MapSpec("ParabolicFamily", SMALL_P, n, r), seed=1) == expected

    @pytest.mark.parametrize("n", [3, 4])
    def test_orbit_rank_is_orbit_dim(self, n):
        t = sample_regular_tuple(n, 2, SMALL_P, 5)
        assert param_rank(MapSpec("OrbitOfTuple", SMALL_P, n, 2, base=t)) == orbit_dim(t) == n * n - n

    def test_exact_and_fast_path_agree(self):
        spec = MapSpec("ParabolicFamily", QQ, 4, 3)
        fast = rank_witness(spec, seed=2)
        exact = rank_witness(spec, seed=2, exact=True)
        assert fast.rank == exact.rank == 16
        assert fast.rank_field == FieldSpec.prime() and exact.rank_field == QQ

    @given(st.integers(2, 5), st.integers(1, 4), seeds)
    def test_rank_bounded_by_domain(self, n, r, seed):
        spec = MapSpec("ParabolicFamily", SMALL_P, n, r)
        w = rank_witness(spec, seed=seed)
        assert w.rank <= min(w.jacobian_shape)
        assert w.rank <= (r + 1) * ((n * n) // 4)

    @pytest.mark.parametrize("s", [1, 2])
    def test_gamma_rank_matches_additive_count(self, s):
        total, parts = gamma_family_dim(s, SMALL_P, 3)
        w = rank_witness(MapSpec("GammaFamily", SMALL_P, 4 * s, 3, s), seed=parts["seed_used"])
        assert w.rank == total == [17, 68][s - 1]

    def test_round_trip(self):
        w = rank_witness(MapSpec("GammaFamily", SMALL_P, 4, 3, 1), seed=0)
        obj = w.to_json()
        assert recompute_rank(obj) == obj["rank"]
        assert isinstance(spec_from_json(obj).base, GammaBase)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"kind": "Nope", "n": 4},
            {"kind": "GammaFamily", "n": 5, "r": 3, "s": 1},
            {"kind": "GammaFamily", "n": 4, "r": 2, "s": 1},
            {"kind": "ParabolicFamily", "n": 1},
            {"kind": "OrbitOfTuple", "n": 0},
        ],
    )
    def test_invalid_specs(self, kwargs):
        with pytest.raises(InvalidMapSpec):
            MapSpec(field=SMALL_P, **kwargs)

    def test_base_outside_nilradical(self):
        t = MatTuple.of(Mat.identity(SMALL_P, 4))
        with pytest.raises(InvalidMapSpec):
            jacobian(MapSpec("ParabolicFamily", SMALL_P, 4, 1, base=t))

    def test_needs_base_or_seed(self):
        with pytest.raises(InvalidMapSpec):
            rank_witness(MapSpec("ParabolicFamily", SMALL_P, 4, 1))
