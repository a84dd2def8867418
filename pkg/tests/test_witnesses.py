import pytest
from hypothesis import given, strategies as st

from commvar.exactfield import QQ, FieldSpec, Mat, ShapeError
from commvar.nilcore import (
    MatTuple,
    algebra_closure,
    centralizer_dim,
    commutator,
    is_commuting_tuple,
    is_nilpotent,
)
from commvar.witnesses import (
    GammaCoords,
    ParabolicShape,
    SeedExhausted,
    SplitMix64,
    block,
    gamma_commutator_block,
    gamma_element,
    gamma_partner_space,
    gamma_v,
    generic_gamma_point,
    in_nilradical,
    nilradical_element,
    parabolic_nilradical,
    random_gamma_coords,
    sample_regular_tuple,
    tuple_from_witness,
    witness_json,
)

from conftest import SMALL_P

seeds = st.integers(0, 2**64 - 1)


class TestSplitMix:
    def test_reference_stream(self):
        # published reference outputs for seed 0
        rng = SplitMix64(0)
        assert [rng.next_u64() for _ in range(3)] == [
            0xE220A8397B1DCDAF,
            0x6E789E6AA1B965F4,
            0x06C45D188009454F,
        ]

    @given(seeds, st.integers(1, 10**12))
    def test_below_in_range(self, seed, bound):
        assert 0 <= SplitMix64(seed).below(bound) < bound

    def test_rational_range(self):
        rng = SplitMix64(3)
        vals = {rng.scalar(QQ) for _ in range(2000)}
        assert vals == set(range(-9, 10))

    def test_deterministic(self):
        assert SplitMix64(42).matrix(SMALL_P, 3) == SplitMix64(42).matrix(SMALL_P, 3)


class TestNilradical:
    @pytest.mark.parametrize("n", range(2, 21))
    def test_dimension_and_products(self, n):
        shape, basis = parabolic_nilradical(n, SMALL_P)
        assert shape.dim_u == len(basis) == (n * n) // 4
        assert shape.top + shape.bottom == n and shape.top - shape.bottom in (0, 1)
        if n <= 10:
            for x in basis:
                for y in basis:
                    assert (x @ y).is_zero()
        assert (shape.dim_u > n - 1) == (n >= 4)

    @given(st.integers(2, 8), seeds)
    def test_random_elements_commute(self, n, seed):
        shape = ParabolicShape(n)
        rng = SplitMix64(seed)
        x, y = (nilradical_element(shape, SMALL_P, [rng.scalar(SMALL_P) for _ in range(shape.dim_u)]) for _ in range(2))
        assert in_nilradical(x, shape)
        assert (x @ y).is_zero()
        assert commutator(x, y).is_zero()

    def test_outside(self):
        assert not in_nilradical(Mat.identity(QQ, 4), ParabolicShape(4))

    def test_too_small(self):
        with pytest.raises(ValueError):
            parabolic_nilradical(1, QQ)


class TestGamma:
    @pytest.mark.parametrize("s,expected", [(1, 6), (2, 24)])
    def test_centralizer_of_v(self, field, s, expected):
        assert centralizer_dim(gamma_v(s, field)) == expected

    def test_v_shape(self, field):
        v = gamma_v(2, field)
        assert not (v @ v).is_zero()
        assert (v @ v @ v).is_zero()
        assert block(v @ v, 2, 0, 3) == Mat.identity(field, 2)

    @given(st.integers(1, 3), seeds)
    def test_gamma_inside_centralizer(self, s, seed):
        x = gamma_element(random_gamma_coords(SplitMix64(seed), SMALL_P, s))
        assert commutator(x, gamma_v(s, SMALL_P)).is_zero()
        assert is_nilpotent(x)

    @given(st.integers(1, 3), seeds, seeds)
    def test_commutator_block_formula(self, s, a, b):
        x = random_gamma_coords(SplitMix64(a), SMALL_P, s)
        y = random_gamma_coords(SplitMix64(b), SMALL_P, s)
        c = commutator(gamma_element(x), gamma_element(y))
        for bi in range(4):
            for bj in range(4):
                blk = block(c, s, bi, bj)
                if (bi, bj) == (0, 3):
                    assert blk == gamma_commutator_block(x, y)
                else:
                    assert blk.is_zero()

    @given(st.integers(1, 2), seeds)
    def test_partner_space(self, s, seed):
        x = random_gamma_coords(SplitMix64(seed), SMALL_P, s)
        basis, dim = gamma_partner_space(x)
        assert dim >= 3 * s * s
        for y in basis[:4]:
            assert gamma_commutator_block(x, y).is_zero()

    def test_generic_point(self):
        x, used, dim = generic_gamma_point(2, SMALL_P, 5)
        assert dim == 12 and used >= 5
        assert generic_gamma_point(2, SMALL_P, 5)[0] == x

    def test_generic_point_exhausts(self):
        with pytest.raises(SeedExhausted):
            generic_gamma_point(1, FieldSpec.prime(3), 0, max_tries=0)

    def test_coords_round_trip(self, field):
        x = random_gamma_coords(SplitMix64(9), field, 2)
        assert GammaCoords.from_json(field, x.to_json()) == x
        assert GammaCoords.from_vector(field, 2, x.vector()) == x
        with pytest.raises(ShapeError):
            GammaCoords.from_vector(field, 2, x.vector()[:-1])


class TestRegularSampler:
    @given(st.integers(1, 6), st.integers(1, 5), seeds)
    def test_samples_lie_on_component(self, n, r, seed):
        t = sample_regular_tuple(n, r, SMALL_P, seed)
        assert (t.n, t.r) == (n, r)
        assert is_commuting_tuple(t)
        assert all(is_nilpotent(x) for x in t)
        assert algebra_closure(t).dim <= max(n - 1, 0)

    def test_rational_sampler(self):
        t = sample_regular_tuple(4, 3, QQ, 11)
        assert is_commuting_tuple(t)
        assert algebra_closure(t).dim == 3

    def test_deterministic(self):
        assert sample_regular_tuple(4, 3, SMALL_P, 1) == sample_regular_tuple(4, 3, SMALL_P, 1)
        assert sample_regular_tuple(4, 3, SMALL_P, 1) != sample_regular_tuple(4, 3, SMALL_P, 2)

    def test_small_characteristic_rejected(self):
        with pytest.raises(ValueError):
            sample_regular_tuple(5, 2, FieldSpec.prime(5), 0)

    def test_witness_round_trip(self):
        t = sample_regular_tuple(3, 2, SMALL_P, 4)
        obj = witness_json("regular-component", {"seed": 4}, t)
        assert tuple_from_witness(obj) == t
        assert isinstance(tuple_from_witness(obj), MatTuple)
