import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from commvar import _kernels as K

primes = st.sampled_from([2, 3, 7, 101, 1000003, 2147483647])

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


def _mat(p, shape):
    return arrays(np.int64, shape, elements=st.integers(0, p - 1))


@given(primes.flatmap(lambda p: st.tuples(st.just(p), st.integers(1, 7), st.integers(1, 7)).flatmap(
    lambda t: st.tuples(st.just(t[0]), _mat(t[0], (t[1], t[2]))))))
def test_rref_parity(pa):
    p, a = pa
    r1, piv1 = K.rref_modp_numpy(a, p)
    r2, piv2 = K.rref_modp_numba(a, p)
    assert np.array_equal(r1, r2) and np.array_equal(piv1, piv2)


@given(primes.flatmap(lambda p: st.tuples(st.just(p), st.integers(1, 6)).flatmap(
    lambda t: st.tuples(st.just(t[0]), _mat(t[0], (t[1], t[1])), _mat(t[0], (t[1], t[1]))))))
def test_matmul_parity(pab):
    p, a, b = pab
    ref = (a.astype(object).dot(b.astype(object)) % p).astype(np.int64)
    assert np.array_equal(K.matmul_modp_numpy(a, b, p), ref)
    assert np.array_equal(K.matmul_modp_numba(a, b, p), ref)


@pytest.mark.parametrize("n,q", [(2, 2), (2, 3), (3, 2)])
def test_commute_table_parity(n, q):
    from commvar.census import nilpotent_stack

    stack = nilpotent_stack(n, q)
    t1 = K.commute_table_numpy(stack, q)
    t2 = K.commute_table_numba(stack, q)
    assert np.array_equal(t1, t2)
    assert np.array_equal(t1, t1.T) and t1.diagonal().all()


def test_rref_idempotent():
    a = np.array([[2, 4, 1], [1, 2, 0], [0, 0, 3]], dtype=np.int64)
    r, piv = K.rref_modp(a, 7)
    r2, piv2 = K.rref_modp(r, 7)
    assert np.array_equal(r, r2) and list(piv) == list(piv2) == [0, 2]


def test_backend_reports():
    assert K.backend() in ("numba", "numpy")
    assert K.MAX_MODULUS == 2**31


def test_matmul_long_inner_dimension():
    # more than 2**15 terms forces the intermediate reduction in the jit kernel
    p = 2147483647
    k = 40000
    a = np.full((2, k), p - 1, dtype=np.int64)
    b = np.full((k, 3), p - 2, dtype=np.int64)
    expected = (k * (p - 1) * (p - 2)) % p
    assert (K.matmul_modp_numba(a, b, p) == expected).all()
    assert (K.matmul_modp_numpy(a, b, p) == expected).all()
