from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from limitcoh.errors import DivisionByZero, UnsupportedWeilNumber
from limitcoh.exact import Field, Matrix, QSqrt, rank_kernel, scalar_ops, weil_split

import oracles

PRIMES = st.sampled_from([2, 3, 5, 7])
small = st.integers(-4, 4)


def qs(p):
    return st.builds(lambda a, b, c, d: QSqrt(Fraction(a, c), Fraction(b, d), p),
                     small, small, st.integers(1, 3), st.integers(1, 3))


def mats(F, r, c):
    return st.lists(st.lists(st.tuples(small, small), min_size=c, max_size=c), min_size=r, max_size=r).map(
        lambda rows: F.matrix([[F(a, b) for a, b in row] for row in rows]))


# -- scalars ------------------------------------------------------------------------

def test_scalar_examples():
    F3, F5 = Field(3), Field(5)
    assert scalar_ops(F3(1, 1), F3(1, -1), "mul") == F3(-2)
    assert scalar_ops(F5.sqrt_p, None, "inv") == F5(0, Fraction(1, 5))
    assert scalar_ops(F3(2, 1), F3(-2), "add") == F3(0, 1)
    assert scalar_ops(F3(2, 1), None, "neg") == F3(-2, -1)


def test_inverse_of_zero():
    with pytest.raises(DivisionByZero):
        Field(3).zero.inv()


def test_mixed_primes_refused():
    with pytest.raises(ValueError):
        Field(3).one + Field(5).one


def test_field_requires_prime():
    with pytest.raises(ValueError):
        Field(4)


@given(PRIMES.flatmap(lambda p: st.tuples(qs(p), qs(p), qs(p))))
def test_field_axioms(t):
    x, y, z = t
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x
    if x:
        assert x * x.inv() == 1


@given(PRIMES.flatmap(qs))
def test_norm_is_rational(x):
    n = x * x.conjugate()
    assert n.is_rational()
    assert n == x.a ** 2 - x.p * x.b ** 2


def test_half_power():
    F = Field(3)
    assert F.half_power(2) == 3
    assert F.half_power(1) * F.half_power(1) == 3
    assert F.half_power(-3) * F.half_power(3) == 1


# -- linear algebra -----------------------------------------------------------------

def test_rank_kernel_examples():
    F = Field(3)
    r, K, _ = rank_kernel(F.matrix([[0, 1], [0, 0]]))
    assert r == 1 and K == F.matrix([[1], [0]])
    r, K, _ = rank_kernel(F.identity(3))
    assert r == 3 and K.ncols == 0
    F2 = Field(2)
    s = F2.sqrt_p
    assert F2.matrix([[s, 2], [1, s]]).rank() == 1


@settings(max_examples=60)
@given(st.sampled_from([2, 3, 5]).flatmap(
    lambda p: st.tuples(st.integers(1, 4), st.integers(1, 4)).flatmap(lambda rc: mats(Field(p), *rc))))
def test_rank_nullity_against_sympy(M):
    r, K, I = rank_kernel(M)
    assert r == oracles.rank(M)
    assert r + K.ncols == M.ncols
    assert (M @ K).is_zero()
    assert I.ncols == r


@settings(max_examples=40)
@given(st.sampled_from([2, 3]).flatmap(lambda p: st.integers(1, 4).flatmap(lambda n: mats(Field(p), n, n))))
def test_inverse_and_det(M):
    F = M.field
    d = M.det()
    assert bool(d) == (oracles.rank(M) == M.nrows)
    if d:
        assert M @ M.inverse() == F.identity(M.nrows)


@settings(max_examples=40)
@given(st.sampled_from([2, 3]).flatmap(lambda p: st.integers(1, 5).flatmap(lambda n: mats(Field(p), n, n))))
def test_charpoly_cayley_hamilton(M):
    c = M.charpoly()
    F = M.field
    acc = F.zeros(M.nrows, M.nrows)
    for coeff in reversed(c):  # Horner, highest degree first
        acc = acc @ M + F.identity(M.nrows).scale(coeff)
    assert acc.is_zero()


# -- Weil splitting -----------------------------------------------------------------

def test_weil_split_examples():
    F = Field(3)
    assert weil_split(F.diag([1, 3])).dims() == {0: 1, 2: 1}
    s = weil_split(F.matrix([[0, 3], [1, 0]]))
    assert s.dims() == {1: 2} and s.is_pure
    with pytest.raises(UnsupportedWeilNumber):
        weil_split(F.matrix([[0, -3], [1, 0]]))


def test_weil_split_agrees_with_sympy_eigenspaces():
    import random
    from generators import random_module
    F = Field(5)
    for seed in range(15):
        D, ws = random_module(F, random.Random(seed))
        split = weil_split(D.Phi)
        assert split.multiset() == oracles.weights_multiset(D.Phi) == ws
        B = split.change_of_basis(F)
        assert B.rank() == D.dim


def test_weil_split_refuses_non_weil():
    F = Field(3)
    with pytest.raises(UnsupportedWeilNumber):
        weil_split(F.diag([2]))


def test_matrix_shape_errors():
    F = Field(3)
    with pytest.raises(ValueError):
        F.matrix([[1, 2], [3]])
    with pytest.raises(ValueError):
        F.identity(2) @ F.identity(3)
