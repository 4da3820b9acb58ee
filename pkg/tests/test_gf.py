import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from widthlab.gf import FieldElem, Matrix, field, field_of_order, parse_field, random_invertible

ORDERS = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27]


@pytest.mark.parametrize("q", ORDERS)
def test_field_axioms(q):
    F = field_of_order(q)
    els = np.arange(q)
    add, mul = F.add, F.mul
    assert np.array_equal(add[0], els) and np.array_equal(mul[1], els)
    # associativity and distributivity over all triples
    a, b, c = np.meshgrid(els, els, els, indexing="ij")
    assert np.array_equal(add[add[a, b], c], add[a, add[b, c]])
    assert np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]])
    assert np.array_equal(mul[a, add[b, c]], add[mul[a, b], mul[a, c]])
    assert all(mul[x, F.inv[x]] == 1 for x in range(1, q))
    assert all(add[x, F.neg[x]] == 0 for x in range(q))


@pytest.mark.parametrize("q", ORDERS)
def test_multiplicative_group_cyclic(q):
    F = field_of_order(q)
    assert F.order_of(F.generator) == q - 1
    # x^q = x for all x
    assert all(F.pow(x, q) == x for x in range(q))


@pytest.mark.parametrize("q", [4, 8, 9, 16, 25, 27])
def test_frobenius_is_field_automorphism(q):
    F = field_of_order(q)
    fr = F.frob1
    assert sorted(fr) == list(range(q))
    for a, b in itertools.product(range(q), repeat=2):
        assert fr[F.add[a, b]] == F.add[fr[a], fr[b]]
        assert fr[F.mul[a, b]] == F.mul[fr[a], fr[b]]
    assert np.array_equal(F.frob_table(F.k), np.arange(q))


@pytest.mark.parametrize("p", [2, 3, 5, 7, 11, 13])
def test_prime_field_matches_integers(p):
    F = field(p)
    for a, b in itertools.product(range(p), repeat=2):
        assert F.add[a, b] == (a + b) % p
        assert F.mul[a, b] == (a * b) % p


def test_squares_count():
    for q in [3, 5, 7, 9, 11, 13, 25]:
        F = field_of_order(q)
        assert len(F.squares() - {0}) == (q - 1) // 2
    assert len(field_of_order(8).squares() - {0}) == 7


def test_parse_and_errors():
    assert parse_field("gf:3:2").q == 9
    assert field_of_order(27) is field(3, 3)
    for bad in ["gf:4", "gf:6"]:
        with pytest.raises(ValueError):
            parse_field(bad)
    with pytest.raises(ValueError):
        field_of_order(6)
    with pytest.raises(ValueError):
        field(2, 9)


def test_field_elem_ops():
    F = field(7)
    a = FieldElem(F, 3)
    assert int(a * 5) == 1 and int(a / a) == 1 and int(a ** 6) == 1
    assert int(-a) == 4 and int(2 - a) == 6
    with pytest.raises(ZeroDivisionError):
        a / 0
    with pytest.raises(ValueError):
        a + FieldElem(field(5), 1)


@settings(max_examples=60, deadline=None)
@given(q=st.sampled_from([2, 3, 4, 5, 7, 8, 9]), m=st.integers(1, 4), seed=st.integers(0, 10**6))
def test_matrix_inverse_and_det(q, m, seed):
    F = field_of_order(q)
    rng = np.random.default_rng(seed)
    A = random_invertible(F, m, rng)
    B = random_invertible(F, m, rng)
    I = Matrix.identity(F, m)
    assert A @ A.inverse() == I
    assert (A @ B).det() == F.mul[A.det(), B.det()]
    assert Matrix.from_list(F, A.to_list()) == A


def test_matrix_validation():
    F = field(3)
    with pytest.raises(ValueError):
        Matrix(F, [[0, 3], [1, 1]])
    with pytest.raises(ValueError):
        Matrix(F, [[1, 2, 0]])
    with pytest.raises(ValueError):
        Matrix.from_list(F, [1, 2, 3])
