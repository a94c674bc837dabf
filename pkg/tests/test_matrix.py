from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import matmul
from yperiod.matrix import SquareMatrix, product

small = st.fractions(min_value=-20, max_value=20, max_denominator=9)


def square(m):
    return st.lists(st.lists(small, min_size=m, max_size=m), min_size=m, max_size=m)


def test_x_and_a_forms():
    assert SquareMatrix.x_form([1, 1]) == [[1, 1, 0], [0, 1, 1], [0, 0, 1]]
    assert SquareMatrix.a_form([2, 6, 5]) == [[2, 0, 0], [1, 6, 0], [0, 1, 5]]


def test_flat_square_by_hand():
    X = SquareMatrix.x_form([1, 1])
    A = SquareMatrix.a_form([2, 6, 5])
    Ap = SquareMatrix.a_form([3, 5, 4])
    Xp = SquareMatrix.x_form([2, 1])
    expected = [[3, 6, 0], [1, 7, 5], [0, 1, 5]]
    assert X @ A == expected
    assert Ap @ Xp == expected


def test_shape_predicates():
    assert SquareMatrix([[0, 3], [1, 4]]).is_anti_lower_triangular()
    assert not SquareMatrix([[2, 3], [1, 4]]).is_anti_lower_triangular()
    assert SquareMatrix([[2, 3], [1, 0]]).is_anti_upper_triangular()
    w = SquareMatrix.longest_weyl(4)
    assert w.is_anti_diagonal()
    assert not SquareMatrix.identity(2).is_anti_diagonal()
    assert SquareMatrix.identity(1).is_anti_diagonal()


def test_weyl_reverses_a_diagonal():
    d = SquareMatrix.diagonal([1, 2, 3, 4])
    w = SquareMatrix.longest_weyl(4)
    assert w @ d @ w == SquareMatrix.diagonal([4, 3, 2, 1])


def test_part_extractors():
    m = SquareMatrix([[0, 0, 5], [0, 7, 0], [2, 0, 0]])
    assert m.anti_diag_part() == m
    assert m.diag_part() == SquareMatrix.diagonal([0, 7, 0])
    m2 = SquareMatrix([[0, 0, 5], [0, 0, 0], [2, 0, 0]])
    assert m2.diag_part() == SquareMatrix.zeros(3)


def test_vanishing_bound():
    assert SquareMatrix.identity(3).vanishing_bound() == 2
    assert SquareMatrix([[0, 0, 1], [0, 1, 0], [1, 0, 0]]).vanishing_bound() == 4
    assert SquareMatrix.zeros(2).vanishing_bound() == 5


def test_direct_sum_and_inverse():
    m = SquareMatrix([[1, 2], [3, 4]]).direct_sum_identity(1)
    assert m == [[1, 2, 0], [3, 4, 0], [0, 0, 1]]
    d = SquareMatrix.diagonal([2, Fraction(1, 3)])
    assert d @ d.diagonal_inverse() == SquareMatrix.identity(2)
    with pytest.raises(ValueError):
        m.diagonal_inverse()


def test_json_round_trip():
    m = SquareMatrix([[Fraction(1, 3), -2], [0, Fraction(10**30, 7)]])
    assert SquareMatrix.from_json(m.to_json()) == m


def test_rejects_ragged():
    with pytest.raises(ValueError):
        SquareMatrix([[1, 2], [3]])


@given(square(3), square(3))
def test_product_matches_oracle(a, b):
    assert (SquareMatrix(a) @ SquareMatrix(b)).tolist() == matmul(a, b)


@given(square(3), square(3), square(3))
def test_product_associative(a, b, c):
    A, B, C = SquareMatrix(a), SquareMatrix(b), SquareMatrix(c)
    assert (A @ B) @ C == A @ (B @ C)
    assert product([A, B, C], 3) == A @ B @ C


@given(st.lists(small.filter(lambda v: v != 0), min_size=1, max_size=5))
def test_weyl_conjugation_reverses(entries):
    m = len(entries)
    w = SquareMatrix.longest_weyl(m)
    assert w @ SquareMatrix.diagonal(entries) @ w == SquareMatrix.diagonal(entries[::-1])
