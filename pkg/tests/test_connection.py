import random
from functools import lru_cache

import pytest

from conftest import matmul
from yperiod import connection as C
from yperiod import gamma
from yperiod.errors import NotApplicable, NotRegular
from yperiod.lattice import PlanePoint
from yperiod.matrix import SquareMatrix


@lru_cache(maxsize=None)
def conn(shape, seed=0):
    return C.Connection(gamma.generate(shape, rng=random.Random(seed)))


def test_edge_between():
    e = C.edge_between((0, 1), (1, 2))
    assert (e.kind, e.position) == ("x", (1, 1))
    assert (e.tail, e.head) == ((0, 1), (1, 2))
    e = C.edge_between((0, 3), (1, 2))
    assert (e.kind, e.position) == ("a", (0, 2))
    assert (e.tail, e.head) == ((0, 3), (1, 2))
    with pytest.raises(ValueError):
        C.edge_between((0, 2), (1, 3))


def test_single_edge_transport():
    c = conn((3, 2))
    assert c.transport([(1, 2), (2, 3)]) == c.X(2, 2)
    assert c.transport([(1, 2)]) == SquareMatrix.identity(3)


def test_two_paths_round_a_square():
    c = conn((3, 2))
    for n, i in C.eligible_squares(c)[:6]:
        west, east = (n - 1, i), (n + 1, i)
        lower = c.transport([west, (n, i + 1), east])
        upper = c.transport([west, (n, i - 1), east])
        assert lower == upper


def test_random_paths_agree():
    c = conn((3, 2))
    rng = random.Random(3)
    p = c.eligible_vertices()[0]
    q = c.image(p)
    ref = c.delta(p)
    for _ in range(5):
        assert c.transport(c.random_path(rng, p, q)) == ref


def test_anti_lower_triangular_predicate():
    assert C.anti_lower_triangular(SquareMatrix([[0, 5], [1, 3]]))
    assert not C.anti_lower_triangular(SquareMatrix([[2, 5], [1, 3]]))


@pytest.mark.parametrize("r", [1, 2, 3])
def test_k1_staircase_top_left_vanishes(r):
    c = conn((r, 1))
    starts = c.staircase_starts("north")
    assert starts
    for n0 in starts:
        assert c.staircase_product(n0, "north")[0, 0] == 0


def test_staircases_3_2():
    rep = C.check_staircases(conn((3, 2)))
    assert rep.total("staircase-north").checked > 0
    assert rep.total("staircase-south").checked > 0
    assert rep.ok


def test_staircase_parity_is_checked():
    c = conn((3, 2))
    with pytest.raises(ValueError):
        c.staircase_product(1, "north")


def test_delta_is_anti_diagonal_3_2():
    c = conn((3, 2))
    vs = c.eligible_vertices()
    assert vs
    assert all(C.anti_diagonal(c.delta(p)) for p in vs)
    assert C.anti_diagonal(SquareMatrix.longest_weyl(3))


def test_delta_factorization_shape():
    c = conn((3, 2))
    for p in c.eligible_vertices():
        prefix, stair, suffix, _ = c.northern_factorization(p)
        assert len(prefix) == p.i - 2 and len(suffix) == 3 + 2 - p.i
        assert {e.kind for e in prefix} <= {"a"} and {e.kind for e in suffix} <= {"x"}
        assert C.anti_lower_triangular(stair)


def test_delta_rejects_irregular_vertex():
    c = conn((3, 2))
    with pytest.raises(NotRegular):
        c.delta((0, 1))


def test_six_chain_on_3_2():
    c = conn((3, 2))
    squares = C.eligible_squares(c)
    assert squares
    rep = None
    for sq in squares:
        rep = C.check_transport_commutation(c, sq, rep=rep)
        C.check_diagonal_identity(c, sq, rep=rep)
        C.check_ratio_to_z(c, sq, rep=rep)
    for name in ("transport", "diagonal", "weyl-conjugation", "ratio", "ratio-z", "induced-z-sigma"):
        assert rep.total(name).checked > 0, name
    assert rep.ok


def test_corrupted_image_edge_is_flagged():
    st = gamma.generate((3, 2), rng=random.Random(0))
    c = C.Connection(st)
    n, i = C.eligible_squares(c)[0]
    P = st.shape.period
    key = (1, n + P, P - i)  # a_1 of the image square, i.e. B
    st2 = st.copy()
    st2.a[key] *= 3
    bad = C.Connection(st2)
    rep = C.check_transport_commutation(bad, (n, i))
    assert not rep.ok


def test_k2_factorization_hand_instance():
    v = {"x1": 1, "x2": -4, "a1": 2, "a2": 6, "a3": 5, "a1p": 3, "x1p": 2}
    rep = C.check_sigma_factorization_k2(v)
    assert rep.checked == 2 and rep.ok
    X_ = [[1, 1, 0], [0, 1, -4], [0, 0, 1]]
    A_ = [[2, 0, 0], [1, 6, 0], [0, 1, 5]]
    assert matmul(X_, A_) == [[3, 6, 0], [1, 2, -20], [0, 1, 5]]


def test_k2_factorization_on_generated_states():
    st = gamma.generate((3, 2), rng=random.Random(2))
    squares = C.sigma_factorization_squares(st)
    assert squares
    for sq in squares:
        assert C.check_sigma_factorization_k2(st, sq).ok


def test_k2_factorization_not_applicable_for_k3():
    st = gamma.generate((3, 3), rng=random.Random(2))
    with pytest.raises(NotApplicable):
        C.check_sigma_factorization_k2(st, (0, 2))
    with pytest.raises(NotApplicable):
        C.check_sigma_factorization_k2({"k": 3})


def test_image_of_vertex():
    c = conn((3, 2))
    assert c.image(PlanePoint(1, 2)) == (8, 5)
