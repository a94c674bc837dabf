import random
from fractions import Fraction

import pytest

from conftest import matmul
from yperiod import gamma, zsystem
from yperiod.errors import (
    DegenerateSolve,
    InconsistentSquare,
    NotRegular,
    SeedExhausted,
    ShapeUnsupported,
)
from yperiod.gamma import AP, XP, A, GammaState, SquareLayout, X
from yperiod.lattice import gamma_ranges


def south_pair(xs, as_):
    known = {(X, j): v for j, v in enumerate(xs, 1)}
    known.update({(A, j): v for j, v in enumerate(as_, 1)})
    return known


def test_south_pair_solve():
    sol = gamma.square_relations(SquareLayout.interior(2), south_pair([1, 1], [2, 6, 5]))
    assert [sol.values[(AP, j)] for j in (1, 2, 3)] == [3, 5, 4]
    assert [sol.values[(XP, j)] for j in (1, 2)] == [2, 1]
    assert sol.free == []


def test_south_pair_degenerate():
    with pytest.raises(DegenerateSolve):
        gamma.square_relations(SquareLayout.interior(2), south_pair([1, -4], [2, 6, 5]))


def test_row_k_square_from_the_worked_relations():
    # x1 + a1 = a1', x2 + a2 = x1', x1 a2 = a1' x1'
    present = frozenset({(X, 1), (X, 2), (A, 1), (A, 2), (A, 3), (AP, 1), (XP, 1)})
    layout = SquareLayout(2, present, frozenset({1, 2}), frozenset({1}))
    sol = gamma.square_relations(layout, {(X, 1): 1, (A, 1): 2, (A, 2): 6, (A, 3): 5})
    assert sol.values == {(AP, 1): 3, (XP, 1): 2, (X, 2): -4}


def test_inconsistent_known_data():
    known = south_pair([1, 1], [2, 6, 5])
    known.update({(AP, 1): 99})
    with pytest.raises(InconsistentSquare):
        gamma.square_relations(SquareLayout.interior(2), known)


def test_free_variable_needs_rng():
    # one unconstrained variable per column: a_{k+1} on the square at row k
    layout = SquareLayout.truncated(gamma_ranges((2, 1)), 1)
    known = {v: Fraction(2) for v in layout.present if v[0] in (X, AP)}
    with pytest.raises(DegenerateSolve):
        gamma.square_relations(layout, known)
    sol = gamma.square_relations(layout, known, random.Random(0))
    assert sol.free == [(A, 2)]
    assert gamma.square_relations(layout, known, sample_free=False).free == []


def test_build_matrices():
    st = GammaState((3, 2))
    st.x.update({(1, 0, 2): Fraction(1), (2, 0, 2): Fraction(1)})
    st.a.update({(1, 0, 2): Fraction(2), (2, 0, 2): Fraction(6), (3, 0, 2): Fraction(5)})
    assert gamma.build_x(st, 0, 2) == [[1, 1, 0], [0, 1, 1], [0, 0, 1]]
    assert gamma.build_a(st, 0, 2) == [[2, 0, 0], [1, 6, 0], [0, 1, 5]]
    for i in (1, 5):
        with pytest.raises(NotRegular):
            gamma.build_x(st, 0, i)


def test_generate_one_by_one_is_flat():
    st = gamma.generate((1, 1), rng=random.Random(0))
    rep = gamma.check_flatness(st)
    assert rep.checked > 0 and rep.ok


def test_generate_is_reproducible():
    a = gamma.generate((2, 1), rng=random.Random(123)).to_json()
    b = gamma.generate((2, 1), rng=random.Random(123)).to_json()
    assert a == b


def test_generate_rejects_r_below_k():
    with pytest.raises(ShapeUnsupported):
        gamma.generate((1, 2), rng=random.Random(0))


def test_generate_exhausts_on_forced_degeneracy(monkeypatch):
    def always_degenerate(*args, **kw):
        raise DegenerateSolve("forced")

    monkeypatch.setattr(gamma, "_generate_once", always_degenerate)
    with pytest.raises(SeedExhausted):
        gamma.generate((2, 1), rng=random.Random(0), max_retries=3)


@pytest.mark.parametrize("shape", [(2, 1), (2, 2), (3, 2), (4, 3)])
def test_generated_states_encode_the_z_system(shape):
    st = gamma.generate(shape, rng=random.Random(7))
    st.validate()
    assert gamma.check_flatness(st).ok
    z = gamma.z_from_gamma(st)
    assert z.provenance == gamma.FROM_GAMMA
    rel = zsystem.z_relation_check(z)
    assert rel.checked > 0 and rel.ok
    sig = zsystem.z_sigma_hat_check(z)
    assert sig.checked > 0 and sig.ok


def test_z_is_one_when_x_equals_a_prime():
    st = GammaState((2, 1), x={(1, 2, 2): Fraction(5)}, a={(1, 1, 1): Fraction(5)})
    assert gamma.z_from_gamma(st).values[(2, 2, 1)] == 1


def test_flat_square_by_hand_oracle():
    X_ = [[1, 1, 0], [0, 1, 1], [0, 0, 1]]
    A_ = [[2, 0, 0], [1, 6, 0], [0, 1, 5]]
    Ap = [[3, 0, 0], [1, 5, 0], [0, 1, 4]]
    Xp = [[1, 2, 0], [0, 1, 1], [0, 0, 1]]
    assert matmul(X_, A_) == matmul(Ap, Xp) == [[3, 6, 0], [1, 7, 5], [0, 1, 5]]


def test_corrupted_a_value_is_flagged():
    st = gamma.generate((3, 2), rng=random.Random(4))
    rng = random.Random(5)
    for _ in range(10):
        bad = st.copy()
        key = rng.choice(sorted(bad.a))
        bad.a[key] *= 2
        rep = gamma.check_flatness(bad)
        assert not rep.ok
        j, n, i = key
        # only the two squares sharing the edge can notice
        assert {tuple(v.where[:2]) for v in rep.violations} <= {(n, i), (n + 1, i + 1)}


def test_json_round_trip():
    st = gamma.generate((3, 2), rng=random.Random(9))
    back = GammaState.from_json(st.to_json())
    assert back.x == st.x and back.a == st.a
    assert back.free_choices == st.free_choices
    assert back.to_json() == st.to_json()


def test_untruncated_window():
    win = gamma.generate_untruncated(3, half_width=6, n_cols=4, rng=random.Random(1))
    rep = gamma.check_untruncated_z(win)
    assert rep.checked > 0 and rep.ok
    rep = gamma.check_xpera_identity(win)
    assert rep.checked > 0 and rep.ok
