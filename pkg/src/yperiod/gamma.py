"""Edge variables of the flat-connection picture and their square relations.

A square is named by its centre ``(n, i)`` with ``n + i`` even.  Its four
edges, all directed eastward, are

* ``X = x(n, i)``          from ``(n-1, i)`` to ``(n, i+1)``  (south-west side)
* ``A = a(n, i)``          from ``(n, i+1)`` to ``(n+1, i)``  (south-east side)
* ``A' = a(n-1, i-1)``     from ``(n-1, i)`` to ``(n, i-1)``  (north-west side)
* ``X' = x(n+1, i-1)``     from ``(n, i-1)`` to ``(n+1, i)``  (north-east side)

and flatness ``XA = A'X'`` reads, entrywise,

    x_j + a_j = a'_j + x'_{j-1}          (additive, j = 1..k+1)
    x_j a_{j+1} = a'_j x'_j              (multiplicative, j = 1..k)

In the truncated system a variable outside its validity range is absent and
counts as zero, and each relation lives only on the rows listed by
:class:`~yperiod.lattice.GammaRanges`.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from . import scalar
from .errors import (
    DegenerateSolve,
    DegenerateValue,
    InconsistentSquare,
    InsufficientWindow,
    NotRegular,
    SeedExhausted,
)
from .lattice import (
    GammaRanges,
    Site,
    SystemShape,
    as_shape,
    gamma_ranges,
    in_hat_truncated,
    regular_region,
)
from .matrix import SquareMatrix
from .report import Report
from .zsystem import FROM_GAMMA, ZState

MAX_RETRIES = 32

# variable families of one square
X, A, AP, XP = "x", "a", "a'", "x'"


def default_n_cols(shape: SystemShape) -> int:
    return 2 * shape.period + 2


@dataclass(frozen=True)
class SquareLayout:
    """Which variables of one square exist and which relations are imposed."""

    k: int
    present: frozenset  # of (family, j)
    additive: frozenset
    multiplicative: frozenset

    @classmethod
    def interior(cls, k: int) -> "SquareLayout":
        present = {(X, j) for j in range(1, k + 1)} | {(XP, j) for j in range(1, k + 1)}
        present |= {(A, j) for j in range(1, k + 2)} | {(AP, j) for j in range(1, k + 2)}
        return cls(k, frozenset(present), frozenset(range(1, k + 2)), frozenset(range(1, k + 1)))

    @classmethod
    def truncated(cls, ranges: GammaRanges, i: int) -> "SquareLayout":
        k = ranges.shape.k
        present = set()
        for j in range(1, k + 2):
            if ranges.x_valid(j, i):
                present.add((X, j))
            if ranges.a_valid(j, i):
                present.add((A, j))
            if ranges.a_valid(j, i - 1):
                present.add((AP, j))
            if ranges.x_valid(j, i - 1):
                present.add((XP, j))
        add = frozenset(j for j in range(1, k + 2) if i in ranges.additive_rows(j))
        mul = frozenset(j for j in range(1, k + 1) if i in ranges.multiplicative_rows(j))
        return cls(k, frozenset(present), add, mul)

    def equations(self) -> list[tuple[str, int, list[tuple[int, tuple]]]]:
        """Relations as signed monomials: ``(name, j, [(sign, (var, ...)), ...])``.

        Ordered by increasing ``j`` with the additive relation first, the
        order in which a stepwise solve meets them.
        """
        out = []
        for j in range(1, self.k + 2):
            if j in self.additive:
                terms = [(1, ((X, j),)), (1, ((A, j),)), (-1, ((AP, j),)), (-1, ((XP, j - 1),))]
                out.append(("add", j, [t for t in terms if all(v in self.present for v in t[1])]))
            if j in self.multiplicative:
                terms = [(1, ((X, j), (A, j + 1))), (-1, ((AP, j), (XP, j)))]
                out.append(("mul", j, [t for t in terms if all(v in self.present for v in t[1])]))
        return out


@dataclass
class SquareSolution:
    values: dict
    free: list = field(default_factory=list)


def _residual(terms, vals) -> Fraction:
    total = Fraction(0)
    for sign, mono in terms:
        prod = Fraction(sign)
        for v in mono:
            prod *= vals[v]
        total += prod
    return total


def square_relations(
    layout: SquareLayout,
    known: Mapping,
    rng: random.Random | None = None,
    bound: int = 10,
    sample_free: bool = True,
) -> SquareSolution:
    """Solve one square for every present variable not in ``known``.

    Relations with a single unknown are solved first, in increasing ``j``;
    whatever remains coupled is linear in the unknowns (each monomial has at
    most one unknown factor once the knowns are in) and is eliminated
    exactly.  Unknowns that appear in no imposed relation are free: they are
    drawn with :func:`~yperiod.scalar.sample_positive` and listed in
    ``free``, or left unset when ``sample_free`` is false.
    """
    vals = {key: Fraction(v) for key, v in known.items()}
    unknown = [v for v in sorted(layout.present, key=_var_order) if v not in vals]
    eqs = layout.equations()
    solved: dict = {}

    def open_vars(terms):
        return {v for _, mono in terms for v in mono if v not in vals}

    pending = list(eqs)
    progress = True
    while progress:
        progress = False
        for eq in list(pending):
            name, j, terms = eq
            todo = open_vars(terms)
            if len(todo) > 1:
                continue
            pending.remove(eq)
            progress = True
            if not todo:
                if _residual(terms, vals) != 0:
                    raise InconsistentSquare(f"{name}_{j} violated by known data")
                continue
            (var,) = todo
            coef, rest = Fraction(0), Fraction(0)
            for sign, mono in terms:
                prod = Fraction(sign)
                hit = False
                for v in mono:
                    if v == var:
                        hit = True
                    else:
                        prod *= vals[v]
                if hit:
                    coef += prod
                else:
                    rest += prod
            if coef == 0:
                raise DegenerateSolve(f"{name}_{j}: zero coefficient for {var[0]}_{var[1]}")
            vals[var] = solved[var] = -rest / coef
            break
    if pending:
        _eliminate(pending, vals, solved)
    free = []
    for var in unknown:
        if var in vals:
            continue
        if any(var in open_vars(terms) for _, _, terms in eqs):
            raise DegenerateSolve(f"{var[0]}_{var[1]} left undetermined")
        if not sample_free:
            continue
        if rng is None:
            raise DegenerateSolve(f"free variable {var[0]}_{var[1]} needs a generator")
        vals[var] = solved[var] = scalar.sample_positive(rng, bound)
        free.append(var)
    for var, v in solved.items():
        if var[0] in (A, AP) and v == 0:
            raise DegenerateSolve(f"{var[0]}_{var[1]} = 0")
    return SquareSolution(solved, free)


def _var_order(v):
    fam, j = v
    return (j, {A: 0, AP: 1, X: 2, XP: 3}[fam])


def _eliminate(pending, vals, solved) -> None:
    unknowns = sorted({v for _, _, t in pending for _, m in t for v in m if v not in vals}, key=_var_order)
    col = {v: c for c, v in enumerate(unknowns)}
    rows = []
    for name, j, terms in pending:
        row = [Fraction(0)] * (len(unknowns) + 1)
        for sign, mono in terms:
            unk = [v for v in mono if v not in vals]
            if len(unk) > 1:
                raise DegenerateSolve(f"{name}_{j} is not linear in the unknowns")
            prod = Fraction(sign)
            for v in mono:
                if v not in unk:
                    prod *= vals[v]
            if unk:
                row[col[unk[0]]] += prod
            else:
                row[-1] -= prod
        rows.append(row)
    if len(rows) != len(unknowns):
        raise DegenerateSolve(f"{len(rows)} coupled relations for {len(unknowns)} unknowns")
    m = len(unknowns)
    for c in range(m):
        piv = next((r for r in range(c, m) if rows[r][c] != 0), None)
        if piv is None:
            raise DegenerateSolve(f"singular coupling at {unknowns[c][0]}_{unknowns[c][1]}")
        rows[c], rows[piv] = rows[piv], rows[c]
        p = rows[c][c]
        rows[c] = [v / p for v in rows[c]]
        for r in range(m):
            if r != c and rows[r][c] != 0:
                f = rows[r][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[c])]
    for c, v in enumerate(unknowns):
        vals[v] = solved[v] = rows[c][-1]


@dataclass
class GammaState:
    shape: SystemShape
    x: dict = field(default_factory=dict)  # (j, n, i) -> Fraction
    a: dict = field(default_factory=dict)
    free_choices: list = field(default_factory=list)  # ((family, j, n, i), value)
    n_cols: int = 0
    retries: int = 0

    def __post_init__(self):
        self.shape = as_shape(self.shape)

    @property
    def ranges(self) -> GammaRanges:
        return gamma_ranges(self.shape)

    def copy(self) -> "GammaState":
        return GammaState(self.shape, dict(self.x), dict(self.a), list(self.free_choices),
                          self.n_cols, self.retries)

    def square_known(self, n: int, i: int) -> dict:
        """Stored values of square ``(n, i)`` keyed by family and ``j``."""
        out = {}
        for j in range(1, self.shape.k + 2):
            for fam, store, key in (
                (X, self.x, (j, n, i)),
                (A, self.a, (j, n, i)),
                (AP, self.a, (j, n - 1, i - 1)),
                (XP, self.x, (j, n + 1, i - 1)),
            ):
                if key in store:
                    out[(fam, j)] = store[key]
        return out

    def validate(self) -> None:
        rg = self.ranges
        for (j, n, i), v in self.x.items():
            if (n + i) % 2 or not rg.x_valid(j, i):
                raise ValueError(f"x_{j}({n},{i}) outside its range")
        for (j, n, i), v in self.a.items():
            if (n + i) % 2 or not rg.a_valid(j, i):
                raise ValueError(f"a_{j}({n},{i}) outside its range")
            if v == 0:
                raise DegenerateValue(f"a_{j}({n},{i}) = 0")

    def to_dict(self) -> dict:
        def dump(store):
            return [{"j": j, "n": n, "i": i, **scalar.to_json(v)} for (j, n, i), v in sorted(store.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0]))]

        return {
            "r": self.shape.r,
            "k": self.shape.k,
            "n_cols": self.n_cols,
            "retries": self.retries,
            "x": dump(self.x),
            "a": dump(self.a),
            "free_choices": [
                {"var": fam, "j": j, "n": n, "i": i, **scalar.to_json(v)}
                for (fam, j, n, i), v in self.free_choices
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: Mapping) -> "GammaState":
        def load(rows):
            return {(int(e["j"]), int(e["n"]), int(e["i"])): scalar.from_json(e) for e in rows}

        st = cls(
            SystemShape(int(data["r"]), int(data["k"])),
            load(data["x"]),
            load(data["a"]),
            [((e["var"], int(e["j"]), int(e["n"]), int(e["i"])), scalar.from_json(e)) for e in data.get("free_choices", [])],
            int(data.get("n_cols", 0)),
            int(data.get("retries", 0)),
        )
        st.validate()
        return st

    @classmethod
    def from_json(cls, text: str) -> "GammaState":
        return cls.from_dict(json.loads(text))


def _store(state: GammaState, n: int, i: int, values: Mapping) -> None:
    for (fam, j), v in values.items():
        if fam == A:
            state.a[(j, n, i)] = v
        elif fam == XP:
            state.x[(j, n + 1, i - 1)] = v
        elif fam == AP:
            state.a[(j, n - 1, i - 1)] = v
        else:
            state.x[(j, n, i)] = v


def _generate_once(shape: SystemShape, n_cols: int, rng: random.Random, bound: int) -> GammaState:
    rg = gamma_ranges(shape)
    st = GammaState(shape, n_cols=n_cols)
    rows = rg.square_rows()
    # west-pair data of column 0: x(0, i) and a(-1, i - 1) on every square of the column
    layouts = {i: SquareLayout.truncated(rg, i) for i in rows}
    for i in rows:
        if i % 2:
            continue
        # only data that enters a relation of its square; the rest never matters
        used = {v for _, _, terms in layouts[i].equations() for _, m in terms for v in m}
        for fam, j in sorted(used, key=_var_order):
            if fam == X:
                st.x[(j, 0, i)] = scalar.sample_positive(rng, bound)
            elif fam == AP:
                st.a[(j, -1, i - 1)] = scalar.sample_positive(rng, bound)
    for c in range(n_cols):
        last = c == n_cols - 1
        for i in rows:
            if (c + i) % 2:
                continue
            known = {
                key: v
                for key, v in st.square_known(c, i).items()
                if key[0] in (X, AP)
            }
            sol = square_relations(layouts[i], known, rng, bound, sample_free=not last)
            _store(st, c, i, sol.values)
            for fam, j in sol.free:
                st.free_choices.append(((fam, j, c, i), sol.values[(fam, j)]))
    return st


def generate(shape, n_cols: int | None = None, rng: random.Random | None = None, bound: int = 10,
             max_retries: int = MAX_RETRIES) -> GammaState:
    """Random truncated system on square columns ``0 .. n_cols - 1``.

    Column 0 is seeded through its west-pair data, then every column is
    solved eastward.  A degenerate square restarts the whole trial with fresh
    draws from the same generator, at most ``max_retries`` times.
    """
    shape = as_shape(shape)
    rg = gamma_ranges(shape)  # raises for r < k
    del rg
    if n_cols is None:
        n_cols = default_n_cols(shape)
    if rng is None:
        rng = random.Random(0)
    for attempt in range(max_retries + 1):
        try:
            st = _generate_once(shape, n_cols, rng, bound)
        except (DegenerateSolve, InconsistentSquare, ZeroDivisionError):
            continue
        st.retries = attempt
        return st
    raise SeedExhausted(f"no generic Gamma-state for {shape} after {max_retries} retries")


def squares(state: GammaState) -> Iterable[tuple[int, int]]:
    for c in range(state.n_cols):
        for i in state.ranges.square_rows():
            if (c + i) % 2 == 0:
                yield c, i


def _square_matrices(state: GammaState, n: int, i: int):
    k = state.shape.k
    try:
        X_ = SquareMatrix.x_form([state.x[(j, n, i)] for j in range(1, k + 1)])
        A_ = SquareMatrix.a_form([state.a[(j, n, i)] for j in range(1, k + 2)])
        Ap = SquareMatrix.a_form([state.a[(j, n - 1, i - 1)] for j in range(1, k + 2)])
        Xp = SquareMatrix.x_form([state.x[(j, n + 1, i - 1)] for j in range(1, k + 1)])
    except KeyError:
        return None
    return X_, A_, Ap, Xp


def check_flatness(state: GammaState, *, check: str = "flatness") -> Report:
    """``XA = A'X'`` on fully regular squares, truncated entrywise relations elsewhere."""
    rep = Report()
    rep.counter(check, state.shape)
    rg = state.ranges
    reg = regular_region(state.shape)
    for n, i in squares(state):
        if i - 1 in reg.edge_rows and i in reg.edge_rows:
            mats = _square_matrices(state, n, i)
            if mats is not None:
                X_, A_, Ap, Xp = mats
                lhs, rhs = X_ @ A_, Ap @ Xp
                rep.record(check, state.shape, lhs == rhs, where=[n, i],
                           expected=rhs.tolist(), actual=lhs.tolist())
                continue
        layout = SquareLayout.truncated(rg, i)
        vals = state.square_known(n, i)
        bad, seen = [], 0
        for name, j, terms in layout.equations():
            if not all(v in vals for _, m in terms for v in m):
                continue
            seen += 1
            if _residual(terms, vals) != 0:
                bad.append(f"{name}_{j}")
        if seen:
            rep.record(check, state.shape, not bad, where=[n, i], expected="all relations", actual=bad)
    return rep


def z_from_gamma(state: GammaState) -> ZState:
    """``z_j(n, i) = x_j(n, i) / a_j(n - 1, i - 1)`` on the truncated shifted lattice."""
    values = {}
    for (j, n, i), xv in state.x.items():
        if not in_hat_truncated(state.shape, n, i, j):
            continue
        ap = state.a.get((j, n - 1, i - 1))
        if ap is None:
            continue
        if ap == 0:
            raise DegenerateValue(f"a_{j}({n - 1},{i - 1}) = 0")
        values[Site(n, i, j)] = xv / ap
    return ZState(state.shape, values, FROM_GAMMA)


# untruncated system on a finite window


@dataclass
class OpenWindow:
    """Edge variables of the untruncated system for ``j <= k`` on a finite patch."""

    k: int
    x: dict
    a: dict


def generate_untruncated(k: int, half_width: int, n_cols: int, rng: random.Random,
                         bound: int = 10, max_retries: int = MAX_RETRIES) -> OpenWindow:
    """Sweep interior squares only; the solvable patch narrows by one row per column."""
    layout = SquareLayout.interior(k)
    for _ in range(max_retries + 1):
        x, a = {}, {}
        for i in range(-half_width, half_width + 1):
            if i % 2:
                continue
            for j in range(1, k + 1):
                x[(j, 0, i)] = scalar.sample_positive(rng, bound)
            for j in range(1, k + 2):
                a[(j, -1, i - 1)] = scalar.sample_positive(rng, bound)
        try:
            for c in range(n_cols):
                for i in range(-half_width - 1, half_width + 2):
                    if (c + i) % 2:
                        continue
                    if (1, c, i) not in x or (1, c - 1, i - 1) not in a:
                        continue
                    known = {(X, j): x[(j, c, i)] for j in range(1, k + 1)}
                    known.update({(AP, j): a[(j, c - 1, i - 1)] for j in range(1, k + 2)})
                    sol = square_relations(layout, known)
                    for (fam, j), v in sol.values.items():
                        if fam == A:
                            a[(j, c, i)] = v
                        else:
                            x[(j, c + 1, i - 1)] = v
        except (DegenerateSolve, ZeroDivisionError):
            continue
        return OpenWindow(k, x, a)
    raise SeedExhausted("no generic untruncated window")


def check_untruncated_z(window: OpenWindow, *, check: str = "untruncated-z") -> Report:
    """``z = x/a'`` satisfies the untruncated z-relation away from the ``j`` edges."""
    rep = Report()
    z = {}
    for (j, n, i), xv in window.x.items():
        ap = window.a.get((j, n - 1, i - 1))
        if ap is not None:
            z[(j, n, i)] = xv / ap
    label = f"(inf,{window.k})"
    rep.counter(check, label)
    for (j, n, i) in sorted(z):
        m = (n + 1, i)
        keys = [(j, n, i), (j, n + 2, i), (j, m[0], i - 1), (j - 1, m[0], i - 1), (j, m[0], i + 1), (j + 1, m[0], i + 1)]
        if not 2 <= j <= window.k - 1 or not all(kk in z for kk in keys):
            continue
        zW, zE, zN, zNm, zS, zSp = (z[kk] for kk in keys)
        lhs = zW * zE
        rhs = (1 - zNm) / (1 - 1 / zN) * (1 - zSp) / (1 - 1 / zS)
        rep.record(check, label, lhs == rhs, where=[j, m[0], i], expected=rhs, actual=lhs)
    return rep


def check_xpera_identity(window: OpenWindow, *, check: str = "xpera") -> Report:
    """``(1 - x'_{j-1}/a_j) / (1 - a'_j/x_j) = -x_j/a_j`` on interior squares."""
    rep = Report()
    label = f"(inf,{window.k})"
    rep.counter(check, label)
    for (j, n, i), xv in sorted(window.x.items()):
        if j < 2:
            continue
        keys_a = (j, n, i), (j, n - 1, i - 1)
        xp = window.x.get((j - 1, n + 1, i - 1))
        if xp is None or not all(kk in window.a for kk in keys_a):
            continue
        a_, ap = (window.a[kk] for kk in keys_a)
        lhs = (1 - xp / a_) / (1 - ap / xv)
        rep.record(check, label, lhs == -xv / a_, where=[j, n, i], expected=-xv / a_, actual=lhs)
    return rep


def build_x(state: GammaState, n: int, i: int) -> SquareMatrix:
    if i not in regular_region(state.shape).edge_rows:
        raise NotRegular(f"x-edge row {i} outside regular rows {list(regular_region(state.shape).edge_rows)}")
    try:
        return SquareMatrix.x_form([state.x[(j, n, i)] for j in range(1, state.shape.k + 1)])
    except KeyError:
        raise InsufficientWindow(f"X({n},{i}) not in the generated window") from None


def build_a(state: GammaState, n: int, i: int) -> SquareMatrix:
    if i not in regular_region(state.shape).edge_rows:
        raise NotRegular(f"a-edge row {i} outside regular rows {list(regular_region(state.shape).edge_rows)}")
    try:
        return SquareMatrix.a_form([state.a[(j, n, i)] for j in range(1, state.shape.k + 2)])
    except KeyError:
        raise InsufficientWindow(f"A({n},{i}) not in the generated window") from None
