"""The even Y-system: seeding, forward extension and the periodicity checks.

Only the even sublattice (``n + i + j`` even) carries values; relations are
indexed by odd sites.  In the truncated system a factor whose site falls
outside ``[1, r] x [1, k]`` is dropped, which is the same as imposing the
boundary values ``Y = 0`` in the north/south direction and ``1/Y = 0`` in the
plus/minus direction.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping

from . import scalar
from .errors import DegenerateValue, MissingNeighbor, NotApplicable, SeedExhausted
from .lattice import Site, SystemShape, as_shape, direction_shift, in_truncated, sigma
from .report import Report

TRUNCATED = "truncated"
INFINITE = "infinite-window"
MAX_RETRIES = 32

_NUMERATOR_SLOTS = ("N", "S")
_DENOMINATOR_SLOTS = ("plus", "minus")


def default_n_max(shape: SystemShape) -> int:
    """Smallest window showing both the twisted shift and its square."""
    return 2 * shape.period + 2


@dataclass
class YState:
    shape: SystemShape
    values: dict[Site, Fraction] = field(default_factory=dict)
    mode: str = TRUNCATED

    def __post_init__(self):
        self.shape = as_shape(self.shape)

    @property
    def n_range(self) -> tuple[int, int]:
        if not self.values:
            return (0, -1)
        ns = [s.n for s in self.values]
        return (min(ns), max(ns))

    def __getitem__(self, s) -> Fraction:
        return self.values[Site(*s)]

    def __contains__(self, s) -> bool:
        return Site(*s) in self.values

    def __len__(self) -> int:
        return len(self.values)

    def sites(self) -> list[Site]:
        return sorted(self.values)

    def copy(self) -> "YState":
        return YState(self.shape, dict(self.values), self.mode)

    def validate(self) -> None:
        for s, v in self.values.items():
            if (s.n + s.i + s.j) % 2:
                raise ValueError(f"odd-parity site {s} stored")
            if self.mode == TRUNCATED and not in_truncated(self.shape, s):
                raise ValueError(f"site {s} outside the {self.shape} rectangle")
            if v == 0:
                raise DegenerateValue(f"zero value at {s}")

    def to_dict(self) -> dict:
        return {
            "r": self.shape.r,
            "k": self.shape.k,
            "mode": self.mode,
            "values": [
                {"n": s.n, "i": s.i, "j": s.j, **scalar.to_json(v)}
                for s, v in sorted(self.values.items())
            ],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: Mapping) -> "YState":
        values = {
            Site(int(e["n"]), int(e["i"]), int(e["j"])): scalar.from_json(e) for e in data["values"]
        }
        state = cls(SystemShape(int(data["r"]), int(data["k"])), values, data.get("mode", TRUNCATED))
        state.validate()
        return state

    @classmethod
    def from_json(cls, text: str) -> "YState":
        return cls.from_dict(json.loads(text))


def seed_placement(shape: SystemShape) -> list[Site]:
    """One even site per column: ``n = 0`` when ``i + j`` is even, else ``n = 1``."""
    shape = as_shape(shape)
    return [
        Site((i + j) % 2, i, j) for i in range(1, shape.r + 1) for j in range(1, shape.k + 1)
    ]


def seed_random(shape, rng: random.Random, bound: int = 10, signed: bool = False) -> YState:
    """Random seeds; ``signed`` also draws negative values, which can hit singular factors."""
    shape = as_shape(shape)
    values = {}
    for s in seed_placement(shape):
        v = scalar.sample_positive(rng, bound)
        values[s] = -v if signed and rng.random() < 0.5 else v
    return YState(shape, values)


def seed_values(shape, values: Mapping) -> YState:
    """Build a seeded state from explicit values keyed by seed site."""
    shape = as_shape(shape)
    expected = set(seed_placement(shape))
    got = {Site(*s): Fraction(v) for s, v in values.items()}
    if set(got) != expected:
        raise ValueError(f"seed sites must be exactly {sorted(expected)}")
    return YState(shape, got)


def _slot_in_range(state: YState, t: Site) -> bool:
    return state.mode == INFINITE or in_truncated(state.shape, t)


def relation_rhs(state: YState, s: Site) -> Fraction:
    """Right-hand side ``(1+Y^N)(1+Y^S) / ((1+1/Y_+)(1+1/Y_-))`` at odd site ``s``.

    Slots pointing outside the rectangle contribute 1.
    """
    s = Site(*s)
    if (s.n + s.i + s.j) % 2 == 0:
        raise ValueError(f"relations live on odd sites, got {s}")
    out = scalar.ONE
    for d in _NUMERATOR_SLOTS:
        t = direction_shift(s, d)
        if not _slot_in_range(state, t):
            continue
        try:
            out *= 1 + state.values[t]
        except KeyError:
            raise MissingNeighbor(f"{d} neighbour {t} of {s} not stored") from None
    for d in _DENOMINATOR_SLOTS:
        t = direction_shift(s, d)
        if not _slot_in_range(state, t):
            continue
        try:
            y = state.values[t]
        except KeyError:
            raise MissingNeighbor(f"{d} neighbour {t} of {s} not stored") from None
        if y == 0 or y == -1:
            raise DegenerateValue(f"factor 1 + 1/Y vanishes or is undefined at {t}")
        out /= 1 + 1 / y
    return out


def _odd_sites_at(shape: SystemShape, n: int) -> Iterator[Site]:
    for i in range(1, shape.r + 1):
        for j in range(1, shape.k + 1):
            if (n + i + j) % 2:
                yield Site(n, i, j)


def extend(state: YState, n_max: int | None = None) -> YState:
    """Solve forward for ``Y^E = rhs / Y^W`` up to ``n = n_max``.

    Returns a new state; the input must hold the seeds on ``n = 0, 1``.
    """
    if state.mode != TRUNCATED:
        raise NotApplicable("use extend_infinite_window for the untruncated system")
    shape = state.shape
    if n_max is None:
        n_max = default_n_max(shape)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = state.copy()
    vals = out.values
    for s in seed_placement(shape):
        if s not in vals:
            raise MissingNeighbor(f"seed {s} missing")
    for n in range(1, n_max):
        for s in _odd_sites_at(shape, n):
            east = Site(n + 1, s.i, s.j)
            if east in vals:
                continue
            west = vals[Site(n - 1, s.i, s.j)]
            value = relation_rhs(out, s) / west
            if value == 0:
                raise DegenerateValue(f"Y{tuple(east)} = 0")
            vals[east] = value
    return out


def simulate(shape, rng: random.Random, bound: int = 10, n_max: int | None = None,
             signed: bool = False, max_retries: int = MAX_RETRIES) -> YState:
    """Seed and extend.  Positive seeds never degenerate; signed ones are redrawn on failure."""
    for _ in range(max_retries + 1):
        try:
            return extend(seed_random(shape, rng, bound, signed), n_max)
        except (DegenerateValue, ZeroDivisionError):
            if not signed:
                raise
    raise SeedExhausted(f"no generic signed seed for {as_shape(shape)} after {max_retries} retries")


def check_relations(state: YState, *, check: str = "relations") -> Report:
    """Recheck ``Y^W Y^E = rhs`` at every odd site whose neighbours are stored."""
    rep = Report()
    if not state.values:
        rep.counter(check, state.shape)
        return rep
    candidates = set()
    for s in state.values:
        # both odd sites adjacent in n, plus those adjacent in i/j
        for d in ("W", "E", "N", "S", "plus", "minus"):
            t = direction_shift(s, d)
            candidates.add(t)
    for s in sorted(candidates):
        if state.mode == TRUNCATED and not in_truncated(state.shape, s):
            continue
        w, e = Site(s.n - 1, s.i, s.j), Site(s.n + 1, s.i, s.j)
        if w not in state.values or e not in state.values:
            continue
        try:
            rhs = relation_rhs(state, s)
        except MissingNeighbor:
            continue
        except DegenerateValue:
            rep.record(check, state.shape, False, where=list(s), expected="finite rhs", actual="degenerate")
            continue
        lhs = state.values[w] * state.values[e]
        rep.record(check, state.shape, lhs == rhs, where=list(s), expected=rhs, actual=lhs)
    return rep


def check_periodicity(state: YState) -> Report:
    """Compare ``Y(sigma(s))`` with ``Y(s)`` and ``Y(s + 2(r+k+2))`` with ``Y(s)``."""
    if state.mode != TRUNCATED:
        raise NotApplicable("the twisted shift only acts on the truncated system")
    rep = Report()
    shape = state.shape
    rep.counter("periodicity", shape)
    rep.counter("sigma-squared", shape)
    for s, v in sorted(state.values.items()):
        t = sigma(shape, s)
        if t in state.values:
            rep.record("periodicity", shape, state.values[t] == v, where=[list(s), list(t)],
                       expected=v, actual=state.values[t])
        t2 = sigma(shape, t)
        if t2 in state.values:
            rep.record("sigma-squared", shape, state.values[t2] == v, where=[list(s), list(t2)],
                       expected=v, actual=state.values[t2])
    return rep


def dual_state(state: YState) -> YState:
    """``W(n, j, i) = 1/Y(n, i, j)``, a solution of the transposed system."""
    values = {Site(s.n, s.j, s.i): 1 / v for s, v in state.values.items()}
    return YState(state.shape.transposed(), values, state.mode)


def check_decoupling(state: YState) -> Report:
    """Every slot read by a relation must be an even site."""
    rep = Report()
    for n in range(*_span(state)):
        for i in range(1, state.shape.r + 1):
            for j in range(1, state.shape.k + 1):
                s = Site(n, i, j)
                if (n + i + j) % 2 == 0:
                    continue
                ok = all(
                    sum(direction_shift(s, d)) % 2 == 0
                    for d in ("W", "E", "N", "S", "plus", "minus")
                )
                rep.record("decoupling", state.shape, ok, where=list(s))
    return rep


def _span(state: YState) -> tuple[int, int]:
    lo, hi = state.n_range
    return lo, hi + 1


# untruncated system on a finite window


@dataclass(frozen=True)
class Diamond:
    """Target window for the untruncated system.

    At level ``n`` the window holds the even sites with
    ``|i - i0| + |j - j0| <= radius + n_max - n``; this is exactly the
    dependency cone of the top level, so levels 0 and 1 are the seeds.
    """

    n_max: int
    radius: int = 2
    center: tuple[int, int] = (0, 0)

    def contains(self, s: Site) -> bool:
        i0, j0 = self.center
        return 0 <= s.n <= self.n_max and abs(s.i - i0) + abs(s.j - j0) <= self.radius + self.n_max - s.n

    def level(self, n: int) -> Iterator[Site]:
        i0, j0 = self.center
        rad = self.radius + self.n_max - n
        for i in range(i0 - rad, i0 + rad + 1):
            span = rad - abs(i - i0)
            for j in range(j0 - span, j0 + span + 1):
                if (n + i + j) % 2 == 0:
                    yield Site(n, i, j)


def extend_infinite_window(
    seed: Callable[[int, int, int], Fraction], window: Diamond, shape=(1, 1)
) -> YState:
    """Evaluate the untruncated system on ``window`` from seeds on ``n = 0, 1``.

    ``shape`` is carried only as a label; no factor is ever omitted.
    """
    vals: dict[Site, Fraction] = {}
    for n in (0, 1):
        if n > window.n_max:
            break
        for s in window.level(n):
            vals[s] = Fraction(seed(n, s.i, s.j))
            if vals[s] == 0:
                raise DegenerateValue(f"zero seed at {s}")
    state = YState(as_shape(shape), vals, INFINITE)
    for n in range(1, window.n_max):
        for east in window.level(n + 1):
            s = Site(n, east.i, east.j)
            west = vals.get(Site(n - 1, s.i, s.j))
            if west is None:
                raise MissingNeighbor(f"west value at {(n - 1, s.i, s.j)} outside seeds")
            value = relation_rhs(state, s) / west
            if value == 0:
                raise DegenerateValue(f"Y{tuple(east)} = 0")
            vals[east] = value
    return state
