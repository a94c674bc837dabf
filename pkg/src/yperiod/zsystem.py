"""Shifted z-variables and their relation checker.

Values are keyed by ``(n, i, j)`` with ``i`` already shifted (``i = i_Y + j``),
so membership is ``1 <= j <= k`` and ``j + 1 <= i <= j + r`` with ``n + i``
even.  The relation at an odd ``(n, i, j)`` reads

    z^W z^E = (1 - z^N_-) / (1 - 1/z^N) * (1 - z^S_+) / (1 - 1/z^S)

where ``N``/``S`` move ``i`` by one and ``-``/``+`` move ``j`` by one inside
the N/S slot.  Every slot outside the truncated shifted lattice contributes 1;
that single rule yields all boundary and corner forms.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import scalar
from .errors import DegenerateFactor
from .lattice import Site, SystemShape, as_shape, in_hat_truncated, sigma_hat
from .report import Report
from .ysystem import TRUNCATED, YState

FROM_Y = "from-Y"
FROM_GAMMA = "from-Gamma"

# (name, di, dj, kind): kind "lin" contributes (1 - z), "inv" contributes 1/(1 - 1/z)
SLOTS = (
    ("N-", -1, -1, "lin"),
    ("N", -1, 0, "inv"),
    ("S+", 1, 1, "lin"),
    ("S", 1, 0, "inv"),
)


@dataclass
class ZState:
    shape: SystemShape
    values: dict[Site, Fraction] = field(default_factory=dict)
    provenance: str = FROM_Y

    def __post_init__(self):
        self.shape = as_shape(self.shape)

    def __getitem__(self, key) -> Fraction:
        return self.values[Site(*key)]

    def __len__(self):
        return len(self.values)

    def copy(self) -> "ZState":
        return ZState(self.shape, dict(self.values), self.provenance)

    def validate(self) -> None:
        for s, v in self.values.items():
            if (s.n + s.i) % 2:
                raise ValueError(f"z stored at odd site {s}")
            if not in_hat_truncated(self.shape, *s):
                raise ValueError(f"z site {s} outside the truncated shifted lattice")
            if v == 0:
                raise DegenerateFactor(f"zero z value at {s}")

    def to_dict(self) -> dict:
        return {
            "system": "z",
            "provenance": self.provenance,
            "r": self.shape.r,
            "k": self.shape.k,
            "values": [
                {"n": s.n, "i": s.i, "j": s.j, **scalar.to_json(v)}
                for s, v in sorted(self.values.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ZState":
        values = {
            Site(int(e["n"]), int(e["i"]), int(e["j"])): scalar.from_json(e) for e in data["values"]
        }
        st = cls(SystemShape(int(data["r"]), int(data["k"])), values, data.get("provenance", FROM_Y))
        st.validate()
        return st

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def y_to_z(state: YState) -> ZState:
    """``z_j(n, i + j) = -1 / Y(n, i, j)``."""
    if state.mode != TRUNCATED:
        raise ValueError("only truncated Y-states have a shifted counterpart")
    values = {Site(s.n, s.i + s.j, s.j): -1 / v for s, v in state.values.items()}
    return ZState(state.shape, values, FROM_Y)


def z_to_y(state: ZState) -> YState:
    values = {Site(s.n, s.i - s.j, s.j): -1 / v for s, v in state.values.items()}
    return YState(state.shape, values)


def kept_slots(shape: SystemShape, i: int, j: int) -> tuple[str, ...]:
    """Names of the factor slots that survive truncation at relation site ``(., i, j)``."""
    return tuple(
        name for name, di, dj, _ in SLOTS if in_hat_truncated(shape, 0, i + di, j + dj)
    )


def z_relation_rhs(state: ZState, s: Site) -> Fraction:
    n, i, j = s
    out = scalar.ONE
    for name, di, dj, kind in SLOTS:
        if not in_hat_truncated(state.shape, n, i + di, j + dj):
            continue
        z = state.values[Site(n, i + di, j + dj)]
        if kind == "lin":
            out *= 1 - z
        else:
            if z == 1:
                raise DegenerateFactor(f"1 - 1/z vanishes at {(n, i + di, j + dj)} ({name} slot of {s})")
            out /= 1 - 1 / z
    return out


def relation_sites(state: ZState) -> list[Site]:
    """Odd sites of the truncated shifted lattice whose slots are all stored."""
    out = []
    ns = {s.n for s in state.values}
    if not ns:
        return out
    for n in range(min(ns) + 1, max(ns)):
        for j in range(1, state.shape.k + 1):
            for i in range(j + 1, j + state.shape.r + 1):
                if (n + i) % 2 == 0:
                    continue
                s = Site(n, i, j)
                needed = [Site(n - 1, i, j), Site(n + 1, i, j)]
                needed += [
                    Site(n, i + di, j + dj)
                    for _, di, dj, _ in SLOTS
                    if in_hat_truncated(state.shape, n, i + di, j + dj)
                ]
                if all(t in state.values for t in needed):
                    out.append(s)
    return out


def boundary_class(shape: SystemShape, i: int, j: int) -> list[str]:
    """Labels of the boundaries touched by relation site ``(., i, j)``."""
    tags = []
    if j == 1:
        tags.append("j=1")
    if j == shape.k:
        tags.append("j=k")
    if i == j + 1:
        tags.append("i=j+1")
    if i == j + shape.r:
        tags.append("i=j+r")
    jt = [t for t in tags if t.startswith("j")]
    it = [t for t in tags if t.startswith("i")]
    # for k = 1 or r = 1 one site sits on several corners at once
    tags += [f"corner[{a},{b}]" for a in jt for b in it]
    return tags or ["interior"]


def z_relation_check(state: ZState, *, check: str = "z-relations", coverage: bool = False) -> Report:
    rep = Report()
    rep.counter(check, state.shape)
    for s in relation_sites(state):
        lhs = state.values[Site(s.n - 1, s.i, s.j)] * state.values[Site(s.n + 1, s.i, s.j)]
        rhs = z_relation_rhs(state, s)
        rep.record(check, state.shape, lhs == rhs, where=list(s), expected=rhs, actual=lhs)
        if coverage:
            for tag in boundary_class(state.shape, s.i, s.j):
                rep.record(f"{check}:{tag}", state.shape, lhs == rhs, where=list(s))
    return rep


def z_sigma_hat_check(state: ZState, *, check: str = "z-sigma") -> Report:
    rep = Report()
    rep.counter(check, state.shape)
    for s, v in sorted(state.values.items()):
        t = sigma_hat(state.shape, s)
        if t in state.values:
            rep.record(check, state.shape, state.values[t] == v, where=[list(s), list(t)],
                       expected=v, actual=state.values[t])
    return rep
