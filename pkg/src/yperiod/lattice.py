"""Index bookkeeping for the lattice, the shifted lattice and the edge graph.

Conventions: ``n`` runs west to east, ``i`` north to south (increasing
southward), ``j`` minus to plus.  All indices are 1-based as in the
published formulas.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

from .errors import ShapeUnsupported


class Site(NamedTuple):
    n: int
    i: int
    j: int


class PlanePoint(NamedTuple):
    n: int
    i: int


@dataclass(frozen=True, order=True)
class SystemShape:
    """Rectangle ``[1, r] x [1, k]`` of the truncated system."""

    r: int
    k: int

    def __post_init__(self):
        if not (isinstance(self.r, int) and isinstance(self.k, int)):
            raise TypeError("r and k must be integers")
        if self.r < 1 or self.k < 1:
            raise ShapeUnsupported(f"need r >= 1 and k >= 1, got ({self.r}, {self.k})")

    @property
    def period(self) -> int:
        """Translation length ``r + k + 2`` of the twisted shift."""
        return self.r + self.k + 2

    def transposed(self) -> "SystemShape":
        return SystemShape(self.k, self.r)

    def __str__(self):
        return f"({self.r},{self.k})"


def as_shape(shape) -> SystemShape:
    if isinstance(shape, SystemShape):
        return shape
    r, k = shape
    return SystemShape(int(r), int(k))


_SHIFTS = {
    "W": (-1, 0, 0),
    "N": (0, -1, 0),
    "E": (1, 0, 0),
    "S": (0, 1, 0),
    "plus": (0, 0, 1),
    "minus": (0, 0, -1),
}
DIRECTIONS = tuple(_SHIFTS)


def direction_shift(s: Site, d: str) -> Site:
    dn, di, dj = _SHIFTS[d]
    return Site(s[0] + dn, s[1] + di, s[2] + dj)


def in_truncated(shape: SystemShape, s: Site) -> bool:
    return 1 <= s[1] <= shape.r and 1 <= s[2] <= shape.k


def parity(s: Site) -> str:
    return "even" if (s[0] + s[1] + s[2]) % 2 == 0 else "odd"


def sigma(shape: SystemShape, s: Site) -> Site:
    """Twisted shift ``(n, i, j) -> (n + r + k + 2, r + 1 - i, k + 1 - j)``."""
    n, i, j = s
    return Site(n + shape.period, shape.r + 1 - i, shape.k + 1 - j)


def sigma_hat(shape: SystemShape, p: Union[PlanePoint, Site]):
    """Twisted shift in shifted coordinates.

    Plane points map to ``(n + r + k + 2, r + k + 2 - i)``; lattice sites
    additionally send ``j`` to ``k + 1 - j``.
    """
    P = shape.period
    if len(p) == 2:
        n, i = p
        return PlanePoint(n + P, P - i)
    n, i, j = p
    return Site(n + P, P - i, shape.k + 1 - j)


def in_hat_truncated(shape: SystemShape, n: int, i: int, j: int) -> bool:
    """Membership of shifted-index ``(n, i, j)`` in the truncated shifted lattice."""
    return 1 <= j <= shape.k and j + 1 <= i <= j + shape.r


def require_r_ge_k(shape: SystemShape) -> None:
    if shape.r < shape.k:
        raise ShapeUnsupported(
            f"edge-graph machinery needs r >= k; transpose {shape} to {shape.transposed()}"
        )


@dataclass(frozen=True)
class GammaRanges:
    """Validity of edge variables and the rows on which each square relation lives.

    ``x_j(n, i)`` exists for ``1 <= j <= k`` and ``j <= i <= j + r``.  The
    ``a_j(n, i)`` ranges are ``[1, r + 1]`` for ``j = 1``, ``[j, j + r - 1]``
    for ``2 <= j <= k`` and ``[k, k + r]`` for ``j = k + 1``.  Only ``n + i``
    even is ever stored; the predicates ignore ``n``.
    """

    shape: SystemShape

    def x_valid(self, j: int, i: int) -> bool:
        r, k = self.shape.r, self.shape.k
        return 1 <= j <= k and j <= i <= j + r

    def a_valid(self, j: int, i: int) -> bool:
        r, k = self.shape.r, self.shape.k
        return (
            (j == 1 and 1 <= i <= r + 1)
            or (1 <= j <= k and j <= i <= j + r - 1)
            or (j == k + 1 and k <= i <= k + r)
        )

    def x_rows(self, j: int) -> range:
        return range(j, j + self.shape.r + 1) if 1 <= j <= self.shape.k else range(0)

    def a_rows(self, j: int) -> range:
        r, k = self.shape.r, self.shape.k
        if j == 1:
            return range(1, r + 2)
        if j == k + 1:
            return range(k, k + r + 1)
        if 1 < j <= k:
            return range(j, j + r)
        return range(0)

    def additive_rows(self, j: int) -> range:
        """Square rows carrying ``x_j + a_j = a'_j + x'_{j-1}`` (absent terms are 0)."""
        r, k = self.shape.r, self.shape.k
        if j == 1:
            return range(1, r + 2)
        if j == k + 1:
            return range(k + 1, k + r + 2)
        if 1 < j <= k:
            return range(j, j + r + 1)
        return range(0)

    def multiplicative_rows(self, j: int) -> range:
        """Square rows carrying ``x_j a_{j+1} = a'_j x'_j``."""
        if 1 <= j <= self.shape.k:
            return range(j + 1, j + self.shape.r + 1)
        return range(0)

    def square_rows(self) -> range:
        return range(1, self.shape.k + self.shape.r + 2)


def gamma_ranges(shape: SystemShape) -> GammaRanges:
    shape = as_shape(shape)
    require_r_ge_k(shape)
    return GammaRanges(shape)


@dataclass(frozen=True)
class RegularRegion:
    edge_rows: range
    vertex_rows: range

    def edge_is_regular(self, i: int) -> bool:
        return i in self.edge_rows

    def vertex_is_regular(self, i: int) -> bool:
        return i in self.vertex_rows


def regular_region(shape: SystemShape) -> RegularRegion:
    """Rows ``k..r+1`` hold full edge matrices; their endpoints span ``k..r+2``."""
    shape = as_shape(shape)
    require_r_ge_k(shape)
    return RegularRegion(range(shape.k, shape.r + 2), range(shape.k, shape.r + 3))
