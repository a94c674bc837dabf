"""Small exact square matrices with the shape predicates used by the transport checks."""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from . import scalar


class SquareMatrix:
    """Immutable ``m x m`` matrix of Fractions, indexed 0-based internally.

    Shape predicates follow the 1-based convention: an entry ``[p, q]`` lies
    northwest of the anti-diagonal when ``p + q < m + 1``.
    """

    __slots__ = ("rows", "size")

    def __init__(self, rows: Iterable[Iterable]):
        self.rows = tuple(tuple(Fraction(v) for v in row) for row in rows)
        self.size = len(self.rows)
        if any(len(row) != self.size for row in self.rows):
            raise ValueError("matrix must be square")

    @classmethod
    def identity(cls, m: int) -> "SquareMatrix":
        return cls([[int(p == q) for q in range(m)] for p in range(m)])

    @classmethod
    def zeros(cls, m: int) -> "SquareMatrix":
        return cls([[0] * m for _ in range(m)])

    @classmethod
    def longest_weyl(cls, m: int) -> "SquareMatrix":
        """Anti-diagonal matrix of ones."""
        return cls([[int(p + q == m - 1) for q in range(m)] for p in range(m)])

    @classmethod
    def diagonal(cls, entries: Sequence) -> "SquareMatrix":
        m = len(entries)
        return cls([[entries[p] if p == q else 0 for q in range(m)] for p in range(m)])

    @classmethod
    def x_form(cls, xs: Sequence) -> "SquareMatrix":
        """Unit diagonal with ``xs[j-1]`` at ``(j, j+1)``."""
        m = len(xs) + 1
        rows = [[int(p == q) for q in range(m)] for p in range(m)]
        for t, v in enumerate(xs):
            rows[t][t + 1] = v
        return cls(rows)

    @classmethod
    def a_form(cls, as_: Sequence) -> "SquareMatrix":
        """``as_[j-1]`` on the diagonal and ones just below it."""
        m = len(as_)
        rows = [[0] * m for _ in range(m)]
        for t, v in enumerate(as_):
            rows[t][t] = v
            if t + 1 < m:
                rows[t + 1][t] = 1
        return cls(rows)

    def __getitem__(self, pq) -> Fraction:
        p, q = pq
        return self.rows[p][q]

    def __matmul__(self, other: "SquareMatrix") -> "SquareMatrix":
        if other.size != self.size:
            raise ValueError("size mismatch")
        cols = list(zip(*other.rows))
        return SquareMatrix([[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols]
                             for row in self.rows])

    def __eq__(self, other) -> bool:
        if isinstance(other, SquareMatrix):
            return self.rows == other.rows
        try:
            return self.rows == SquareMatrix(other).rows
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        body = ", ".join("[" + ", ".join(str(v) for v in row) + "]" for row in self.rows)
        return f"SquareMatrix([{body}])"

    def tolist(self) -> list[list[Fraction]]:
        return [list(row) for row in self.rows]

    def direct_sum_identity(self, d: int) -> "SquareMatrix":
        """``M (+) I_d``: pad with an identity block in the lower right."""
        m = self.size + d
        rows = [[0] * m for _ in range(m)]
        for p, row in enumerate(self.rows):
            rows[p][: self.size] = row
        for t in range(self.size, m):
            rows[t][t] = 1
        return SquareMatrix(rows)

    def diag_part(self) -> "SquareMatrix":
        return SquareMatrix.diagonal([self.rows[t][t] for t in range(self.size)])

    def anti_diag_part(self) -> "SquareMatrix":
        m = self.size
        return SquareMatrix([[self.rows[p][q] if p + q == m - 1 else 0 for q in range(m)]
                             for p in range(m)])

    def diagonal_inverse(self) -> "SquareMatrix":
        if not self.is_diagonal():
            raise ValueError("not diagonal")
        return SquareMatrix.diagonal([1 / self.rows[t][t] for t in range(self.size)])

    def is_diagonal(self) -> bool:
        return all(v == 0 for p, row in enumerate(self.rows) for q, v in enumerate(row) if p != q)

    def is_anti_lower_triangular(self) -> bool:
        m = self.size
        return all(self.rows[p][q] == 0 for p in range(m) for q in range(m) if p + q < m - 1)

    def is_anti_upper_triangular(self) -> bool:
        m = self.size
        return all(self.rows[p][q] == 0 for p in range(m) for q in range(m) if p + q > m - 1)

    def is_anti_diagonal(self) -> bool:
        m = self.size
        return all(self.rows[p][q] == 0 for p in range(m) for q in range(m) if p + q != m - 1)

    def vanishing_bound(self) -> int:
        """Largest ``b`` such that every 1-based entry with ``p + q < b`` is zero."""
        m = self.size
        b = 2
        while b <= 2 * m and all(
            self.rows[p][q] == 0 for p in range(m) for q in range(m) if p + q + 2 < b + 1
        ):
            b += 1
        return b

    def to_json(self) -> list[list[dict]]:
        """Row-major ``{num, den}`` pairs; row ``p`` of the list is matrix row ``p + 1``."""
        return [[scalar.to_json(v) for v in row] for row in self.rows]

    @classmethod
    def from_json(cls, data) -> "SquareMatrix":
        return cls([[scalar.from_json(v) for v in row] for row in data])


def product(mats: Iterable[SquareMatrix], size: int) -> SquareMatrix:
    out = SquareMatrix.identity(size)
    for m in mats:
        out = out @ m
    return out
