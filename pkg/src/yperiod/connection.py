"""Parallel transport on the regular strip and the checks built on it.

Vertices are plane points ``(n, i)`` with ``n + i`` odd.  A step to
``(n+1, i+1)`` uses the x-edge ``X(n+1, i)``; a step to ``(n+1, i-1)`` uses
the a-edge ``A(n, i-1)``.  Transport multiplies edge matrices left to right
in traversal order.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .errors import InsufficientWindow, NotApplicable, NotRegular
from .gamma import GammaState, build_a, build_x, z_from_gamma
from .lattice import PlanePoint, regular_region, require_r_ge_k, sigma_hat
from .matrix import SquareMatrix, product
from .report import Report


@dataclass(frozen=True)
class EdgeRef:
    kind: str  # "x" or "a"
    position: PlanePoint

    @property
    def tail(self) -> PlanePoint:
        n, i = self.position
        return PlanePoint(n - 1, i) if self.kind == "x" else PlanePoint(n, i + 1)

    @property
    def head(self) -> PlanePoint:
        n, i = self.position
        return PlanePoint(n, i + 1) if self.kind == "x" else PlanePoint(n + 1, i)


def edge_between(u, v) -> EdgeRef:
    (n1, i1), (n2, i2) = u, v
    if (n1 + i1) % 2 == 0:
        raise ValueError(f"{tuple(u)} is not a vertex (n + i must be odd)")
    if n2 != n1 + 1 or abs(i2 - i1) != 1:
        raise ValueError(f"no directed edge {tuple(u)} -> {tuple(v)}")
    if i2 == i1 + 1:
        return EdgeRef("x", PlanePoint(n2, i1))
    return EdgeRef("a", PlanePoint(n1, i2))


class Connection:
    """Edge matrices of one generated state, cached."""

    def __init__(self, state: GammaState):
        require_r_ge_k(state.shape)
        self.state = state
        self.shape = state.shape
        self.size = state.shape.k + 1
        self.region = regular_region(state.shape)
        self._edge = lru_cache(maxsize=None)(self._edge_uncached)
        self._delta = lru_cache(maxsize=None)(self._delta_uncached)

    def X(self, n: int, i: int) -> SquareMatrix:
        return self._edge(EdgeRef("x", PlanePoint(n, i)))

    def A(self, n: int, i: int) -> SquareMatrix:
        return self._edge(EdgeRef("a", PlanePoint(n, i)))

    def _edge_uncached(self, e: EdgeRef) -> SquareMatrix:
        n, i = e.position
        return build_x(self.state, n, i) if e.kind == "x" else build_a(self.state, n, i)

    def edge_matrix(self, e: EdgeRef) -> SquareMatrix:
        return self._edge(e)

    def transport(self, path: Sequence) -> SquareMatrix:
        """Ordered product along ``path`` (a list of vertices)."""
        if len(path) < 1:
            raise ValueError("empty path")
        return product((self._edge(edge_between(u, v)) for u, v in zip(path, path[1:])), self.size)

    # paths

    def northern_path(self, p) -> list[PlanePoint]:
        """a-edges up to row k, the staircase along rows k/k+1, x-edges down to the image."""
        n, i = p
        k, r = self.shape.k, self.shape.r
        path = [PlanePoint(n, i)]
        for _ in range(i - k):
            n, i = n + 1, i - 1
            path.append(PlanePoint(n, i))
        for _ in range(k):
            path.append(PlanePoint(n + 1, i + 1))
            path.append(PlanePoint(n + 2, i))
            n += 2
        for _ in range(r + 2 - p[1]):
            n, i = n + 1, i + 1
            path.append(PlanePoint(n, i))
        return path

    def southern_path(self, p) -> list[PlanePoint]:
        n, i = p
        k, r = self.shape.k, self.shape.r
        path = [PlanePoint(n, i)]
        for _ in range(r + 2 - i):
            n, i = n + 1, i + 1
            path.append(PlanePoint(n, i))
        for _ in range(k):
            path.append(PlanePoint(n + 1, i - 1))
            path.append(PlanePoint(n + 2, i))
            n += 2
        for _ in range(p[1] - k):
            n, i = n + 1, i - 1
            path.append(PlanePoint(n, i))
        return path

    def random_path(self, rng: random.Random, p, q) -> list[PlanePoint]:
        """Uniformly stepped regular path from ``p`` to ``q``, rejecting dead ends."""
        (n1, i1), (n2, i2) = p, q
        steps = n2 - n1
        lo, hi = self.region.vertex_rows[0], self.region.vertex_rows[-1]
        if steps < abs(i2 - i1) or (steps - (i2 - i1)) % 2:
            raise ValueError(f"no path from {tuple(p)} to {tuple(q)}")
        path = [PlanePoint(n1, i1)]
        n, i = n1, i1
        while n < n2:
            left = n2 - n
            moves = []
            for d in (1, -1):
                ni = i + d
                if lo <= ni <= hi and abs(i2 - ni) <= left - 1:
                    moves.append(d)
            d = rng.choice(moves)
            n, i = n + 1, i + d
            path.append(PlanePoint(n, i))
        return path

    # staircases

    def staircase_product(self, n0: int, side: str = "north") -> SquareMatrix:
        """Alternating edge product hugging one side of the regular strip.

        North: ``X(n0, k) A(n0, k) X(n0+2, k) A(n0+2, k) ... A(n0+2(k-1), k)``
        with ``n0 + k`` even.  South: ``A(n0, r+1) X(n0+2, r+1) A(n0+2, r+1)
        ... X(n0+2k, r+1)`` with ``n0 + r + 1`` even.
        """
        k, r = self.shape.k, self.shape.r
        if side == "north":
            if (n0 + k) % 2:
                raise ValueError("northern staircase needs n0 + k even")
            mats = []
            for t in range(k):
                mats += [self.X(n0 + 2 * t, k), self.A(n0 + 2 * t, k)]
        elif side == "south":
            if (n0 + r + 1) % 2:
                raise ValueError("southern staircase needs n0 + r + 1 even")
            mats = []
            for t in range(k):
                mats += [self.A(n0 + 2 * t, r + 1), self.X(n0 + 2 * t + 2, r + 1)]
        else:
            raise ValueError(f"side must be 'north' or 'south', got {side!r}")
        return product(mats, self.size)

    def staircase_starts(self, side: str = "north") -> list[int]:
        """Every ``n0`` whose staircase lies inside the stored window."""
        out = []
        for n0 in range(-2, self.state.n_cols + 2):
            try:
                self.staircase_product(n0, side)
            except (InsufficientWindow, ValueError):
                continue
            out.append(n0)
        return out

    # delta

    def image(self, p) -> PlanePoint:
        return sigma_hat(self.shape, PlanePoint(*p))

    def delta(self, p, path: Sequence | None = None) -> SquareMatrix:
        p = PlanePoint(*p)
        if path is None:
            return self._delta(p)
        self._check_endpoints(p)
        if PlanePoint(*path[0]) != p or PlanePoint(*path[-1]) != self.image(p):
            raise ValueError("path does not join p to its image")
        return self.transport(path)

    def _check_endpoints(self, p: PlanePoint) -> None:
        if (p.n + p.i) % 2 == 0:
            raise ValueError(f"{tuple(p)} is not a vertex")
        q = self.image(p)
        for v in (p, q):
            if v.i not in self.region.vertex_rows:
                raise NotRegular(f"vertex {tuple(v)} is not regular")

    def _delta_uncached(self, p: PlanePoint) -> SquareMatrix:
        self._check_endpoints(p)
        return self.transport(self.northern_path(p))

    def eligible_vertices(self) -> list[PlanePoint]:
        out = []
        for n in range(-2, self.state.n_cols + 2):
            for i in self.region.vertex_rows:
                if (n + i) % 2 == 0:
                    continue
                try:
                    self.delta((n, i))
                    self.transport(self.southern_path((n, i)))
                except InsufficientWindow:
                    continue
                out.append(PlanePoint(n, i))
        return out

    def northern_factorization(self, p):
        """Split the northern transport into a-prefix, staircase and x-suffix."""
        n, i = p
        k = self.shape.k
        path = self.northern_path(p)
        l = i - k
        prefix = [edge_between(u, v) for u, v in zip(path[: l + 1], path[1 : l + 1])]
        stair = path[l : l + 2 * k + 1]
        suffix = [edge_between(u, v) for u, v in zip(path[l + 2 * k :], path[l + 2 * k + 1 :])]
        n0 = n + l + 1
        return prefix, self.staircase_product(n0, "north"), suffix, stair

    def southern_factorization(self, p):
        n, i = p
        k, r = self.shape.k, self.shape.r
        path = self.southern_path(p)
        l2 = r + 2 - i
        prefix = [edge_between(u, v) for u, v in zip(path[: l2 + 1], path[1 : l2 + 1])]
        suffix = [edge_between(u, v) for u, v in zip(path[l2 + 2 * k :], path[l2 + 2 * k + 1 :])]
        m = n + l2
        return prefix, self.staircase_product(m, "south"), suffix

    # squares of the regular strip

    def regular_squares(self) -> list[tuple[int, int]]:
        """Centres ``(n, i)`` of squares whose four edges are regular, ``k+1 <= i <= r+1``."""
        k, r = self.shape.k, self.shape.r
        out = []
        for n in range(-1, self.state.n_cols + 1):
            for i in range(k + 1, r + 2):
                if (n + i) % 2 == 0:
                    out.append((n, i))
        return out

    def square_frame(self, n: int, i: int) -> dict:
        """Corner vertices and edge matrices of a square and of its image square."""
        P = self.shape.period
        corners = {
            "W": PlanePoint(n - 1, i),
            "N": PlanePoint(n, i - 1),
            "E": PlanePoint(n + 1, i),
            "S": PlanePoint(n, i + 1),
        }
        return {
            "corners": corners,
            "X": self.X(n, i),
            "A": self.A(n, i),
            "A'": self.A(n - 1, i - 1),
            "X'": self.X(n + 1, i - 1),
            # image square centred at (n + P, P - i)
            "Y": self.X(n + P, P - i),
            "B": self.A(n + P, P - i),
            "Y'": self.X(n + P + 1, P - i - 1),
            "B'": self.A(n + P - 1, P - i - 1),
        }


def anti_lower_triangular(m: SquareMatrix) -> bool:
    return m.is_anti_lower_triangular()


def anti_upper_triangular(m: SquareMatrix) -> bool:
    return m.is_anti_upper_triangular()


def anti_diagonal(m: SquareMatrix) -> bool:
    return m.is_anti_diagonal()


# checks


def check_staircases(conn: Connection) -> Report:
    rep = Report()
    shape = conn.shape
    rep.counter("staircase-north", shape)
    rep.counter("staircase-south", shape)
    for n0 in conn.staircase_starts("north"):
        m = conn.staircase_product(n0, "north")
        rep.record("staircase-north", shape, m.is_anti_lower_triangular(), where=n0,
                   expected="anti-lower-triangular", actual=m.tolist())
        rep.record("staircase-bound", shape, m.vanishing_bound() >= shape.k + 2, where=n0,
                   expected=shape.k + 2, actual=m.vanishing_bound())
    for n0 in conn.staircase_starts("south"):
        m = conn.staircase_product(n0, "south")
        rep.record("staircase-south", shape, m.is_anti_upper_triangular(), where=n0,
                   expected="anti-upper-triangular", actual=m.tolist())
    return rep


def check_delta(conn: Connection, rng: random.Random | None = None, extra_paths: int = 2) -> Report:
    """``delta(p)`` is anti-diagonal and path independent for every eligible ``p``."""
    rep = Report()
    shape = conn.shape
    rep.counter("delta", shape)
    for p in conn.eligible_vertices():
        d = conn.delta(p)
        rep.record("delta", shape, d.is_anti_diagonal(), where=list(p), expected="anti-diagonal",
                   actual=d.tolist())
        south = conn.transport(conn.southern_path(p))
        rep.record("path-independence", shape, south == d, where=list(p), expected=d.tolist(),
                   actual=south.tolist())
        if rng is not None:
            for _ in range(extra_paths):
                other = conn.transport(conn.random_path(rng, p, conn.image(p)))
                rep.record("path-independence", shape, other == d, where=list(p))
        prefix, stair, suffix, _ = conn.northern_factorization(p)
        ok = (
            all(e.kind == "a" for e in prefix)
            and all(e.kind == "x" for e in suffix)
            and stair.is_anti_lower_triangular()
            and product([conn.edge_matrix(e) for e in prefix], conn.size) @ stair
            @ product([conn.edge_matrix(e) for e in suffix], conn.size) == d
        )
        rep.record("delta-factorization", shape, ok, where=list(p))
    return rep


def _delta_at_corners(conn: Connection, corners) -> dict:
    return {name: conn.delta(v) for name, v in corners.items()}


def eligible_squares(conn: Connection) -> list[tuple[int, int]]:
    out = []
    for n, i in conn.regular_squares():
        try:
            frame = conn.square_frame(n, i)
            _delta_at_corners(conn, frame["corners"])
        except (InsufficientWindow, NotRegular):
            continue
        out.append((n, i))
    return out


def check_transport_commutation(conn: Connection, square, *, rep: Report | None = None) -> Report:
    """The four commutation identities between a square and its image square."""
    rep = rep if rep is not None else Report()
    n, i = square
    f = conn.square_frame(n, i)
    d = _delta_at_corners(conn, f["corners"])
    pairs = {
        "A'd(N)=d(W)Y": (f["A'"] @ d["N"], d["W"] @ f["Y"]),
        "Ad(E)=d(S)Y'": (f["A"] @ d["E"], d["S"] @ f["Y'"]),
        "Xd(S)=d(W)B'": (f["X"] @ d["S"], d["W"] @ f["B'"]),
        "X'd(E)=d(N)B": (f["X'"] @ d["E"], d["N"] @ f["B"]),
    }
    for name, (lhs, rhs) in pairs.items():
        rep.record("transport", conn.shape, lhs == rhs, where=[n, i, name], expected=rhs.tolist(),
                   actual=lhs.tolist())
    return rep


def check_diagonal_identity(conn: Connection, square, *, rep: Report | None = None) -> Report:
    """Diagonal/anti-diagonal part identities, the Weyl-conjugated form and the ratio list."""
    rep = rep if rep is not None else Report()
    shape = conn.shape
    n, i = square
    f = conn.square_frame(n, i)
    bar = {name: m.anti_diag_part() for name, m in _delta_at_corners(conn, f["corners"]).items()}
    D = {name: f[name].diag_part() for name in ("A", "A'", "B", "B'")}
    identities = {
        "D(A')bar(N)=bar(W)": (D["A'"] @ bar["N"], bar["W"]),
        "D(A)bar(E)=bar(S)": (D["A"] @ bar["E"], bar["S"]),
        "bar(S)=bar(W)D(B')": (bar["S"], bar["W"] @ D["B'"]),
        "bar(E)=bar(N)D(B)": (bar["E"], bar["N"] @ D["B"]),
    }
    for name, (lhs, rhs) in identities.items():
        rep.record("diagonal", shape, lhs == rhs, where=[n, i, name], expected=rhs.tolist(),
                   actual=lhs.tolist())
    w = SquareMatrix.longest_weyl(conn.size)
    lhs = D["A"] @ D["A'"].diagonal_inverse()
    rhs = w @ D["B'"] @ D["B"].diagonal_inverse() @ w
    rep.record("weyl-conjugation", shape, lhs == rhs, where=[n, i], expected=rhs.tolist(),
               actual=lhs.tolist())
    k = shape.k
    for j in range(1, k + 2):
        a, ap = f["A"][j - 1, j - 1], f["A'"][j - 1, j - 1]
        b, bp = f["B"][k + 1 - j, k + 1 - j], f["B'"][k + 1 - j, k + 1 - j]
        rep.record("ratio", shape, a / ap == bp / b, where=[n, i, j], expected=bp / b, actual=a / ap)
    return rep


def check_ratio_to_z(conn: Connection, square, z=None, *, rep: Report | None = None) -> Report:
    """Link the diagonal ratios ``a'_j / a_j`` of a square to its z-values.

    Also rebuilds ``z`` on the square and on its image square from the ratios
    alone and checks the two agree under ``j -> k + 1 - j``.
    """
    rep = rep if rep is not None else Report()
    shape = conn.shape
    k, P = shape.k, shape.period
    if z is None:
        z = z_from_gamma(conn.state)
    n, i = square
    f = conn.square_frame(n, i)

    def zval(j, nn, ii):
        return z.values[(nn, ii, j)]

    rho = [f["A'"][t, t] / f["A"][t, t] for t in range(k + 1)]
    for j in range(1, k + 2):
        if j == 1:
            lhs = 1 / (1 - zval(1, n, i))
        elif j == k + 1:
            lhs = 1 - zval(k, n, i)
        else:
            lhs = (1 - zval(j - 1, n, i)) / (1 - zval(j, n, i))
        rep.record("ratio-z", shape, lhs == rho[j - 1], where=[n, i, j], expected=rho[j - 1], actual=lhs)
    rho_img = [f["B'"][t, t] / f["B"][t, t] for t in range(k + 1)]
    acc, acc_img = 1, 1
    for j in range(1, k + 1):
        acc *= rho[j - 1]
        # 1 - z_j = 1 / (rho_1 ... rho_j); on the image the same product runs from the top
        acc_img = 1
        for t in range(k + 2 - j, k + 2):
            acc_img *= rho_img[t - 1]
        z_here = 1 - 1 / acc
        z_img = 1 - acc_img
        ok = z_here == z_img == zval(j, n, i) == zval(k + 1 - j, n + P, P - i)
        rep.record("induced-z-sigma", shape, ok, where=[n, i, j], expected=zval(j, n, i), actual=z_img)
    return rep


def check_sigma_factorization_k2(state_or_values, square=None) -> Report:
    """Three-factor form of ``XA`` on a square at row ``i = k`` when ``k = 2``.

    Accepts either a generated state plus a square centre ``(n, 2)`` or a
    mapping with keys ``x1, x2, a1, a2, a3, a1p, x1p``.
    """
    rep = Report()
    if isinstance(state_or_values, GammaState):
        st = state_or_values
        if st.shape.k != 2:
            raise NotApplicable("the explicit three-factor display is for k = 2")
        n, i = square
        if i != 2:
            raise NotApplicable("the three-factor display applies at row i = k")
        try:
            v = {
                "x1": st.x[(1, n, 2)], "x2": st.x[(2, n, 2)],
                "a1": st.a[(1, n, 2)], "a2": st.a[(2, n, 2)], "a3": st.a[(3, n, 2)],
                "a1p": st.a[(1, n - 1, 1)], "x1p": st.x[(1, n + 1, 1)],
            }
        except KeyError:
            raise InsufficientWindow(f"square ({n}, 2) not fully stored") from None
        shape, where = st.shape, [n, i]
    else:
        v = dict(state_or_values)
        if v.get("k", 2) != 2:
            raise NotApplicable("the explicit three-factor display is for k = 2")
        shape, where = "(k=2)", None
    X_ = SquareMatrix.x_form([v["x1"], v["x2"]])
    A_ = SquareMatrix.a_form([v["a1"], v["a2"], v["a3"]])
    left = SquareMatrix([[v["a1p"], 0, 0], [1, v["x2"], 0], [0, 0, 1]])
    sigma_block = SquareMatrix([[1, 0, 0], [0, 0, v["a3"]], [0, 1, v["a3"]]])
    right = SquareMatrix([[1, v["x1p"], 0], [0, 1, 0], [0, 0, 1]])
    lhs, rhs = X_ @ A_, left @ sigma_block @ right
    rep.record("factorization-k2", shape, lhs == rhs, where=where, expected=rhs.tolist(), actual=lhs.tolist())
    rep.record("factorization-k2-zero", shape, sigma_block[1, 1] == 0, where=where)
    return rep


def sigma_factorization_squares(state: GammaState) -> list[tuple[int, int]]:
    out = []
    for n in range(state.n_cols):
        if (n + 2) % 2:
            continue
        keys_x = [(1, n, 2), (2, n, 2), (1, n + 1, 1)]
        keys_a = [(1, n, 2), (2, n, 2), (3, n, 2), (1, n - 1, 1)]
        if all(kk in state.x for kk in keys_x) and all(kk in state.a for kk in keys_a):
            out.append((n, 2))
    return out
