"""Coarse-to-fine machinery shared by both grid solvers.

Covers base-grid construction with symmetric overhang, the subdivision
count, the side-length recurrence, the closed-form iteration count, and
the worst-case inaccuracy per level.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CellLargerThanRect, EpsilonOutOfRange, SubdivisionTooSmall
from .geom import Point, Rect, SQRT2


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell lattice; node centers sit at cell centers.

    ``origin`` is the lower-left corner of cell (0, 0); node k = row*cols+col
    is centered at origin + (col + 0.5, row + 0.5) * cell_side.
    """

    origin: Point
    cell_side: float
    cols: int
    rows: int

    def __post_init__(self):
        if self.cell_side <= 0:
            raise ValueError("cell_side must be positive")
        if self.cols < 1 or self.rows < 1:
            raise ValueError("grid needs at least one cell")

    @property
    def node_count(self) -> int:
        return self.cols * self.rows

    def node_point(self, idx: int) -> Point:
        row, col = divmod(idx, self.cols)
        return Point(
            self.origin.x + (col + 0.5) * self.cell_side,
            self.origin.y + (row + 0.5) * self.cell_side,
        )

    def cell_corner(self, idx: int) -> Point:
        row, col = divmod(idx, self.cols)
        return Point(self.origin.x + col * self.cell_side, self.origin.y + row * self.cell_side)


@dataclass(frozen=True)
class RefinementSquare:
    center: Point
    side: float
    level: int

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("square side must be positive")
        if self.level < 0:
            raise ValueError("level must be >= 0")

    @property
    def diameter(self) -> float:
        return self.side * SQRT2


@dataclass(frozen=True)
class Schedule:
    """Frozen refinement plan: initial pitch, subdivision count, target accuracy."""

    n1: float
    s_c: int
    epsilon: float
    iterations: int

    def __post_init__(self):
        if self.s_c <= 2:
            raise SubdivisionTooSmall(
                f"subdivision count {self.s_c} <= 2 never converges (squares do not shrink)"
            )
        check_epsilon(self.epsilon, self.n1)
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def check_epsilon(epsilon: float, n1: float) -> None:
    """Validate the target-accuracy window (0, 2*n1*sqrt(2)]."""
    hi = 2.0 * n1 * SQRT2
    if not (0.0 < epsilon <= hi):
        raise EpsilonOutOfRange(f"epsilon must lie in (0, {hi!r}], got {epsilon!r}")


def base_grid(rect: Rect, n1: float) -> GridSpec:
    """Cover the rectangle with ceil(l/n1) x ceil(m/n1) cells of side n1.

    The grid is centered on the rectangle, splitting the overhang
    (ceil(l/n1) - l/n1)/2 per side on each axis.
    """
    if n1 <= 0:
        raise ValueError("n1 must be positive")
    if n1 > min(rect.l, rect.m):
        raise CellLargerThanRect(
            f"cell side {n1} exceeds rectangle sides ({rect.l}, {rect.m})"
        )
    cols = math.ceil(rect.l / n1)
    rows = math.ceil(rect.m / n1)
    over_x = (cols * n1 - rect.l) / 2.0
    over_y = (rows * n1 - rect.m) / 2.0
    origin = Point(rect.min_corner.x - over_x, rect.min_corner.y - over_y)
    return GridSpec(origin, n1, cols, rows)


def subdivision_count(cols: int, rows: int) -> int:
    """Nearest integer to sqrt(cols*rows); half-way ties round away from zero."""
    if cols < 1 or rows < 1:
        raise ValueError("grid dimensions must be positive")
    return subdivision_count_from_r(cols * rows)


def subdivision_count_from_r(r: int) -> int:
    """Nearest integer to sqrt(r) for a raw kept-square count."""
    if r < 1:
        raise ValueError("square count must be positive")
    return int(math.floor(math.sqrt(r) + 0.5))


def next_side(n_i: float, s_c: int) -> float:
    """Side-length recurrence: n_{i+1} = 2 * n_i / s_c."""
    if s_c <= 2:
        raise SubdivisionTooSmall(f"subdivision count {s_c} <= 2 never converges")
    return 2.0 * n_i / s_c


def max_inaccuracy(i: int, n1: float, s_c: int) -> float:
    """Worst-case inaccuracy after level i: 2^i * n1 * sqrt(2) / s_c^(i-1).

    Accepts s_c = 2 so callers can observe that the bound then stays
    constant in i (the non-convergent regime).
    """
    if i < 1:
        raise ValueError("level must be >= 1")
    return (2.0 ** i) * n1 * SQRT2 / float(s_c) ** (i - 1)


def iterations_needed(epsilon: float, n1: float, s_c: int) -> int:
    """Levels required to push the worst-case inaccuracy below epsilon."""
    if s_c <= 2:
        raise SubdivisionTooSmall(f"subdivision count {s_c} <= 2 never converges")
    check_epsilon(epsilon, n1)
    eps_c = epsilon / n1
    num = 3.0 * math.log(2.0) - 2.0 * math.log(eps_c)
    den = 2.0 * math.log(s_c) - 2.0 * math.log(2.0)
    return math.ceil(num / den) + 1


def subdivide(square: RefinementSquare, s_c: int) -> list[tuple[RefinementSquare, Point]]:
    """Cut a square into s_c^2 equal children; row-major from the SW corner."""
    if s_c <= 2:
        raise SubdivisionTooSmall(f"subdivision count {s_c} <= 2 never converges")
    child = square.side / s_c
    x0 = square.center.x - square.side / 2.0
    y0 = square.center.y - square.side / 2.0
    out = []
    for row in range(s_c):
        for col in range(s_c):
            c = Point(x0 + (col + 0.5) * child, y0 + (row + 0.5) * child)
            out.append((RefinementSquare(c, child, square.level + 1), c))
    return out


def successor_square(best_node: Point, n_i: float, level: int) -> RefinementSquare:
    """Square of side 2*n_i centered on the incumbent best node.

    Its boundary passes through the 8 lattice neighbors at spacing n_i.
    """
    return RefinementSquare(best_node, 2.0 * n_i, level + 1)
