"""Planar primitives: points, polygons, hulls, reflection and containment.

All incidence predicates use the absolute tolerance ``TOL`` (1e-9 length
units); scenes are expected to live at O(1)-O(1e3) coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import AllCollinear, FewerThanThreePoints

TOL = 1e-9

SQRT2 = math.sqrt(2.0)


class Containment(Enum):
    INSIDE = "inside"
    ON_BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Point:
    """A location in the plane. Coordinates must be finite."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def distance(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Line:
    """An infinite line given by an anchor point and a unit direction."""

    anchor: Point
    direction: tuple[float, float]

    def __post_init__(self):
        norm = math.hypot(*self.direction)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"line direction must be a unit vector, norm={norm!r}")

    @staticmethod
    def through(a: Point, b: Point) -> "Line":
        dx, dy = b.x - a.x, b.y - a.y
        norm = math.hypot(dx, dy)
        if norm == 0.0:
            raise ValueError("cannot build a line through two identical points")
        return Line(a, (dx / norm, dy / norm))


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with positive side lengths l (width), m (height)."""

    min_corner: Point
    l: float
    m: float

    def __post_init__(self):
        if not (self.l > 0 and self.m > 0):
            raise ValueError(f"rectangle sides must be positive, got l={self.l}, m={self.m}")

    @property
    def max_corner(self) -> Point:
        return Point(self.min_corner.x + self.l, self.min_corner.y + self.m)


@dataclass(frozen=True)
class Polygon:
    """Simple closed polygon, vertices in counter-clockwise order."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        v = self.vertices
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for i in range(len(v)):
            if v[i].x == v[i - 1].x and v[i].y == v[i - 1].y:
                raise ValueError(f"consecutive duplicate vertex at index {i}")
        if self.signed_area() <= 0:
            raise ValueError("polygon vertices must be counter-clockwise (positive area)")
        if _self_intersects(v):
            raise ValueError("polygon edges self-intersect")

    def signed_area(self) -> float:
        v = self.vertices
        acc = 0.0
        for i in range(len(v)):
            a, b = v[i - 1], v[i]
            acc += a.x * b.y - b.x * a.y
        return 0.5 * acc

    def edges(self) -> Iterable[tuple[Point, Point]]:
        v = self.vertices
        for i in range(len(v)):
            yield v[i - 1], v[i]

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


def _cross(ox: float, oy: float, ax: float, ay: float, bx: float, by: float) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _segments_properly_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    d1 = _cross(q1.x, q1.y, q2.x, q2.y, p1.x, p1.y)
    d2 = _cross(q1.x, q1.y, q2.x, q2.y, p2.x, p2.y)
    d3 = _cross(p1.x, p1.y, p2.x, p2.y, q1.x, q1.y)
    d4 = _cross(p1.x, p1.y, p2.x, p2.y, q2.x, q2.y)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _self_intersects(v: Sequence[Point]) -> bool:
    n = len(v)
    edges = [(v[i - 1], v[i]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            adjacent = (j - i == 1) or (i == 0 and j == n - 1)
            if adjacent:
                continue
            if _segments_properly_cross(*edges[i], *edges[j]):
                return True
    return False


def _point_segment_distance(px: float, py: float, a: Point, b: Point) -> float:
    ax, ay, bx, by = a.x, a.y, b.x, b.y
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def boundary_distance(poly: Polygon, p: Point) -> float:
    """Minimum distance from p to the polygon's boundary."""
    return min(_point_segment_distance(p.x, p.y, a, b) for a, b in poly.edges())


def contains(poly: Polygon, p: Point) -> Containment:
    """Classify a point against a polygon with boundary tolerance TOL."""
    if boundary_distance(poly, p) <= TOL:
        return Containment.ON_BOUNDARY
    # Even-odd ray casting with a half-open vertex rule; the point is at
    # least TOL away from the boundary, so crossings are unambiguous.
    inside = False
    px, py = p.x, p.y
    for a, b in poly.edges():
        if (a.y <= py < b.y) or (b.y <= py < a.y):
            x_cross = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y)
            if x_cross > px:
                inside = not inside
    return Containment.INSIDE if inside else Containment.OUTSIDE


def contains_many(poly: Polygon, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized inside-or-on-boundary test for sample batches.

    Uses the same even-odd rule as :func:`contains`; points within TOL of
    the boundary count as contained.
    """
    vx = np.array([p.x for p in poly.vertices])
    vy = np.array([p.y for p in poly.vertices])
    ax, ay = np.roll(vx, 1), np.roll(vy, 1)
    bx, by = vx, vy
    x = np.asarray(xs, dtype=float)[:, None]
    y = np.asarray(ys, dtype=float)[:, None]
    crosses = ((ay <= y) & (y < by)) | ((by <= y) & (y < ay))
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = ax + (y - ay) * (bx - ax) / np.where(by == ay, np.inf, by - ay)
    inside = (np.sum(crosses & (x_cross > x), axis=1) % 2).astype(bool)

    # boundary band: distance to each edge segment
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    denom = np.where(denom == 0.0, 1.0, denom)
    t = np.clip(((x - ax) * dx + (y - ay) * dy) / denom, 0.0, 1.0)
    dist2 = (x - (ax + t * dx)) ** 2 + (y - (ay + t * dy)) ** 2
    on_edge = np.min(dist2, axis=1) <= TOL * TOL
    return inside | on_edge


def convex_hull(points: Sequence[Point]) -> Polygon:
    """Convex hull by monotone chain; vertices CCW, a subset of the input."""
    unique = sorted({(p.x, p.y) for p in points})
    if len(unique) < 3:
        raise FewerThanThreePoints(f"need at least 3 distinct points, got {len(unique)}")

    def chain(pts):
        out = []
        for px, py in pts:
            while len(out) > 1 and _cross(out[-2][0], out[-2][1], out[-1][0], out[-1][1], px, py) <= 0:
                out.pop()
            out.append((px, py))
        return out

    lower = chain(unique)
    upper = chain(reversed(unique))
    ring = lower[:-1] + upper[:-1]
    if len(ring) < 3:
        raise AllCollinear("input points are all collinear")
    return Polygon(tuple(Point(x, y) for x, y in ring))


def reflect(q: Point, o: Line) -> Point:
    """Mirror q across the line o."""
    dx, dy = o.direction
    px, py = q.x - o.anchor.x, q.y - o.anchor.y
    dot = px * dx + py * dy
    perp_x, perp_y = px - dot * dx, py - dot * dy
    return Point(q.x - 2.0 * perp_x, q.y - 2.0 * perp_y)


def enclosing_rect(poly: Polygon) -> Rect:
    """Minimal axis-aligned bounding rectangle of the polygon."""
    x0, y0, x1, y1 = poly.bbox()
    return Rect(Point(x0, y0), x1 - x0, y1 - y0)


def _segment_poly_params(a: Point, b: Point, poly: Polygon) -> list[float]:
    """Parameters t in [0,1] where segment a->b meets the polygon boundary."""
    ts: list[float] = []
    abx, aby = b.x - a.x, b.y - a.y
    seg_len = math.hypot(abx, aby)
    for c, d in poly.edges():
        cdx, cdy = d.x - c.x, d.y - c.y
        denom = abx * cdy - aby * cdx
        scale = seg_len * math.hypot(cdx, cdy)
        if abs(denom) > 1e-12 * max(scale, 1e-300):
            acx, acy = c.x - a.x, c.y - a.y
            t = (acx * cdy - acy * cdx) / denom
            u = (acx * aby - acy * abx) / denom
            if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
                ts.append(min(1.0, max(0.0, t)))
        else:
            # parallel; if collinear, project the edge endpoints onto the segment
            if abs(_cross(a.x, a.y, b.x, b.y, c.x, c.y)) <= 1e-12 * max(seg_len * seg_len, 1e-300):
                denom2 = abx * abx + aby * aby
                if denom2 > 0:
                    for e in (c, d):
                        t = ((e.x - a.x) * abx + (e.y - a.y) * aby) / denom2
                        if -1e-12 <= t <= 1 + 1e-12:
                            ts.append(min(1.0, max(0.0, t)))
    return ts


def segment_blocked(a: Point, b: Point, obstacles: Sequence[Polygon]) -> bool:
    """True iff the open segment (a, b) passes through any obstacle interior.

    Touching a vertex or sliding along an edge does not block. Decided by
    splitting the segment at every boundary crossing and classifying the
    midpoint of each piece.
    """
    if a.x == b.x and a.y == b.y:
        return False
    x0, x1 = min(a.x, b.x), max(a.x, b.x)
    y0, y1 = min(a.y, b.y), max(a.y, b.y)
    for poly in obstacles:
        bx0, by0, bx1, by1 = poly.bbox()
        if x1 < bx0 - TOL or x0 > bx1 + TOL or y1 < by0 - TOL or y0 > by1 + TOL:
            continue
        ts = sorted(set([0.0, 1.0] + _segment_poly_params(a, b, poly)))
        for lo, hi in zip(ts, ts[1:]):
            if hi - lo < 1e-12:
                continue
            mid = 0.5 * (lo + hi)
            pt = Point(a.x + mid * (b.x - a.x), a.y + mid * (b.y - a.y))
            if contains(poly, pt) is Containment.INSIDE:
                return True
    return False
