"""Star-topology solver among polygonal obstacles.

Connection cost is exact Euclidean shortest-path length avoiding obstacle
interiors, computed on the visibility graph of the obstacle vertices. The
search grid covers the convex hull of sites and obstacles; partially
covered border cells are reformed into full squares, obstacle-voided
cells stay in the square count but are never evaluated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from heapq import heappop, heappush

import numpy as np

from . import refine
from .errors import (
    AllCandidatesSkipped,
    CellLargerThanHull,
    EndpointInObstacle,
    NoPath,
)
from .geom import (
    Containment,
    Point,
    Polygon,
    contains,
    convex_hull,
    enclosing_rect,
    segment_blocked,
)
from .refine import GridSpec
from .result import SolveResult, TraceRow
from .weighted import _map_maybe_parallel


@dataclass(frozen=True)
class ObstacleScene:
    """Sites plus obstacles whose open interiors paths may not cross."""

    sites: tuple[Point, ...]
    obstacles: tuple[Polygon, ...] = ()

    def __post_init__(self):
        if not self.sites:
            raise ValueError("scene needs at least one site")
        for i, site in enumerate(self.sites):
            for j, poly in enumerate(self.obstacles):
                if contains(poly, site) is Containment.INSIDE:
                    raise ValueError(f"site {i} lies strictly inside obstacle {j}")

    def hull_points(self) -> list[Point]:
        pts = list(self.sites)
        for poly in self.obstacles:
            pts.extend(poly.vertices)
        return pts


class CellStatus(Enum):
    ACTIVE = "active"
    IN_OBSTACLE = "in_obstacle"
    EMPTY = "empty"


@dataclass(frozen=True)
class MaskedGrid:
    """Lattice over the hull bounding box with per-cell status.

    ``r`` counts cells with some part in the hull, obstacle-voided cells
    included; EMPTY cells fall entirely outside the hull and are never
    evaluated.
    """

    spec: GridSpec
    status: tuple[CellStatus, ...]
    r: int

    def active_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.status) if s is CellStatus.ACTIVE]


@dataclass(frozen=True)
class GeodesicPath:
    length: float
    waypoints: tuple[Point, ...]


def _cell_intersects_hull(hull: Polygon, x0: float, y0: float, side: float) -> bool:
    """Closed-set overlap test between an axis-aligned cell and a convex hull
    (separating-axis theorem; touching counts as intersecting)."""
    cell_x = (x0, x0 + side)
    cell_y = (y0, y0 + side)
    hx0, hy0, hx1, hy1 = hull.bbox()
    tol = 1e-9
    if cell_x[1] < hx0 - tol or cell_x[0] > hx1 + tol:
        return False
    if cell_y[1] < hy0 - tol or cell_y[0] > hy1 + tol:
        return False
    corners = (
        (cell_x[0], cell_y[0]),
        (cell_x[1], cell_y[0]),
        (cell_x[1], cell_y[1]),
        (cell_x[0], cell_y[1]),
    )
    for a, b in hull.edges():
        # outward normal of a CCW edge points right of the edge direction
        nx, ny = b.y - a.y, -(b.x - a.x)
        cell_min = min(cx * nx + cy * ny for cx, cy in corners)
        hull_max = max(p.x * nx + p.y * ny for p in hull.vertices)
        scale = math.hypot(nx, ny)
        if cell_min > hull_max + tol * scale:
            return False
    return True


def build_masked_grid(scene: ObstacleScene, n: float) -> MaskedGrid:
    """Lay a pitch-n lattice over the hull of sites and obstacle vertices.

    The lattice is anchored at the hull bounding box's lower-left corner;
    cells intersecting the hull are kept (partial cells keep their full
    square), and kept cells whose center falls strictly inside an obstacle
    are marked IN_OBSTACLE but still counted in r.
    """
    hull = convex_hull(scene.hull_points())
    rect = enclosing_rect(hull)
    if n > min(rect.l, rect.m):
        raise CellLargerThanHull(
            f"cell side {n} exceeds hull extents ({rect.l}, {rect.m})"
        )
    cols = math.ceil(rect.l / n)
    rows = math.ceil(rect.m / n)
    spec = GridSpec(rect.min_corner, n, cols, rows)
    status = []
    r = 0
    for idx in range(cols * rows):
        corner = spec.cell_corner(idx)
        if not _cell_intersects_hull(hull, corner.x, corner.y, n):
            status.append(CellStatus.EMPTY)
            continue
        r += 1
        center = spec.node_point(idx)
        voided = any(contains(poly, center) is Containment.INSIDE for poly in scene.obstacles)
        status.append(CellStatus.IN_OBSTACLE if voided else CellStatus.ACTIVE)
    return MaskedGrid(spec, tuple(status), r)


class GeodesicEngine:
    """Visibility graph over the obstacle vertices, reusable across queries."""

    def __init__(self, scene: ObstacleScene):
        self.scene = scene
        self.vertices: list[Point] = []
        for poly in scene.obstacles:
            self.vertices.extend(poly.vertices)
        n = len(self.vertices)
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if not segment_blocked(self.vertices[i], self.vertices[j], scene.obstacles):
                    d = self.vertices[i].distance(self.vertices[j])
                    self.adj[i].append((j, d))
                    self.adj[j].append((i, d))

    def check_endpoint(self, p: Point, what: str) -> None:
        for k, poly in enumerate(self.scene.obstacles):
            if contains(poly, p) is Containment.INSIDE:
                raise EndpointInObstacle(f"{what} {p.as_tuple()} lies inside obstacle {k}")

    def visible_vertices(self, p: Point) -> list[tuple[int, float]]:
        out = []
        for i, v in enumerate(self.vertices):
            if not segment_blocked(p, v, self.scene.obstacles):
                out.append((i, p.distance(v)))
        return out

    def path(self, a: Point, b: Point) -> GeodesicPath:
        """Shortest obstacle-avoiding polyline from a to b.

        Equal-length routes are broken by lexicographic comparison of the
        waypoint coordinate sequence.
        """
        self.check_endpoint(a, "start")
        self.check_endpoint(b, "goal")
        if a.x == b.x and a.y == b.y:
            return GeodesicPath(0.0, (a,))
        if not segment_blocked(a, b, self.scene.obstacles):
            return GeodesicPath(a.distance(b), (a, b))

        # nodes: 0..n-1 vertices, n = start, n+1 = goal
        n = len(self.vertices)
        start, goal = n, n + 1
        pts = self.vertices + [a, b]
        extra: dict[int, list[tuple[int, float]]] = {start: [], goal: []}
        for i, d in self.visible_vertices(a):
            extra[start].append((i, d))
        goal_edges: dict[int, float] = {}
        for i, d in self.visible_vertices(b):
            goal_edges[i] = d

        best: dict[int, tuple[float, tuple[tuple[float, float], ...]]] = {}
        start_key = ((a.x, a.y),)
        best[start] = (0.0, start_key)
        heap: list[tuple[float, tuple, int]] = [(0.0, start_key, start)]
        while heap:
            dist, path, node = heappop(heap)
            cur = best.get(node)
            if cur is None or (dist, path) > cur:
                continue
            if node == goal:
                return GeodesicPath(dist, tuple(Point(x, y) for x, y in path))
            if node == start:
                nbrs = list(extra[start])
            else:
                nbrs = list(self.adj[node])
                if node in goal_edges:
                    nbrs.append((goal, goal_edges[node]))
            for nb, step in nbrs:
                pt = pts[nb]
                cand = (dist + step, path + ((pt.x, pt.y),))
                known = best.get(nb)
                if known is None or cand < known:
                    best[nb] = cand
                    heappush(heap, (cand[0], cand[1], nb))
        raise NoPath(f"no route from {a.as_tuple()} to {b.as_tuple()}")

    def vertex_distances(self, p: Point) -> np.ndarray:
        """Geodesic distance from p to every obstacle vertex (inf when sealed)."""
        n = len(self.vertices)
        dist = np.full(n, np.inf)
        heap: list[tuple[float, int]] = []
        for i, d in self.visible_vertices(p):
            dist[i] = d
            heappush(heap, (d, i))
        done = np.zeros(n, dtype=bool)
        while heap:
            d, node = heappop(heap)
            if done[node]:
                continue
            done[node] = True
            for nb, step in self.adj[node]:
                cand = d + step
                if cand < dist[nb]:
                    dist[nb] = cand
                    heappush(heap, (cand, nb))
        return dist


@lru_cache(maxsize=8)
def _engine_for(scene: ObstacleScene) -> GeodesicEngine:
    return GeodesicEngine(scene)


def geodesic(a: Point, b: Point, scene: ObstacleScene) -> GeodesicPath:
    """Shortest obstacle-avoiding path; see GeodesicEngine.path."""
    return _engine_for(scene).path(a, b)


def star_geodesic_cost(center: Point, scene: ObstacleScene) -> float:
    """Sum of geodesic lengths from the center to every site."""
    engine = _engine_for(scene)
    total = 0.0
    unreachable: list[int] = []
    for j, site in enumerate(scene.sites):
        try:
            total += engine.path(center, site).length
        except NoPath:
            unreachable.append(j)
    if unreachable:
        raise NoPath(
            f"sites {unreachable} unreachable from {center.as_tuple()}",
            unreachable_sites=unreachable,
        )
    return total


def _child_fully_empty(grid: MaskedGrid, cx: float, cy: float, side: float) -> bool:
    """True when a candidate square overlaps no kept (non-EMPTY) cell."""
    spec = grid.spec
    n = spec.cell_side
    tol = 1e-9
    x0, x1 = cx - side / 2.0, cx + side / 2.0
    y0, y1 = cy - side / 2.0, cy + side / 2.0
    c0 = math.floor((x0 - spec.origin.x + tol) / n)
    c1 = math.ceil((x1 - spec.origin.x - tol) / n) - 1
    r0 = math.floor((y0 - spec.origin.y + tol) / n)
    r1 = math.ceil((y1 - spec.origin.y - tol) / n) - 1
    for row in range(max(r0, 0), min(r1, spec.rows - 1) + 1):
        for col in range(max(c0, 0), min(c1, spec.cols - 1) + 1):
            if grid.status[row * spec.cols + col] is not CellStatus.EMPTY:
                return False
    return True


def solve_obstacles(
    scene: ObstacleScene,
    n: float,
    epsilon: float,
    threads: int = 1,
) -> SolveResult:
    """Locate the point minimizing total geodesic distance to all sites.

    Scans every active base node, then refines a square around the
    incumbent; candidates inside obstacles or wholly in empty territory
    are skipped but still counted toward the per-level candidate tally.
    """
    refine.check_epsilon(epsilon, n)
    grid = build_masked_grid(scene, n)
    spec = grid.spec
    engine = _engine_for(scene)

    s_c = refine.subdivision_count_from_r(grid.r)
    schedule = refine.Schedule(n, s_c, epsilon, refine.iterations_needed(epsilon, n, s_c))

    active = grid.active_indices()
    if not active:
        raise AllCandidatesSkipped("every base cell is obstacle-voided")

    costs = _map_maybe_parallel(
        lambda idx: star_geodesic_cost(spec.node_point(idx), scene), active, threads
    )
    values = dict(zip(active, costs))
    best_idx = min(active, key=lambda i: (values[i], i))
    incumbent = spec.node_point(best_idx)
    incumbent_obj = values[best_idx]
    trace = [TraceRow(0, incumbent, incumbent_obj, n, grid.r)]

    n_cur = n
    for level in range(1, schedule.iterations + 1):
        square = refine.successor_square(incumbent, n_cur, level - 1)
        children = refine.subdivide(square, s_c)
        evaluated: list[tuple[float, int]] = []
        for i, (child_sq, center) in enumerate(children):
            if _child_fully_empty(grid, center.x, center.y, child_sq.side):
                continue
            if any(contains(poly, center) is Containment.INSIDE for poly in scene.obstacles):
                continue
            evaluated.append((star_geodesic_cost(center, scene), i))
        if not evaluated:
            raise AllCandidatesSkipped(
                f"all {len(children)} candidates at level {level} are blocked or empty"
            )
        best_cost, k = min(evaluated, key=lambda t: (t[0], t[1]))
        if best_cost < incumbent_obj:
            incumbent = children[k][1]
            incumbent_obj = best_cost
        trace.append(TraceRow(level, incumbent, incumbent_obj, square.side, len(children)))
        n_cur = refine.next_side(n_cur, s_c)

    return SolveResult(
        q=incumbent,
        objective=incumbent_obj,
        iterations=schedule.iterations,
        accuracy_bound=refine.max_inaccuracy(schedule.iterations, n, s_c),
        s_c=s_c,
        mode="full",
        trace=tuple(trace),
    )
