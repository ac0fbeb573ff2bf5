"""Shared random-scene generators (seeded per test for reproducibility)."""
import random

from starroute.geom import Containment, Point, Polygon, contains, convex_hull
from starroute.errors import AllCollinear, FewerThanThreePoints
from starroute.obstacles import ObstacleScene
from starroute.weighted import WeightedScene


def random_convex_polygon(rng: random.Random, cx: float, cy: float, radius: float,
                          k: int = 6) -> Polygon:
    while True:
        pts = [
            Point(cx + rng.uniform(-radius, radius), cy + rng.uniform(-radius, radius))
            for _ in range(k)
        ]
        try:
            return convex_hull(pts)
        except (FewerThanThreePoints, AllCollinear):
            continue


def spread_sites(rng: random.Random, n: int, box: float = 6.0,
                 min_spread: float = 3.2) -> tuple[Point, ...]:
    """Sites spanning at least min_spread per axis with a genuinely
    two-dimensional hull (not a sliver), so a unit base grid has enough
    cells for the subdivision count to reach 3 and hull-confinement
    statements are well posed."""
    while True:
        sites = tuple(Point(rng.uniform(0.0, box), rng.uniform(0.0, box)) for _ in range(n))
        xs = [p.x for p in sites]
        ys = [p.y for p in sites]
        w, h = max(xs) - min(xs), max(ys) - min(ys)
        if w <= min_spread or h <= min_spread:
            continue
        try:
            hull = convex_hull(sites)
        except AllCollinear:
            continue
        if hull.signed_area() >= 0.15 * w * h:
            return sites


def random_weighted_scene(rng: random.Random, max_sites: int = 6,
                          max_regions: int = 3) -> WeightedScene:
    sites = spread_sites(rng, rng.randint(3, max_sites))
    regions = tuple(
        (
            random_convex_polygon(rng, rng.uniform(1.0, 5.0), rng.uniform(1.0, 5.0),
                                  rng.uniform(0.8, 2.2)),
            rng.uniform(0.5, 3.0),
        )
        for _ in range(rng.randint(0, max_regions))
    )
    return WeightedScene(sites, regions)


def random_obstacle_scene(rng: random.Random, max_sites: int = 6,
                          max_obstacles: int = 2) -> ObstacleScene:
    while True:
        sites = spread_sites(rng, rng.randint(3, max_sites))
        obstacles = tuple(
            random_convex_polygon(rng, rng.uniform(2.0, 4.0), rng.uniform(2.0, 4.0),
                                  rng.uniform(0.5, 1.2))
            for _ in range(rng.randint(1, max_obstacles))
        )
        if not any(
            contains(poly, s) is Containment.INSIDE for poly in obstacles for s in sites
        ):
            return ObstacleScene(sites, obstacles)
