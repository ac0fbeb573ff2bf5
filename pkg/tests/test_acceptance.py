"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
report. Every tolerance is pinned here; none defers to calibration.
"""
import json
import math
import random
import time

import numpy as np
import pytest

from conftest import (
    random_convex_polygon,
    random_obstacle_scene,
    random_weighted_scene,
    spread_sites,
)
from starroute import cli
from starroute.errors import SubdivisionTooSmall
from starroute.geom import (
    Containment,
    Point,
    Polygon,
    SQRT2,
    boundary_distance,
    contains,
    convex_hull,
)
from starroute.median import WeightedSite, weiszfeld_solve
from starroute.obstacles import ObstacleScene, geodesic, solve_obstacles
from starroute.oracle import (
    dense_obstacle_min,
    dense_weighted_min,
    grid_geodesic_length,
    reference_dijkstra,
)
from starroute.refine import (
    GridSpec,
    Schedule,
    iterations_needed,
    max_inaccuracy,
    next_side,
)
from starroute.scenefile import strip_timing
from starroute.weighted import WeightGrid, WeightedScene, astar_cost, solve_weighted


def _report(num: int, message: str) -> None:
    print(f"\n[criterion {num:2d}] PASS: {message}")


def _dilated_hull_contains(hull: Polygon, q: Point, dilation: float) -> bool:
    if contains(hull, q) is not Containment.OUTSIDE:
        return True
    return boundary_distance(hull, q) <= dilation


def test_criterion_01_iteration_formula():
    start = time.perf_counter()
    rng = random.Random(101)
    for _ in range(1000):
        s_c = rng.randint(3, 9)
        n1 = rng.uniform(0.05, 8.0)
        eps = math.exp(rng.uniform(math.log(1e-6), math.log(2 * SQRT2 * 0.999999))) * n1
        semantic = 1
        while max_inaccuracy(semantic, n1, s_c) > eps:
            semantic += 1
        assert iterations_needed(eps, n1, s_c) == semantic
    for n1 in (0.3, 1.0, 2.5):
        assert iterations_needed(2 * n1 * SQRT2, n1, 4) == 1
    assert iterations_needed(0.01, 1.0, 4) == 10
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    _report(1, f"closed-form level count matches the brute-force schedule oracle "
               f"on 1000 draws plus pinned boundary cases ({elapsed:.2f}s)")


def test_criterion_02_inaccuracy_schedule():
    checked = 0
    for s_c in range(3, 9):
        box = float(s_c)
        sites = (
            Point(0.01, 0.01), Point(box - 0.01, 0.01),
            Point(box - 0.01, box - 0.01), Point(0.01, box - 0.01),
        )
        eps = max_inaccuracy(12, 1.0, s_c) * 1.000001
        res = solve_weighted(WeightedScene(sites), n1=1.0, epsilon=eps)
        assert res.s_c == s_c
        assert res.iterations == 12
        for row in res.trace[1:]:
            realized = row.square_side * SQRT2
            expected = max_inaccuracy(row.level, 1.0, s_c)
            assert abs(realized - expected) <= 1e-9 * expected
            checked += 1
        assert res.trace[-1].square_side * SQRT2 <= eps
        assert res.accuracy_bound <= eps
    assert checked == 6 * 12
    _report(2, "live-solve square diameters reproduce 2^i*n*sqrt(2)/s_c^(i-1) "
               "for i<=12, s_c in 3..8, and the final level meets epsilon")


def test_criterion_03_non_convergence_guard():
    for fn in (lambda: next_side(1.0, 2),
               lambda: iterations_needed(0.1, 1.0, 2),
               lambda: Schedule(1.0, 2, 0.1, 3)):
        with pytest.raises(SubdivisionTooSmall):
            fn()
    scene = WeightedScene((Point(0.1, 0.1), Point(1.9, 0.1), Point(1.9, 1.9), Point(0.1, 1.9)))
    with pytest.raises(SubdivisionTooSmall):
        solve_weighted(scene, 1.0, 0.5)
    for n1 in (0.5, 1.0, 3.0):
        expected = 2.0 * n1 * SQRT2
        for i in range(1, 51):
            assert max_inaccuracy(i, n1, 2) == expected  # exact: powers of two
    _report(3, "subdivision count 2 is rejected everywhere and its inaccuracy "
               "bound is exactly constant across 50 levels")


def test_criterion_04_astar_equals_dijkstra():
    start = time.perf_counter()
    rng = random.Random(104)
    pairs_checked = 0
    for _ in range(50):
        cols = rng.randint(8, 30)
        rows = rng.randint(8, 30)
        spec = GridSpec(Point(0, 0), rng.uniform(0.4, 2.0), cols, rows)
        weights = np.array([rng.uniform(0.3, 4.0) for _ in range(spec.node_count)])
        grid = WeightGrid(spec, weights, {})
        for _ in range(5):
            src = rng.randrange(spec.node_count)
            dist = reference_dijkstra(grid, src)
            for _ in range(10):
                dst = rng.randrange(spec.node_count)
                cost, _ = astar_cost(grid, src, dst)
                assert cost == dist[dst]
                pairs_checked += 1
    elapsed = time.perf_counter() - start
    assert pairs_checked == 2500
    assert elapsed < 10.0
    _report(4, f"A* cost equals reference Dijkstra exactly on 2500 pairs over "
               f"50 random weighted grids ({elapsed:.1f}s)")


def _interior_median_scene(rng, clearance=0.8):
    # The lattice metric over-prices off-axis directions by up to 8.2%,
    # which can push the discrete argmin off a hull whose true optimum sits
    # on the boundary (e.g. obtuse triangles, whose Fermat point is a
    # vertex). Confinement is only well posed when the optimum has interior
    # clearance, so condition the draw on it.
    while True:
        scene = random_weighted_scene(rng)
        hull = convex_hull(scene.sites)
        med = weiszfeld_solve([WeightedSite(p, 1.0) for p in scene.sites]).q
        if contains(hull, med) is Containment.INSIDE and boundary_distance(hull, med) >= clearance:
            return scene


def test_criterion_05_hull_confinement():
    start = time.perf_counter()
    rng = random.Random(105)

    for _ in range(100):  # plain
        sites = spread_sites(rng, rng.randint(3, 8))
        hull = convex_hull(sites)
        q = weiszfeld_solve([WeightedSite(p, 1.0) for p in sites]).q
        assert contains(hull, q) is not Containment.OUTSIDE

    for _ in range(100):  # weighted terrain
        scene = _interior_median_scene(rng)
        res = solve_weighted(scene, 1.0, 0.5)
        pts = list(scene.sites)
        for poly, _ in scene.regions:
            pts.extend(poly.vertices)
        hull = convex_hull(pts)
        dilation = res.trace[-1].square_side / res.s_c * SQRT2
        assert _dilated_hull_contains(hull, res.q, dilation)

    for _ in range(100):  # obstacles
        scene = random_obstacle_scene(rng)
        res = solve_obstacles(scene, 1.0, 0.5)
        hull = convex_hull(scene.hull_points())
        dilation = res.trace[-1].square_side / res.s_c * SQRT2
        assert _dilated_hull_contains(hull, res.q, dilation)

    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    _report(5, f"solver output stays in the relevant hull (dilated by one "
               f"final-level cell diagonal) on 100 scenes per regime ({elapsed:.0f}s)")


def test_criterion_06_plain_plane_equivalence():
    rng = random.Random(106)

    for _ in range(25):  # obstacle-free scenes, tight epsilon
        sites = spread_sites(rng, rng.randint(3, 10))
        eps = 0.05
        res = solve_obstacles(ObstacleScene(sites), 1.0, eps)
        ref = weiszfeld_solve([WeightedSite(p, 1.0) for p in sites]).q
        assert res.q.distance(ref) <= eps + 1e-6

    for _ in range(25):  # uniform-weight scenes; the lattice metric is an
        # octile approximation of Euclidean distance, so epsilon sits at
        # grid scale (n1*sqrt(2)) where the equivalence genuinely holds
        sites = spread_sites(rng, rng.randint(3, 10))
        n1 = 1.5
        eps = n1 * SQRT2
        res = solve_weighted(WeightedScene(sites), n1, eps)
        ref = weiszfeld_solve([WeightedSite(p, 1.0) for p in sites]).q
        assert res.q.distance(ref) <= eps + 1e-6

    _report(6, "obstacle-free and uniform-weight solves match Weiszfeld within "
               "epsilon + 1e-6 on 50 random 3-10 site scenes")


def test_criterion_07_weiszfeld_correctness():
    sites = [WeightedSite(Point(0, 0), 1.0), WeightedSite(Point(2, 0), 1.0),
             WeightedSite(Point(1, math.sqrt(3)), 1.0)]
    res = weiszfeld_solve(sites, tol=1e-9)
    assert res.q.distance(Point(1.0, math.sqrt(3) / 3)) < 1e-6

    rng = random.Random(107)
    for _ in range(1000):
        inst = [
            WeightedSite(Point(rng.uniform(-5, 5), rng.uniform(-5, 5)), rng.uniform(0.1, 3))
            for _ in range(rng.randint(2, 7))
        ]
        trace = weiszfeld_solve(inst, tol=1e-7, max_iter=50, record_trace=True).trace
        for (_, _, a), (_, _, b) in zip(trace, trace[1:]):
            assert b <= a + 1e-12

    for _ in range(20):
        inst = [
            WeightedSite(Point(rng.uniform(0, 4), rng.uniform(0, 4)), rng.uniform(0.2, 3))
            for _ in range(rng.randint(3, 7))
        ]
        q = weiszfeld_solve(inst, tol=1e-10).q
        n = 400
        xs = np.linspace(-0.5, 4.5, n)
        ys = np.linspace(-0.5, 4.5, n)
        gx, gy = np.meshgrid(xs, ys)
        total = np.zeros_like(gx)
        for s in inst:
            total += s.weight * np.hypot(gx - s.position.x, gy - s.position.y)
        j, i = np.unravel_index(np.argmin(total), total.shape)
        cell = 5.0 / (n - 1)
        assert abs(q.x - xs[i]) <= cell and abs(q.y - ys[j]) <= cell

    _report(7, "equilateral median = centroid (1e-6); 1000 monotone-descent "
               "instances; 20 dense-grid argmin agreements within one cell")


def test_criterion_08_geodesic_correctness():
    rng = random.Random(108)
    for _ in range(20):  # unobstructed pairs are exactly straight
        a = Point(rng.uniform(-5, 5), rng.uniform(-5, 5))
        b = Point(rng.uniform(-5, 5), rng.uniform(-5, 5))
        scene = ObstacleScene((a, b))
        assert geodesic(a, b, scene).length == a.distance(b)

    square = Polygon((Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)))
    scene = ObstacleScene((Point(-1, 0.5), Point(2, 0.5)), (square,))
    got = geodesic(Point(-1, 0.5), Point(2, 0.5), scene).length
    assert abs(got - (1 + 2 * math.sqrt(1.25))) < 1e-9

    pitch = 0.12
    for _ in range(20):
        obst = random_convex_polygon(rng, rng.uniform(2, 4), rng.uniform(2, 4), 1.0)
        while True:
            a = Point(rng.uniform(0, 6), rng.uniform(0, 6))
            b = Point(rng.uniform(0, 6), rng.uniform(0, 6))
            if (contains(obst, a) is Containment.OUTSIDE
                    and contains(obst, b) is Containment.OUTSIDE
                    and a.distance(b) > 1.0):
                break
        sc = ObstacleScene((a, b), (obst,))
        exact = geodesic(a, b, sc).length
        approx = grid_geodesic_length(a, b, sc, pitch)
        assert abs(exact - approx) <= 0.03 * exact + 2 * pitch

    _report(8, "straight-line exactness, the hand-computed 1 + 2*sqrt(1.25) "
               "detour (1e-9), and 20 lattice-oracle agreements at 3% + 2h")


def test_criterion_09_end_to_end_oracle_gap():
    start = time.perf_counter()
    rng = random.Random(109)
    n1, eps, resolution = 1.0, 0.4, 0.125

    for _ in range(20):
        scene = random_weighted_scene(rng, max_sites=6, max_regions=3)
        res = solve_weighted(scene, n1, eps)
        orc = dense_weighted_min(scene, resolution)
        w_max = scene.weight_bounds()[1]
        slack = len(scene.sites) * w_max * SQRT2 * (n1 + resolution)
        assert res.objective <= orc.objective + res.accuracy_bound + slack

    for _ in range(20):
        scene = random_obstacle_scene(rng, max_sites=6, max_obstacles=3)
        res = solve_obstacles(scene, n1, eps)
        orc = dense_obstacle_min(scene, resolution)
        slack = len(scene.sites) * SQRT2 * (n1 + resolution)
        assert res.objective <= orc.objective + res.accuracy_bound + slack

    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    _report(9, f"solver objective within oracle + guaranteed bound + Lipschitz "
               f"slack on 20 weighted and 20 obstacle scenes ({elapsed:.0f}s)")


def test_criterion_10_candidate_count_bound():
    corners = (Point(0, 0), Point(4, 0), Point(4, 4), Point(0, 4))
    obst = Polygon((Point(1.5, 1.5), Point(2.5, 1.5), Point(2.5, 2.5), Point(1.5, 2.5)))
    res = solve_obstacles(ObstacleScene(corners, (obst,)), 1.0, 0.05)
    assert res.s_c == 4  # r = 16 kept squares
    assert res.iterations >= 5
    for row in res.trace[1:]:
        assert row.candidates == 16  # skipped candidates included

    rng = random.Random(110)
    scene = random_weighted_scene(rng)
    wres = solve_weighted(scene, 1.0, 0.3)
    for row in wres.trace[1:]:
        assert row.candidates == wres.s_c ** 2

    _report(10, "every refinement level tallies exactly s_c^2 candidate "
                "evaluations (16 at s_c = 4), skipped ones included")


def test_criterion_11_determinism(tmp_path):
    scenes = {
        "banded.json": {
            "version": 1, "kind": "weighted",
            "sites": [[0.4, 0.5], [6.4, 0.8], [5.9, 5.2], [0.8, 5.7]],
            "regions": [{"polygon": [[2.0, -0.5], [4.5, -0.5], [4.5, 6.5], [2.0, 6.5]],
                         "weight": 3.0}],
            "default_weight": 1.0,
        },
        "blocked.json": {
            "version": 1, "kind": "obstacles",
            "sites": [[0.0, 0.0], [6.0, 0.0], [6.0, 6.0], [0.0, 6.0]],
            "obstacles": [{"polygon": [[2.4, 2.4], [3.6, 2.4], [3.6, 3.6], [2.4, 3.6]]}],
        },
    }
    for name, data in scenes.items():
        scene_path = tmp_path / name
        scene_path.write_text(json.dumps(data))
        canonical = []
        for run, threads in enumerate(("1", "4", "1", "4")):
            out = tmp_path / f"{name}.{run}.json"
            rc = cli.main(["solve", str(scene_path), "--epsilon", "0.3",
                           "--threads", threads, "--out", str(out)])
            assert rc == 0
            payload = json.dumps(strip_timing(json.loads(out.read_text())), sort_keys=True)
            canonical.append(payload.encode())
        assert len(set(canonical)) == 1
    _report(11, "repeated runs with --threads 1 and 4 emit byte-identical "
                "result files once timing fields are stripped")


def test_criterion_12_figure_anchor_case(tmp_path, capsys):
    coords = {
        "NW": (-1, 1), "N": (0, 1), "NE": (1, 1), "W": (-1, 0),
        "E": (1, 0), "SW": (-1, -1), "S": (0, -1), "SE": (1, -1),
    }
    clockwise_from_nw = ("NW", "N", "NE", "E", "SE", "S", "SW", "W")
    weights = dict(zip(clockwise_from_nw, (1, 0, 1, 2, 4, 2, 1, 2)))
    anchor_sites = [
        WeightedSite(Point(*coords[k]), float(weights[k])) for k in coords if weights[k] > 0
    ]
    res = weiszfeld_solve(anchor_sites, tol=1e-12)
    assert res.converged
    assert -1 <= res.q.x <= 1 and -1 <= res.q.y <= 1  # inside the anchor square

    # the same configuration as a plain scene: each anchor replicated by its
    # weight, fed to the manifold renderer
    sites = []
    for k in coords:
        sites += [list(coords[k])] * weights[k]
    scene_path = tmp_path / "anchors.json"
    scene_path.write_text(json.dumps({"version": 1, "kind": "plain", "sites": sites}))
    svg = tmp_path / "anchors.svg"
    rc = cli.main(["manifold", str(scene_path), "--svg", str(svg), "--resolution", "0.07"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    ax, ay = out["argmin"]
    assert abs(res.q.x - ax) <= 0.07 / 2 and abs(res.q.y - ay) <= 0.07 / 2
    assert svg.exists()
    _report(12, "the weighted 8-anchor iteration converges inside its square "
                "and the manifold argmin cell contains the fixed point")
