"""Command-line interface: scene ingestion, solving, verification, rendering.

Exit codes: 0 ok, 2 scene parse error, 3 degenerate geometry, 4 target
accuracy outside its window, 5 subdivision count too small to converge,
6 no route exists.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import oracle, refine
from .errors import (
    AllCandidatesSkipped,
    AllCollinear,
    AllPointsBlocked,
    EndpointInObstacle,
    EpsilonOutOfRange,
    GeometryError,
    NoPath,
    ResolutionTooCoarse,
    SceneFormatError,
    SiteOutsideGrid,
    StarRouteError,
    SubdivisionTooSmall,
)
from .geom import SQRT2, Point, convex_hull, enclosing_rect
from .median import WeightedSite, objective as plain_objective, weiszfeld_solve
from .obstacles import build_masked_grid, geodesic, solve_obstacles
from .render import manifold_figure, save_svg, scene_figure
from .result import SolveResult
from .scenefile import (
    SceneFile,
    dump_json,
    load_scene,
    result_to_dict,
)
from .weighted import (
    astar_cost,
    build_weight_grid,
    scene_rect,
    solve_weighted,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_GEOMETRY = 3
EXIT_EPSILON = 4
EXIT_SUBDIVISION = 5
EXIT_NO_PATH = 6

DEFAULT_WEISZFELD_TOL = 1e-9


def _hull_points(scene: SceneFile) -> list[Point]:
    pts = list(scene.site_points())
    if scene.kind == "obstacles":
        for ring in scene.obstacles:
            pts.extend(Point(x, y) for x, y in ring)
    return pts


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("STAR_ROUTE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def cmd_hull(args) -> int:
    scene = load_scene(args.scene)
    try:
        hull = convex_hull(_hull_points(scene))
    except AllCollinear as exc:
        raise AllCollinear("collinear sites") from exc
    print(json.dumps([[p.x, p.y] for p in hull.vertices]))
    return EXIT_OK


def _solve_plain(scene: SceneFile, tol: float) -> SolveResult:
    sites = [WeightedSite(p, 1.0) for p in scene.site_points()]
    res = weiszfeld_solve(sites, tol=tol)
    return SolveResult(
        q=res.q,
        objective=plain_objective(res.q, sites),
        iterations=res.iterations,
        accuracy_bound=tol,
        s_c=0,
        mode="plain",
        trace=(),
    )


def _dispatch_solve(scene: SceneFile, args) -> SolveResult:
    if scene.kind == "plain":
        tol = args.epsilon if args.epsilon is not None else DEFAULT_WEISZFELD_TOL
        return _solve_plain(scene, tol)
    epsilon = args.epsilon if args.epsilon is not None else 0.25 * args.n1
    if scene.kind == "weighted":
        return solve_weighted(
            scene.to_weighted_scene(),
            n1=args.n1,
            epsilon=epsilon,
            mode=args.mode,
            handoff_enabled=args.handoff,
            threads=_threads(args),
        )
    return solve_obstacles(scene.to_obstacle_scene(), n=args.n1, epsilon=epsilon,
                           threads=_threads(args))


def _solve_routes(scene: SceneFile, result: SolveResult, n1: float) -> list[list[Point]]:
    q = result.q
    if scene.kind == "plain":
        return [[q, p] for p in scene.site_points()]
    if scene.kind == "obstacles":
        obst = scene.to_obstacle_scene()
        return [list(geodesic(q, site, obst).waypoints) for site in obst.sites]
    wscene = scene.to_weighted_scene()
    grid = build_weight_grid(wscene, refine.base_grid(scene_rect(wscene, n1), n1))
    spec = grid.spec
    start = _nearest(spec, q)
    routes = []
    for i, site in enumerate(wscene.sites):
        _, path = astar_cost(grid, start, grid.site_index[i])
        pts = [q] + [spec.node_point(k) for k in path] + [site]
        routes.append([p for j, p in enumerate(pts) if j == 0 or p.distance(pts[j - 1]) > 1e-12])
    return routes


def _nearest(spec, p: Point) -> int:
    col = min(max(round((p.x - spec.origin.x) / spec.cell_side - 0.5), 0), spec.cols - 1)
    row = min(max(round((p.y - spec.origin.y) / spec.cell_side - 0.5), 0), spec.rows - 1)
    return int(row) * spec.cols + int(col)


def _scene_svg(scene: SceneFile, result: SolveResult, args, path: str) -> None:
    hull = None
    try:
        hull = convex_hull(_hull_points(scene))
    except GeometryError:
        pass
    grid_lines = None
    regions: list = []
    obst: list = []
    if scene.kind == "weighted":
        wscene = scene.to_weighted_scene()
        regions = list(wscene.regions)
        spec = refine.base_grid(scene_rect(wscene, args.n1), args.n1)
        grid_lines = (
            spec.origin.x + np.arange(spec.cols + 1) * spec.cell_side,
            spec.origin.y + np.arange(spec.rows + 1) * spec.cell_side,
        )
    elif scene.kind == "obstacles":
        oscene = scene.to_obstacle_scene()
        obst = list(oscene.obstacles)
        spec = build_masked_grid(oscene, args.n1).spec
        grid_lines = (
            spec.origin.x + np.arange(spec.cols + 1) * spec.cell_side,
            spec.origin.y + np.arange(spec.rows + 1) * spec.cell_side,
        )
    fig = scene_figure(
        sites=scene.site_points(),
        regions=regions,
        obstacles=obst,
        hull=hull,
        grid_lines=grid_lines,
        center=result.q,
        routes=_solve_routes(scene, result, args.n1),
        title=f"{scene.kind} scene: center at ({result.q.x:.4g}, {result.q.y:.4g})",
    )
    save_svg(fig, path)


def cmd_solve(args) -> int:
    t0 = time.perf_counter()
    scene = load_scene(args.scene)
    t_parse = time.perf_counter()
    result = _dispatch_solve(scene, args)
    t_solve = time.perf_counter()
    if args.svg:
        _scene_svg(scene, result, args, args.svg)
    t_render = time.perf_counter()
    timing = {
        "parse": (t_parse - t0) * 1e3,
        "solve": (t_solve - t_parse) * 1e3,
        "render": (t_render - t_solve) * 1e3,
        "total": (time.perf_counter() - t0) * 1e3,
    }
    payload = dump_json(result_to_dict(result, timing))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return EXIT_OK


def _verify_slack(scene: SceneFile, n1: float, resolution: float) -> float:
    """Lipschitz allowance for comparing solver and oracle objectives.

    Moving a path endpoint by d changes a star term by at most w_max*d*sqrt(2)
    in the lattice metric (and d in the geodesic metric); both the solver
    (site snapping, pitch n1) and the oracle (argmin transfer, pitch
    `resolution`) displace endpoints by at most one cell.
    """
    n_sites = len(scene.sites)
    if scene.kind == "weighted":
        w_max = max([w for _, w in scene.regions] + [scene.default_weight])
        return n_sites * w_max * SQRT2 * (n1 + resolution)
    if scene.kind == "obstacles":
        return n_sites * SQRT2 * (n1 + resolution)
    return n_sites * SQRT2 * resolution


def cmd_verify(args) -> int:
    scene = load_scene(args.scene)
    resolution = args.resolution if args.resolution is not None else args.n1 / 8.0
    result = _dispatch_solve(scene, args)
    if scene.kind == "weighted":
        orc = oracle.dense_weighted_min(scene.to_weighted_scene(), resolution)
    elif scene.kind == "obstacles":
        orc = oracle.dense_obstacle_min(scene.to_obstacle_scene(), resolution)
    else:
        orc = oracle.dense_plain_min(list(scene.site_points()), resolution)
    slack = _verify_slack(scene, args.n1, resolution)
    gap = result.objective - orc.objective
    ok = gap <= result.accuracy_bound + slack
    rows = [
        ("kind", scene.kind),
        ("solver_q", f"{result.q.x!r},{result.q.y!r}"),
        ("solver_objective", repr(result.objective)),
        ("oracle_q", f"{orc.q.x!r},{orc.q.y!r}"),
        ("oracle_objective", repr(orc.objective)),
        ("gap", repr(gap)),
        ("accuracy_bound", repr(result.accuracy_bound)),
        ("oracle_slack", repr(slack)),
        ("resolution", repr(resolution)),
        ("verdict", "PASS" if ok else "FAIL"),
    ]
    for key, value in rows:
        print(f"{key}\t{value}")
    return EXIT_OK if ok else 1


def cmd_manifold(args) -> int:
    scene = load_scene(args.scene)
    sites = list(scene.site_points())
    if args.resolution is not None:
        resolution = args.resolution
    else:
        rect = enclosing_rect(convex_hull(_hull_points(scene)))
        resolution = max(rect.l, rect.m) / 120.0
    if scene.kind == "weighted":
        spec, star = oracle.weighted_star_field(scene.to_weighted_scene(), resolution)
    elif scene.kind == "obstacles":
        spec, star = oracle.obstacle_star_field(scene.to_obstacle_scene(), resolution)
        if np.isnan(star).all():
            raise AllPointsBlocked("every manifold cell lies inside an obstacle")
    else:
        spec, star = oracle.plain_star_field(sites, resolution)

    masked = np.where(np.isnan(star), np.inf, star)
    if not np.isfinite(masked).any():
        raise NoPath("no manifold cell reaches every site")
    best = int(np.lexsort((np.arange(spec.node_count), masked))[0])
    best_pt = spec.node_point(best)

    hull = None
    try:
        hull = convex_hull(_hull_points(scene))
    except GeometryError:
        pass
    xs = spec.origin.x + (np.arange(spec.cols) + 0.5) * spec.cell_side
    ys = spec.origin.y + (np.arange(spec.rows) + 0.5) * spec.cell_side
    values = np.where(np.isfinite(star), star, np.nan).reshape(spec.rows, spec.cols)
    fig = manifold_figure(xs, ys, values, sites, hull,
                          title=f"{scene.kind} objective manifold")
    save_svg(fig, args.svg)
    print(dump_json({
        "argmin": [best_pt.x, best_pt.y],
        "objective": float(masked[best]),
        "resolution": resolution,
        "cells": [spec.cols, spec.rows],
        "svg": args.svg,
    }), end="")
    return EXIT_OK


def _add_common_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n1", type=float, default=1.0,
                   help="base lattice pitch (default 1.0; plain scenes ignore it)")
    p.add_argument("--epsilon", type=float, default=None,
                   help="target accuracy in (0, 2*n1*sqrt(2)] (default 0.25*n1); "
                        "plain scenes use it as the iteration displacement tolerance")
    p.add_argument("--mode", choices=("full", "anchored"), default="full",
                   help="candidate pricing at refinement levels (weighted scenes)")
    p.add_argument("--handoff", action=argparse.BooleanOptionalAction, default=False,
                   help="switch to Weiszfeld iteration on the 8 anchor nodes once "
                        "the refinement square carries a single weight")
    p.add_argument("--threads", type=int, default=None,
                   help="parallel candidate evaluations (default: STAR_ROUTE_THREADS or 1); "
                        "results are identical for any thread count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="star-route",
        description="Locate the central node minimizing total connection cost to N sites. "
                    "Coordinates are unitless lengths; keep scenes within O(1)-O(1e3) "
                    "for the 1e-9 geometric tolerances to be meaningful.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_hull = sub.add_parser("hull", help="print the scene's convex hull vertices as JSON")
    p_hull.add_argument("scene")
    p_hull.set_defaults(func=cmd_hull)

    p_solve = sub.add_parser(
        "solve",
        help="solve a scene and emit a result JSON",
        epilog="Sites are snapped to the base cell containing them; a site "
               "exactly on a shared cell edge or corner goes to the lowest "
               "row-major cell (deterministic, not random), so repeated runs "
               "are byte-identical.",
    )
    p_solve.add_argument("scene")
    _add_common_solver_flags(p_solve)
    p_solve.add_argument("--out", help="write the result JSON here (default: stdout)")
    p_solve.add_argument("--svg", help="also render the scene + solution to this SVG file")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser(
        "verify", help="compare the solver against the exhaustive dense-grid oracle (TSV report)"
    )
    p_verify.add_argument("scene")
    _add_common_solver_flags(p_verify)
    p_verify.add_argument("--resolution", type=float, default=None,
                          help="oracle lattice pitch (default n1/8)")
    p_verify.set_defaults(func=cmd_verify)

    p_manifold = sub.add_parser(
        "manifold", help="render the total-cost heatmap over the scene as SVG"
    )
    p_manifold.add_argument("scene")
    p_manifold.add_argument("--resolution", type=float, default=None,
                            help="heatmap lattice pitch (default: bbox max side / 120)")
    p_manifold.add_argument("--svg", required=True, help="output SVG path")
    p_manifold.set_defaults(func=cmd_manifold)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SceneFormatError as exc:
        print(f"scene error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EpsilonOutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EPSILON
    except SubdivisionTooSmall as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SUBDIVISION
    except (NoPath, EndpointInObstacle, AllCandidatesSkipped, AllPointsBlocked) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except (GeometryError, SiteOutsideGrid, ResolutionTooCoarse, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except StarRouteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
