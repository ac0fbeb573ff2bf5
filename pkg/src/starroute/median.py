"""Weighted geometric median via Weiszfeld's fixed-point iteration.

Used standalone for plain scenes and as the terminal stage of the
weighted-regions solver once a refinement square carries one weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import CoincidesWithSite, EmptySites, NonPositiveTol
from .geom import Point

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class WeightedSite:
    position: Point
    weight: float

    def __post_init__(self):
        if not (self.weight >= 0.0 and math.isfinite(self.weight)):
            raise ValueError(f"site weight must be finite and >= 0, got {self.weight}")


class WeiszfeldResult(NamedTuple):
    q: Point
    iterations: int
    converged: bool
    trace: tuple[tuple[float, float, float], ...] = ()


def _active(sites: Sequence[WeightedSite]) -> list[WeightedSite]:
    if not sites:
        raise EmptySites("site list is empty")
    active = [s for s in sites if s.weight > 0.0]
    if not active:
        raise EmptySites("need at least one positive-weight site")
    return active


def objective(q: Point, sites: Sequence[WeightedSite]) -> float:
    """Weighted sum of Euclidean distances from q to the sites."""
    if not sites:
        raise EmptySites("site list is empty")
    total = 0.0
    for s in sites:
        if s.weight > 0.0:
            total += s.weight * q.distance(s.position)
    return total


def weiszfeld_step(q: Point, sites: Sequence[WeightedSite]) -> Point:
    """One inverse-distance-weighted averaging step.

    Raises CoincidesWithSite when q sits on a positive-weight site, where
    the update is singular; weiszfeld_solve resolves that case itself.
    """
    num_x = num_y = den = 0.0
    for s in _active(sites):
        d = q.distance(s.position)
        if d < 1e-150:
            raise CoincidesWithSite(f"iterate coincides with site at {s.position.as_tuple()}")
        w = s.weight / d
        num_x += w * s.position.x
        num_y += w * s.position.y
        den += w
    return Point(num_x / den, num_y / den)


def _resolve_at_site(site: Point, sites: Sequence[WeightedSite], tol: float) -> Point:
    # Snap to the site, then compare against one step taken from each of the
    # four axis-perturbed neighbors; keep whichever candidate scores best.
    best = site
    best_obj = objective(site, sites)
    for dx, dy in ((tol, 0.0), (-tol, 0.0), (0.0, tol), (0.0, -tol)):
        try:
            cand = weiszfeld_step(Point(site.x + dx, site.y + dy), sites)
        except CoincidesWithSite:
            continue
        cand_obj = objective(cand, sites)
        if cand_obj < best_obj:
            best, best_obj = cand, cand_obj
    return best


def weighted_centroid(sites: Sequence[WeightedSite]) -> Point:
    active = _active(sites)
    total = sum(s.weight for s in active)
    return Point(
        sum(s.weight * s.position.x for s in active) / total,
        sum(s.weight * s.position.y for s in active) / total,
    )


def weiszfeld_solve(
    sites: Sequence[WeightedSite],
    q0: Point | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    record_trace: bool = False,
) -> WeiszfeldResult:
    """Iterate to the weighted geometric median.

    Stops when the step displacement drops below ``tol`` or after
    ``max_iter`` steps. An iterate landing within ``tol`` of a site is
    resolved deterministically by snap-and-perturb comparison.
    """
    if tol <= 0:
        raise NonPositiveTol(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    active = _active(sites)
    q = weighted_centroid(sites) if q0 is None else q0
    trace: list[tuple[float, float, float]] = []

    def log(pt: Point):
        if record_trace:
            trace.append((pt.x, pt.y, objective(pt, sites)))

    log(q)
    for i in range(max_iter):
        near = next((s for s in active if q.distance(s.position) <= tol), None)
        if near is not None:
            q = _resolve_at_site(near.position, sites, tol)
            log(q)
            return WeiszfeldResult(q, i, True, tuple(trace))
        q_next = weiszfeld_step(q, sites)
        moved = q.distance(q_next)
        q = q_next
        log(q)
        if moved < tol:
            return WeiszfeldResult(q, i + 1, True, tuple(trace))
    return WeiszfeldResult(q, max_iter, False, tuple(trace))
