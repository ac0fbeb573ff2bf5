"""starroute: central-node placement minimizing total connection cost.

Three regimes share one refinement engine: the free Euclidean plane
(Weiszfeld iteration), weighted polygonal terrain (lattice search with
direction-dependent costs), and polygonal obstacles (exact geodesics).
"""

from .geom import Containment, Line, Point, Polygon, Rect, convex_hull, enclosing_rect, reflect
from .median import WeightedSite, weiszfeld_solve
from .obstacles import ObstacleScene, geodesic, solve_obstacles, star_geodesic_cost
from .result import SolveResult, TraceRow
from .weighted import WeightedScene, solve_weighted

__version__ = "0.1.0"

__all__ = [
    "Containment",
    "Line",
    "ObstacleScene",
    "Point",
    "Polygon",
    "Rect",
    "SolveResult",
    "TraceRow",
    "WeightedScene",
    "WeightedSite",
    "convex_hull",
    "enclosing_rect",
    "geodesic",
    "reflect",
    "solve_obstacles",
    "solve_weighted",
    "star_geodesic_cost",
    "weiszfeld_solve",
    "__version__",
]
