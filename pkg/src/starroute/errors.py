"""Exception types shared across the solver modules.

Every contract violation raises a named subclass of StarRouteError so the
CLI can map failures onto stable exit codes.
"""


class StarRouteError(Exception):
    """Base class for all starroute errors."""


# --- geometry ---------------------------------------------------------------

class GeometryError(StarRouteError):
    """Degenerate or invalid geometric input."""


class FewerThanThreePoints(GeometryError):
    pass


class AllCollinear(GeometryError):
    pass


# --- median / Weiszfeld -----------------------------------------------------

class EmptySites(StarRouteError):
    pass


class NonPositiveTol(StarRouteError):
    pass


class CoincidesWithSite(StarRouteError):
    """Weiszfeld step evaluated exactly at a positive-weight site."""


# --- refinement schedule ----------------------------------------------------

class SubdivisionTooSmall(StarRouteError):
    """Subdivision count <= 2: the refinement squares never shrink."""


class EpsilonOutOfRange(StarRouteError):
    """Target accuracy outside the admissible window (0, 2*n1*sqrt(2)]."""


class CellLargerThanRect(GeometryError):
    """Base cell side exceeds the bounding rectangle of the scene."""


class CellLargerThanHull(GeometryError):
    """Base cell side exceeds the hull's bounding box."""


# --- solvers ----------------------------------------------------------------

class SiteOutsideGrid(StarRouteError):
    pass


class FirstStepNotNeighbor(StarRouteError):
    """A path's first step is not one of the 8 lattice neighbors of its start."""


class NoPath(StarRouteError):
    """No route exists between the requested endpoints.

    ``unreachable_sites`` lists the site indices that could not be reached
    when the failure happened inside a star evaluation.
    """

    def __init__(self, message: str, unreachable_sites: list[int] | None = None):
        super().__init__(message)
        self.unreachable_sites = unreachable_sites or []


class EndpointInObstacle(StarRouteError):
    pass


class AllCandidatesSkipped(StarRouteError):
    """Every candidate of a refinement level was obstacle-voided or empty."""


# --- oracle -----------------------------------------------------------------

class ResolutionTooCoarse(StarRouteError):
    pass


class AllPointsBlocked(StarRouteError):
    pass


# --- scene files ------------------------------------------------------------

class SceneFormatError(StarRouteError):
    """Scene file violates the schema; ``path`` is a JSON-path string."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
