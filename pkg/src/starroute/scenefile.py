"""Scene and result JSON formats.

Scene schema (version 1):

    {
      "version": 1,
      "kind": "weighted" | "obstacles" | "plain",
      "sites": [[x, y], ...],
      "regions": [{"polygon": [[x, y], ...], "weight": w}, ...],   # weighted
      "obstacles": [{"polygon": [[x, y], ...]}, ...],              # obstacles
      "default_weight": w                                          # optional
    }

Validation failures raise SceneFormatError carrying a JSON-path string.
Result files round-trip losslessly; timing fields are informational and
excluded from determinism comparisons.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .errors import SceneFormatError
from .geom import Point, Polygon
from .obstacles import ObstacleScene
from .result import SolveResult
from .weighted import WeightedScene

KINDS = ("weighted", "obstacles", "plain")


@dataclass(frozen=True)
class SceneFile:
    kind: str
    sites: tuple[tuple[float, float], ...]
    regions: tuple[tuple[tuple[tuple[float, float], ...], float], ...] = ()
    obstacles: tuple[tuple[tuple[float, float], ...], ...] = ()
    default_weight: float = 1.0
    version: int = 1

    def site_points(self) -> tuple[Point, ...]:
        return tuple(Point(x, y) for x, y in self.sites)

    def to_weighted_scene(self) -> WeightedScene:
        regions = tuple((_polygon(ring), w) for ring, w in self.regions)
        return WeightedScene(self.site_points(), regions, self.default_weight)

    def to_obstacle_scene(self) -> ObstacleScene:
        return ObstacleScene(self.site_points(), tuple(_polygon(r) for r in self.obstacles))


def _polygon(ring: tuple[tuple[float, float], ...]) -> Polygon:
    """Build a polygon, accepting clockwise input (geom requires CCW).

    Geometric validity errors (self-intersection, repeated vertices)
    propagate as ValueError: they are degenerate geometry, not schema
    violations.
    """
    pts = [Point(x, y) for x, y in ring]
    area = 0.0
    for i in range(len(pts)):
        a, b = pts[i - 1], pts[i]
        area += a.x * b.y - b.x * a.y
    if area < 0:
        pts.reverse()
    return Polygon(tuple(pts))


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise SceneFormatError(path, msg)


def _coord_pair(value: Any, path: str) -> tuple[float, float]:
    _expect(isinstance(value, (list, tuple)) and len(value) == 2, path, "expected [x, y]")
    x, y = value
    for name, c in (("x", x), ("y", y)):
        _expect(isinstance(c, (int, float)) and not isinstance(c, bool), f"{path}[{0 if name=='x' else 1}]", "expected a number")
        _expect(math.isfinite(c), f"{path}[{0 if name=='x' else 1}]", "coordinate must be finite")
    return float(x), float(y)


def _ring(value: Any, path: str) -> tuple[tuple[float, float], ...]:
    _expect(isinstance(value, list), path, "expected a list of [x, y] pairs")
    _expect(len(value) >= 3, path, "polygon needs at least 3 vertices")
    return tuple(_coord_pair(v, f"{path}[{i}]") for i, v in enumerate(value))


def parse_scene(data: Any) -> SceneFile:
    _expect(isinstance(data, dict), "$", "scene must be a JSON object")
    version = data.get("version")
    _expect(isinstance(version, int) and not isinstance(version, bool), "$.version", "expected an integer")
    _expect(version == 1, "$.version", f"unsupported version {version}")
    kind = data.get("kind")
    _expect(kind in KINDS, "$.kind", f"expected one of {KINDS}")

    sites_raw = data.get("sites")
    _expect(isinstance(sites_raw, list) and len(sites_raw) >= 1, "$.sites", "expected a non-empty list")
    sites = tuple(_coord_pair(s, f"$.sites[{i}]") for i, s in enumerate(sites_raw))

    allowed = {"version", "kind", "sites"}
    regions: tuple = ()
    obstacles: tuple = ()
    default_weight = 1.0
    if kind == "weighted":
        allowed |= {"regions", "default_weight"}
        regions_raw = data.get("regions", [])
        _expect(isinstance(regions_raw, list), "$.regions", "expected a list")
        out = []
        for i, entry in enumerate(regions_raw):
            _expect(isinstance(entry, dict), f"$.regions[{i}]", "expected an object")
            ring = _ring(entry.get("polygon"), f"$.regions[{i}].polygon")
            w = entry.get("weight")
            _expect(isinstance(w, (int, float)) and not isinstance(w, bool), f"$.regions[{i}].weight", "expected a number")
            _expect(w > 0 and math.isfinite(w), f"$.regions[{i}].weight", "weight must be positive and finite")
            out.append((ring, float(w)))
        regions = tuple(out)
        dw = data.get("default_weight", 1.0)
        _expect(isinstance(dw, (int, float)) and not isinstance(dw, bool), "$.default_weight", "expected a number")
        _expect(dw > 0 and math.isfinite(dw), "$.default_weight", "default_weight must be positive and finite")
        default_weight = float(dw)
    elif kind == "obstacles":
        allowed |= {"obstacles"}
        obstacles_raw = data.get("obstacles", [])
        _expect(isinstance(obstacles_raw, list), "$.obstacles", "expected a list")
        out = []
        for i, entry in enumerate(obstacles_raw):
            _expect(isinstance(entry, dict), f"$.obstacles[{i}]", "expected an object")
            out.append(_ring(entry.get("polygon"), f"$.obstacles[{i}].polygon"))
        obstacles = tuple(out)

    for key in data:
        _expect(key in allowed, f"$.{key}", f"unknown field for kind={kind!r}")

    return SceneFile(kind, sites, regions, obstacles, default_weight)


def load_scene(path: str) -> SceneFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise SceneFormatError("$", f"cannot read scene file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SceneFormatError("$", f"invalid JSON: {exc}") from exc
    return parse_scene(data)


def scene_to_dict(scene: SceneFile) -> dict:
    out: dict[str, Any] = {
        "version": scene.version,
        "kind": scene.kind,
        "sites": [[x, y] for x, y in scene.sites],
    }
    if scene.kind == "weighted":
        out["regions"] = [
            {"polygon": [[x, y] for x, y in ring], "weight": w} for ring, w in scene.regions
        ]
        out["default_weight"] = scene.default_weight
    elif scene.kind == "obstacles":
        out["obstacles"] = [{"polygon": [[x, y] for x, y in ring]} for ring in scene.obstacles]
    return out


def result_to_dict(result: SolveResult, timing_ms: dict[str, float] | None = None) -> dict:
    out: dict[str, Any] = {
        "q": [result.q.x, result.q.y],
        "objective": result.objective,
        "accuracy_bound": result.accuracy_bound,
        "iterations": result.iterations,
        "s_c": result.s_c,
        "mode": result.mode,
        "trace": [
            {
                "level": row.level,
                "best": [row.best.x, row.best.y],
                "objective": row.objective,
                "square_side": row.square_side,
                "candidates": row.candidates,
            }
            for row in result.trace
        ],
        "timing_ms": timing_ms or {},
    }
    if result.handoff is not None:
        out["handoff"] = [[x, y, obj] for x, y, obj in result.handoff]
    return out


def dump_json(data: dict) -> str:
    """Canonical encoding: sorted keys, fixed separators, trailing newline."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def strip_timing(data: dict) -> dict:
    out = dict(data)
    out.pop("timing_ms", None)
    return out
