"""Solve-result containers shared by the weighted and obstacle solvers."""
from __future__ import annotations

from dataclasses import dataclass

from .geom import Point


@dataclass(frozen=True)
class TraceRow:
    level: int
    best: Point
    objective: float
    square_side: float
    candidates: int  # evaluations this level, skipped ones included


@dataclass(frozen=True)
class SolveResult:
    q: Point
    objective: float
    iterations: int
    accuracy_bound: float
    s_c: int
    mode: str  # "full" | "anchored"
    trace: tuple[TraceRow, ...] = ()
    handoff: tuple[tuple[float, float, float], ...] | None = None
