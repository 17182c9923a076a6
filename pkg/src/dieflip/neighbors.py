"""Learned outcome model: radius-neighborhood success estimates per solenoid.

Training trials are partitioned by (solenoid, before-face); queries return
exactly the trials whose scalarized distance

    D = ||(x0 - x, y0 - y)||_2 + w * |theta0 - theta|

falls within the radius.  The angle difference wraps at 360 degrees by
default; raw mode keeps the plain absolute difference.  A uniform grid over
(x, y) prunes candidates (the planar distance alone never exceeds D), and
an exact distance filter decides membership, so results match a linear scan
bit for bit.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .core import DieState, GoalSpec, Pose, bind_goal, goal_satisfied
from .trials import Dataset

FALLBACK_DURATION_MS = 16.5  # mid-band, used when no successful neighbor exists
DEFAULT_MIN_SUPPORT = 3


@dataclass(frozen=True)
class ScalarizedMetric:
    """Planar distance plus w millimeters per degree of yaw difference."""

    w: float
    angle_mode: str = "wrapped"

    def __post_init__(self) -> None:
        if self.w < 0:
            raise ValueError("w must be >= 0")
        if self.angle_mode not in ("wrapped", "raw"):
            raise ValueError(f"unknown angle_mode {self.angle_mode!r}")


def _coords(p) -> tuple[float, float, float]:
    if isinstance(p, Pose):
        return p.x, p.y, p.theta
    if isinstance(p, DieState):
        return p.pose.x, p.pose.y, p.pose.theta
    x, y, theta = p
    return float(x), float(y), float(theta)


def distance(metric: ScalarizedMetric, a, b) -> float:
    """Scalarized distance between two (x, y, theta) triples or poses."""
    ax, ay, at = _coords(a)
    bx, by, bt = _coords(b)
    if metric.angle_mode == "wrapped":
        d = abs(at - bt) % 360.0
        ang = min(d, 360.0 - d)
    else:
        ang = abs(at - bt)
    return math.hypot(ax - bx, ay - by) + metric.w * ang


@dataclass(frozen=True)
class Neighborhood:
    """Trials of one (solenoid, face) stratum within the query radius."""

    durations: np.ndarray
    after_faces: np.ndarray
    after_xyt: np.ndarray  # shape (n, 3)

    @property
    def count(self) -> int:
        return len(self.durations)

    def success_mask(self, goal: GoalSpec) -> np.ndarray:
        if goal.face is None:
            raise ValueError(f"cannot evaluate unbound goal {goal}")
        if goal.kind == "any_other":
            return self.after_faces != goal.face
        return self.after_faces == goal.face

    def after_states(self) -> list[DieState]:
        return [
            DieState(int(f), Pose(float(x), float(y), float(t)))
            for f, (x, y, t) in zip(self.after_faces, self.after_xyt)
        ]


class _Stratum:
    """Array-of-columns storage for one (solenoid, face) partition, with a
    uniform (x, y) grid for range-query pruning."""

    def __init__(self, bxyt: np.ndarray, durations: np.ndarray,
                 after_faces: np.ndarray, after_xyt: np.ndarray, cell_mm: float):
        self.bxyt = bxyt
        self.durations = durations
        self.after_faces = after_faces
        self.after_xyt = after_xyt
        self.cell_mm = cell_mm
        cells = np.floor(bxyt[:, :2] / cell_mm).astype(np.int64)
        buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
        for i, (cx, cy) in enumerate(cells):
            buckets[(int(cx), int(cy))].append(i)
        self.buckets = {key: np.array(idx, dtype=np.intp) for key, idx in buckets.items()}

    def candidates(self, x: float, y: float) -> np.ndarray:
        cx, cy = int(math.floor(x / self.cell_mm)), int(math.floor(y / self.cell_mm))
        found = [
            self.buckets[key]
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            if (key := (cx + dx, cy + dy)) in self.buckets
        ]
        if not found:
            return np.empty(0, dtype=np.intp)
        return np.sort(np.concatenate(found))


_EMPTY_NEIGHBORHOOD = Neighborhood(
    np.empty(0), np.empty(0, dtype=np.int64), np.empty((0, 3))
)


class NeighborModel:
    """Per-solenoid radius-neighborhood voter over logged transitions."""

    def __init__(self, strata, metric: ScalarizedMetric, radius: float,
                 min_support: int):
        self._strata = strata
        self.metric = metric
        self.radius = radius
        self.min_support = min_support

    @classmethod
    def build(
        cls,
        dataset: Dataset,
        metric: ScalarizedMetric,
        radius: float,
        min_support: int = DEFAULT_MIN_SUPPORT,
    ) -> "NeighborModel":
        """Index the valid trials of a dataset for range queries."""
        if radius <= 0:
            raise ValueError("radius must be positive")
        grouped: dict[tuple[int, int], list] = defaultdict(list)
        for t in dataset:
            if not t.valid:
                continue
            grouped[(t.action.solenoid, t.before.face)].append(t)
        strata = {}
        for key, ts in grouped.items():
            bxyt = np.array([(t.before.pose.x, t.before.pose.y, t.before.pose.theta) for t in ts])
            durations = np.array([t.action.duration_ms for t in ts])
            after_faces = np.array([t.after.face for t in ts], dtype=np.int64)
            after_xyt = np.array([(t.after.pose.x, t.after.pose.y, t.after.pose.theta) for t in ts])
            strata[key] = _Stratum(bxyt, durations, after_faces, after_xyt, cell_mm=radius)
        return cls(strata, metric, radius, min_support)

    def with_metric(self, metric: ScalarizedMetric) -> "NeighborModel":
        """Same indexed trials under a different metric.  Safe because the
        grid prunes on planar distance alone, which any w only tightens."""
        return NeighborModel(self._strata, metric, self.radius, self.min_support)

    def trained_count(self, solenoid: int | None = None) -> int:
        return sum(
            len(s.durations)
            for (sol, _), s in self._strata.items()
            if solenoid is None or sol == solenoid
        )

    def query(self, state: DieState, solenoid: int) -> Neighborhood:
        """All same-solenoid, same-face trials within the metric radius."""
        if not 0 <= solenoid < 7:
            raise ValueError(f"solenoid out of range: {solenoid}")
        stratum = self._strata.get((solenoid, state.face))
        if stratum is None:
            return _EMPTY_NEIGHBORHOOD
        idx = stratum.candidates(state.pose.x, state.pose.y)
        if len(idx) == 0:
            return _EMPTY_NEIGHBORHOOD
        bxyt = stratum.bxyt[idx]
        planar = np.hypot(bxyt[:, 0] - state.pose.x, bxyt[:, 1] - state.pose.y)
        if self.metric.angle_mode == "wrapped":
            d = np.abs(bxyt[:, 2] - state.pose.theta) % 360.0
            ang = np.minimum(d, 360.0 - d)
        else:
            ang = np.abs(bxyt[:, 2] - state.pose.theta)
        keep = idx[(planar + self.metric.w * ang) <= self.radius]
        return Neighborhood(
            stratum.durations[keep],
            stratum.after_faces[keep],
            stratum.after_xyt[keep],
        )

    def success_prob(
        self, state: DieState, solenoid: int, goal: GoalSpec
    ) -> tuple[float | None, int]:
        """Neighborhood success fraction and its support count.  An empty
        neighborhood abstains: (None, 0)."""
        nb = self.query(state, solenoid)
        if nb.count == 0:
            return None, 0
        mask = nb.success_mask(bind_goal(goal, state))
        return float(mask.mean()), nb.count

    def select_duration(self, state: DieState, solenoid: int, goal: GoalSpec) -> float:
        """Mean duration of the successful neighbors, clamped to the band;
        mid-band fallback when no neighbor succeeded."""
        nb = self.query(state, solenoid)
        if nb.count == 0:
            return FALLBACK_DURATION_MS
        mask = nb.success_mask(bind_goal(goal, state))
        if not mask.any():
            return FALLBACK_DURATION_MS
        return float(np.clip(nb.durations[mask].mean(), 8.0, 25.0))


def knn_success_prob(
    dataset: Dataset,
    metric: ScalarizedMetric,
    state: DieState,
    solenoid: int,
    goal: GoalSpec,
    k: int,
) -> tuple[float | None, int]:
    """Fixed-count variant: success fraction of the k nearest same-solenoid,
    same-face valid trials.  Distance ties break by trial order.  With fewer
    than k candidates all of them vote; no candidates abstains."""
    if k < 1:
        raise ValueError("k must be >= 1")
    bound = bind_goal(goal, state)
    ranked = []
    for i, t in enumerate(dataset):
        if not t.valid or t.action.solenoid != solenoid or t.before.face != state.face:
            continue
        ranked.append((distance(metric, state.pose, t.before.pose), i, t))
    if not ranked:
        return None, 0
    ranked.sort(key=lambda item: (item[0], item[1]))
    chosen = ranked[:k]
    hits = sum(1 for _, _, t in chosen if goal_satisfied(bound, t.after))
    return hits / len(chosen), len(chosen)
