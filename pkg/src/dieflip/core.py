"""Shared domain types: die faces, planar poses, cube orientation, actions, goals.

A resting die is described by the visible top face plus a planar pose
(x, y in millimeters, yaw theta in degrees).  Theta spans the full
[0, 360) range and its 90-degree quadrant encodes which of the four
side-face assignments the die is in, so (face, x, y, theta) is a complete
resting state.  The full top/north/east labeling is derived, never stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FACES = (1, 2, 3, 4, 5, 6)
N_SOLENOIDS = 7
DURATION_MIN_MS = 8.0
DURATION_MAX_MS = 25.0

# Roll directions ordered by world-frame angle offset from the die yaw:
# index k rolls the die toward world angle theta + 90*k.
DIRECTIONS = ("E", "N", "W", "S")


def opposite(face: int) -> int:
    """Face on the other side of the die (faces sum to 7)."""
    return 7 - face


def wrap_angle_diff(a: float, b: float) -> float:
    """Smallest absolute angular difference in degrees, in [0, 180]."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def wrap_signed(delta: float, period: float = 360.0) -> float:
    """Wrap an angle delta to the half-open interval (-period/2, period/2]."""
    d = delta % period
    if d > period / 2.0:
        d -= period
    return d


@dataclass(frozen=True, order=True)
class CubeOrientation:
    """Which faces occupy the top/north/east body slots of a resting die.

    Exactly 24 triples are reachable by rolling a die with the western
    (counterclockwise 1-2-3) chirality from the canonical pose
    (top=1, north=2, east=3).
    """

    top: int
    north: int
    east: int

    def __post_init__(self) -> None:
        if (self.top, self.north, self.east) not in _VALID_TRIPLES:
            raise ValueError(
                f"not a reachable die orientation: "
                f"top={self.top} north={self.north} east={self.east}"
            )


def _roll_triple(t: int, n: int, e: int, direction: str) -> tuple[int, int, int]:
    # Tipping toward a direction raises the opposite face to the top.
    if direction == "N":
        return 7 - n, t, e
    if direction == "S":
        return n, 7 - t, e
    if direction == "E":
        return 7 - e, n, t
    if direction == "W":
        return e, n, 7 - t
    raise ValueError(f"unknown roll direction {direction!r}")


def _generate_valid_triples() -> frozenset[tuple[int, int, int]]:
    seen = {(1, 2, 3)}
    frontier = [(1, 2, 3)]
    while frontier:
        t, n, e = frontier.pop()
        for d in DIRECTIONS:
            nxt = _roll_triple(t, n, e, d)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    assert len(seen) == 24
    return frozenset(seen)


_VALID_TRIPLES = _generate_valid_triples()


def roll(o: CubeOrientation, direction: str) -> CubeOrientation:
    """Orientation after tipping one quarter turn toward N, E, S or W."""
    return CubeOrientation(*_roll_triple(o.top, o.north, o.east, direction))


def _yaw_ccw(t: int, n: int, e: int) -> tuple[int, int, int]:
    # Rotate the die 90 degrees counterclockwise about the vertical axis.
    return t, e, 7 - n


def _build_quarter_tables():
    by_face_quarter: dict[tuple[int, int], CubeOrientation] = {}
    quarter_of: dict[CubeOrientation, int] = {}
    for face in FACES:
        candidates = [o for o in _VALID_TRIPLES if o[0] == face]
        base = min(candidates, key=lambda o: o[1])  # smallest north face
        t, n, e = base
        for q in range(4):
            o = CubeOrientation(t, n, e)
            by_face_quarter[(face, q)] = o
            quarter_of[o] = q
            t, n, e = _yaw_ccw(t, n, e)
    return by_face_quarter, quarter_of


_ORIENT_BY_FACE_QUARTER, _QUARTER_OF_ORIENT = _build_quarter_tables()


def orientation_for(face: int, theta: float) -> CubeOrientation:
    """Derive the full orientation from the top face and the yaw quadrant."""
    return _ORIENT_BY_FACE_QUARTER[(face, int(theta % 360.0 // 90.0))]


def theta_for_orientation(theta: float, o: CubeOrientation) -> float:
    """Re-encode theta after a roll: keep the footprint phase (theta mod 90)
    and move to the quadrant that encodes the new orientation."""
    return theta % 90.0 + 90.0 * _QUARTER_OF_ORIENT[o]


@dataclass(frozen=True)
class Pose:
    """Planar pose: x, y in millimeters, theta in degrees normalized to [0, 360)."""

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"pose coordinates must be finite: {self}")
        object.__setattr__(self, "theta", self.theta % 360.0)


@dataclass(frozen=True)
class DieState:
    """Resting state of the die: top face plus planar pose."""

    face: int
    pose: Pose

    def __post_init__(self) -> None:
        if self.face not in FACES:
            raise ValueError(f"face must be in 1..6, got {self.face}")

    @property
    def orientation(self) -> CubeOrientation:
        """Full top/north/east labeling implied by (face, theta quadrant)."""
        return orientation_for(self.face, self.pose.theta)


@dataclass(frozen=True)
class Action:
    """One impulse command: which solenoid to fire and for how long."""

    solenoid: int
    duration_ms: float

    def __post_init__(self) -> None:
        if not 0 <= self.solenoid < N_SOLENOIDS:
            raise ValueError(f"solenoid must be in 0..6, got {self.solenoid}")
        if not DURATION_MIN_MS <= self.duration_ms <= DURATION_MAX_MS:
            raise ValueError(
                f"duration must be in [{DURATION_MIN_MS}, {DURATION_MAX_MS}] ms, "
                f"got {self.duration_ms}"
            )


@dataclass(frozen=True)
class GoalSpec:
    """Success predicate on the resting state.

    kind="any_other": success iff the top face differs from `face`.  With
    face=None the reference binds to the current face at decision time.
    kind="target": success iff the top face equals `face`.  With face=None
    the spec is an unbound task template (used by cross-validation, which
    assigns a rotating evaluation target per trial).
    """

    kind: str
    face: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("any_other", "target"):
            raise ValueError(f"unknown goal kind {self.kind!r}")
        if self.face is not None and self.face not in FACES:
            raise ValueError(f"goal face must be in 1..6, got {self.face}")

    @classmethod
    def any_other(cls, reference: int | None = None) -> "GoalSpec":
        return cls("any_other", reference)

    @classmethod
    def target(cls, face: int | None = None) -> "GoalSpec":
        return cls("target", face)


def bind_goal(goal: GoalSpec, state: DieState) -> GoalSpec:
    """Resolve an unbound any-other goal against the current face."""
    if goal.kind == "any_other" and goal.face is None:
        return GoalSpec("any_other", state.face)
    return goal


def goal_satisfied(goal: GoalSpec, state: DieState) -> bool:
    """Whether a resting state meets the goal. The goal must be bound."""
    if goal.face is None:
        raise ValueError(f"cannot evaluate unbound goal {goal}")
    if goal.kind == "any_other":
        return state.face != goal.face
    return state.face == goal.face
