"""Seeded stochastic surrogate for the solenoid impulse plate.

The real plate is a black box; this module provides a documented stand-in
with the same qualitative behavior: impulse duration gates authority, a die
rolls when struck from the right annulus of distances, the center solenoid
is weak, inelastic wall collisions pile the die up near the corral edge,
and a small fraction of outcomes are invalid "leaners".

One step applies, in order and with a fixed draw sequence from the state's
random stream:

1. roll test: with d the planar die-to-solenoid distance,
   lift L = (duration_ms - 8) / 17 and rotational authority
   R = max(exp(-(d - roll_annulus_mean)^2 / (2 roll_annulus_sd^2)),
   far_authority_floor) -- the plate is one connected flexing sheet, so a
   full-width pulse anywhere rolls the die with at least the floor
   probability, and the annulus is the local sweet zone on top of it.  R is
   scaled by center_authority_scale for the center solenoid.  The die tips
   over with probability min(0.95, L * R);
2. if it tips: the roll heading blends the radial direction away from the
   solenoid with that solenoid's own fixed throw direction (solenoid k
   throws toward k * strike_twist_step_deg; each striker hits the plate
   slightly off-axis in its own repeatable way, and that asymmetric kick
   dominates the shove the plate wave gives the die).  The unit vectors
   mix as (1 - strike_twist_mix) * radial + strike_twist_mix * striker,
   then N(0, direction_noise_sd) degrees of noise is added and the result
   snaps to the nearest footprint edge direction (theta + 90k); a second
   quarter roll in the same direction happens with probability
   double_roll_prob;
3. translation: radial displacement translation_scale * L * exp(-d /
   translation_decay) away from the solenoid, plus isotropic N(0, 2 mm)
   position noise and N(0, 5 deg) yaw noise;
4. positions crossing the hexagonal corral are reflected inward with the
   overshoot scaled by wall_restitution (this produces edge accumulation);
5. within wall_align_band_mm of a wall, yaw relaxes toward the wall
   direction (mod 90) by the factor wall_align_rate: a flat die nestles
   parallel against a flat wall, which concentrates the yaw distribution
   near the walls where the die spends most of its time.  Elsewhere yaw
   relaxes weakly (floor_align_rate) toward the printed floor's grain axis
   (floor_grain_deg, mod 90), the faint ridge texture a printed floor
   leaves on a settling die;
6. within 10 mm of a wall the outcome is a leaner with probability
   leaner_prob; the die is then re-dropped uniformly at random inside the
   corral with a uniformly random orientation and the observation reports
   only that the pose was invalid.

Valid observations report the top face exactly and the pose with Gaussian
noise (obs_noise_xy per axis, obs_noise_theta on yaw), projected back into
the corral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    DIRECTIONS,
    DURATION_MIN_MS,
    DURATION_MAX_MS,
    Action,
    DieState,
    GoalSpec,
    Pose,
    bind_goal,
    goal_satisfied,
    orientation_for,
    roll,
    theta_for_orientation,
    wrap_signed,
)

_LIFT_SPAN_MS = DURATION_MAX_MS - DURATION_MIN_MS
_ROLL_PROB_CAP = 0.95
_TRANSLATION_NOISE_SD_MM = 2.0
_YAW_NOISE_SD_DEG = 5.0
_LEANER_BAND_MM = 10.0


@dataclass(frozen=True)
class PlateConfig:
    """Plate geometry and transition-kernel parameters (lengths in mm)."""

    solenoid_xy: tuple[tuple[float, float], ...]
    corral_inradius: float
    corral_rotation_deg: float
    wall_restitution: float
    center_authority_scale: float
    roll_annulus_mean: float
    roll_annulus_sd: float
    far_authority_floor: float
    direction_noise_sd: float
    strike_twist_step_deg: float
    strike_twist_mix: float
    translation_scale: float
    translation_decay: float
    double_roll_prob: float
    leaner_prob: float
    obs_noise_xy: float
    obs_noise_theta: float
    wall_align_rate: float
    wall_align_band_mm: float
    floor_align_rate: float
    floor_grain_deg: float

    def __post_init__(self) -> None:
        if len(self.solenoid_xy) != 7:
            raise ValueError("exactly 7 solenoid positions required")
        cx, cy = self.solenoid_xy[2]
        if (cx, cy) != (0.0, 0.0):
            raise ValueError("solenoid 2 must sit at the origin")
        peripheral = [p for i, p in enumerate(self.solenoid_xy) if i != 2]
        for px, py in peripheral:
            nearest = min(
                math.hypot(px - qx, py - qy)
                for qx, qy in peripheral
                if (qx, qy) != (px, py)
            )
            if abs(nearest - 60.0) > 1e-6:
                raise ValueError("peripheral solenoid spacing must be 60 mm")
        if self.corral_inradius <= 60.0:
            raise ValueError("corral inradius must exceed 60 mm")
        for name in ("wall_restitution", "double_roll_prob", "leaner_prob",
                     "far_authority_floor", "strike_twist_mix"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if not 0.0 <= self.wall_align_rate <= 1.0:
            raise ValueError("wall_align_rate must be in [0, 1]")
        if not 0.0 <= self.floor_align_rate <= 1.0:
            raise ValueError("floor_align_rate must be in [0, 1]")


def default_config() -> PlateConfig:
    """Documented default plate: center solenoid 2 at the origin, solenoid 0
    at (-60, 0), the other five at 60-degree steps counterclockwise on the
    radius-60 circle."""
    ring = {}
    number = [0, 1, 3, 4, 5, 6]
    for i, sol in enumerate(number):
        ang = math.radians(180.0 + 60.0 * i)
        ring[sol] = (round(60.0 * math.cos(ang), 12), round(60.0 * math.sin(ang), 12))
    ring[2] = (0.0, 0.0)
    return PlateConfig(
        solenoid_xy=tuple(ring[i] for i in range(7)),
        corral_inradius=90.0,
        corral_rotation_deg=15.0,
        wall_restitution=0.3,
        center_authority_scale=0.5,
        roll_annulus_mean=25.0,
        roll_annulus_sd=12.0,
        far_authority_floor=0.5,
        direction_noise_sd=30.0,
        strike_twist_step_deg=360.0 / 7.0,
        strike_twist_mix=0.75,
        translation_scale=15.0,
        translation_decay=40.0,
        double_roll_prob=0.2,
        leaner_prob=0.02,
        obs_noise_xy=0.5,
        obs_noise_theta=0.5,
        wall_align_rate=0.7,
        wall_align_band_mm=20.0,
        floor_align_rate=0.15,
        floor_grain_deg=15.0,
    )


class HexCorral:
    """Hexagonal boundary with a given inradius; wall outward normals sit at
    rotation_deg + 60k so wall directions avoid the yaw quadrant boundaries."""

    def __init__(self, inradius: float, rotation_deg: float = 15.0):
        self.inradius = inradius
        self.rotation_deg = rotation_deg
        angles = np.radians(rotation_deg + 60.0 * np.arange(6))
        self._normals = np.column_stack([np.cos(angles), np.sin(angles)])

    def wall_coordinates(self, x: float, y: float) -> np.ndarray:
        return self._normals @ (x, y)

    def wall_distance(self, x: float, y: float) -> float:
        """Distance to the nearest wall; negative outside the hexagon."""
        return self.inradius - float(np.max(self.wall_coordinates(x, y)))

    def contains(self, x: float, y: float) -> bool:
        return self.wall_distance(x, y) >= 0.0

    def nearest_wall(self, x: float, y: float) -> int:
        return int(np.argmax(self.wall_coordinates(x, y)))

    def wall_tangent_deg(self, k: int) -> float:
        return (self.rotation_deg + 60.0 * k + 90.0) % 360.0

    def reflect(self, x: float, y: float, restitution: float) -> tuple[float, float]:
        """Bounce an overshooting position back inside, scaling the overshoot
        by the restitution factor."""
        for _ in range(16):
            dots = self.wall_coordinates(x, y)
            k = int(np.argmax(dots))
            depth = float(dots[k]) - self.inradius
            if depth <= 0.0:
                return x, y
            nx, ny = self._normals[k]
            x -= (1.0 + restitution) * depth * nx
            y -= (1.0 + restitution) * depth * ny
        return self.project(x, y)

    def project(self, x: float, y: float) -> tuple[float, float]:
        """Clamp a position onto or inside the hexagon."""
        for _ in range(16):
            dots = self.wall_coordinates(x, y)
            k = int(np.argmax(dots))
            depth = float(dots[k]) - self.inradius
            if depth <= 0.0:
                break
            nx, ny = self._normals[k]
            x -= depth * nx
            y -= depth * ny
        return x, y

    def area(self, inradius: float | None = None) -> float:
        a = self.inradius if inradius is None else inradius
        return 2.0 * math.sqrt(3.0) * a * a


@dataclass(frozen=True)
class Leaner:
    """Invalid observation: the die is leaning on the corral, no pose."""


LEANER = Leaner()

Observation = DieState | Leaner


@dataclass(frozen=True)
class SimState:
    """True die state plus the seeded random stream driving this episode."""

    truth: DieState
    rng: np.random.Generator = field(repr=False)


class PlateSimulator:
    """Stochastic plate transition kernel, deterministic per seed."""

    def __init__(self, config: PlateConfig | None = None):
        self.config = config or default_config()
        self.corral = HexCorral(self.config.corral_inradius, self.config.corral_rotation_deg)

    def initial_state(self, seed) -> SimState:
        """Drop the die uniformly at random inside the corral."""
        rng = np.random.default_rng(seed)
        return SimState(self._drop(rng), rng)

    def _drop(self, rng: np.random.Generator) -> DieState:
        rc = self.config.corral_inradius / math.cos(math.radians(30.0))
        while True:
            x, y = rng.uniform(-rc, rc, size=2)
            if self.corral.contains(x, y):
                break
        face = int(rng.integers(1, 7))
        theta = float(rng.uniform(0.0, 360.0))
        return DieState(face, Pose(float(x), float(y), theta))

    def roll_probability(self, state: DieState, action: Action) -> float:
        """Closed-form probability that this impulse tips the die."""
        sx, sy = self.config.solenoid_xy[action.solenoid]
        d = math.hypot(state.pose.x - sx, state.pose.y - sy)
        lift = (action.duration_ms - DURATION_MIN_MS) / _LIFT_SPAN_MS
        authority = max(
            math.exp(
                -((d - self.config.roll_annulus_mean) ** 2)
                / (2.0 * self.config.roll_annulus_sd**2)
            ),
            self.config.far_authority_floor,
        )
        if action.solenoid == 2:
            authority *= self.config.center_authority_scale
        return min(_ROLL_PROB_CAP, lift * authority)

    def step(self, state: SimState, action: Action) -> tuple[SimState, Observation]:
        if not isinstance(action, Action):
            raise ValueError(f"not an Action: {action!r}")
        if not 0 <= action.solenoid < 7:
            raise ValueError(f"solenoid out of range: {action.solenoid}")
        if not DURATION_MIN_MS <= action.duration_ms <= DURATION_MAX_MS:
            raise ValueError(f"duration out of band: {action.duration_ms}")

        cfg = self.config
        rng = state.rng
        truth = state.truth
        px, py, theta = truth.pose.x, truth.pose.y, truth.pose.theta
        face = truth.face
        sx, sy = cfg.solenoid_xy[action.solenoid]
        d = math.hypot(px - sx, py - sy)
        lift = (action.duration_ms - DURATION_MIN_MS) / _LIFT_SPAN_MS

        if rng.random() < self.roll_probability(truth, action):
            heading = (
                math.degrees(math.atan2(py - sy, px - sx))
                + action.solenoid * cfg.strike_twist_step_deg
                + rng.normal(0.0, cfg.direction_noise_sd)
            )
            k = int(round(((heading - theta) % 360.0) / 90.0)) % 4
            orient = roll(orientation_for(face, theta), DIRECTIONS[k])
            if rng.random() < cfg.double_roll_prob:
                orient = roll(orient, DIRECTIONS[k])
            face = orient.top
            theta = theta_for_orientation(theta, orient)

        if d > 0.0:
            ux, uy = (px - sx) / d, (py - sy) / d
        else:
            ux, uy = 1.0, 0.0
        shove = cfg.translation_scale * lift * math.exp(-d / cfg.translation_decay)
        x = px + shove * ux + rng.normal(0.0, _TRANSLATION_NOISE_SD_MM)
        y = py + shove * uy + rng.normal(0.0, _TRANSLATION_NOISE_SD_MM)
        x, y = self.corral.reflect(x, y, cfg.wall_restitution)
        theta = (theta + rng.normal(0.0, _YAW_NOISE_SD_DEG)) % 360.0

        wall_gap = self.corral.wall_distance(x, y)
        if cfg.wall_align_rate > 0.0 and wall_gap <= cfg.wall_align_band_mm:
            tangent = self.corral.wall_tangent_deg(self.corral.nearest_wall(x, y))
            deviation = wrap_signed(theta - tangent, period=90.0)
            theta = (theta - cfg.wall_align_rate * deviation) % 360.0
        elif cfg.floor_align_rate > 0.0:
            deviation = wrap_signed(theta - cfg.floor_grain_deg, period=90.0)
            theta = (theta - cfg.floor_align_rate * deviation) % 360.0

        if wall_gap <= _LEANER_BAND_MM and rng.random() < cfg.leaner_prob:
            return SimState(self._drop(rng), rng), LEANER

        successor = DieState(face, Pose(x, y, theta))
        return SimState(successor, rng), self._noisy_view(successor, rng)

    def observe(self, state: SimState) -> DieState:
        """Noisy camera-style view of the current true state."""
        return self._noisy_view(state.truth, state.rng)

    def _noisy_view(self, truth: DieState, rng: np.random.Generator) -> DieState:
        cfg = self.config
        x = truth.pose.x + rng.normal(0.0, cfg.obs_noise_xy)
        y = truth.pose.y + rng.normal(0.0, cfg.obs_noise_xy)
        theta = (truth.pose.theta + rng.normal(0.0, cfg.obs_noise_theta)) % 360.0
        x, y = self.corral.project(x, y)
        return DieState(truth.face, Pose(x, y, theta))

    def oracle_success_prob(
        self, state: DieState, action: Action, goal: GoalSpec, n: int, seed: int = 0
    ) -> float:
        """Monte-Carlo ground truth: fraction of n independently seeded
        impulses from `state` that end with the goal satisfied.  Leaner
        outcomes count as failures."""
        if n < 1:
            raise ValueError("n must be >= 1")
        bound = bind_goal(goal, state)
        streams = np.random.SeedSequence(seed).spawn(n)
        hits = 0
        for stream in streams:
            sim_state = SimState(state, np.random.default_rng(stream))
            after, obs = self.step(sim_state, action)
            if not isinstance(obs, Leaner) and goal_satisfied(bound, after.truth):
                hits += 1
        return hits / n
