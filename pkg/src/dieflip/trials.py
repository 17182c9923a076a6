"""Trial logging: self-supervised data collection, persistence, splits, stats.

A trial is one impulse: the observed state before, the action, the observed
state after, and a validity flag (false when the impulse ended in a leaner).
For invalid trials the after columns hold the first observation following
the automatic recovery re-drop, so consecutive rows always chain: trial i's
after state is trial i+1's before state.

Log format (tab-separated, one row per trial, floats at full precision):

    episode  step  s  x  y  theta  solenoid  duration_ms
    s_prime  x_prime  y_prime  theta_prime  valid

with ``# key = value`` provenance comments above the header.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .configio import config_digest
from .core import Action, DieState, Pose
from .simulator import Leaner, PlateConfig, PlateSimulator

COLUMNS = (
    "episode",
    "step",
    "s",
    "x",
    "y",
    "theta",
    "solenoid",
    "duration_ms",
    "s_prime",
    "x_prime",
    "y_prime",
    "theta_prime",
    "valid",
)


@dataclass(frozen=True)
class Trial:
    """One logged impulse transition."""

    before: DieState
    action: Action
    after: DieState
    valid: bool
    episode_id: int
    step_index: int


@dataclass(frozen=True)
class Dataset:
    """Ordered, append-only collection of trials with provenance."""

    trials: tuple[Trial, ...]
    seed: int | None = None
    config_digest: str | None = None

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def __getitem__(self, i):
        return self.trials[i]


def collect(config: PlateConfig, n_trials: int, seed: int) -> Dataset:
    """Run the random policy for n_trials impulses and log every transition,
    including invalid ones.  Deterministic per seed."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    sim_stream, action_stream = np.random.SeedSequence(seed).spawn(2)
    sim = PlateSimulator(config)
    state = sim.initial_state(sim_stream)
    action_rng = np.random.default_rng(action_stream)
    before = sim.observe(state)

    trials = []
    for i in range(n_trials):
        action = Action(int(action_rng.integers(0, 7)), float(action_rng.uniform(8.0, 25.0)))
        state, obs = sim.step(state, action)
        if isinstance(obs, Leaner):
            after = sim.observe(state)  # first view after the recovery re-drop
            valid = False
        else:
            after = obs
            valid = True
        trials.append(Trial(before, action, after, valid, 0, i))
        before = after
    return Dataset(tuple(trials), seed=seed, config_digest=config_digest(config))


def filter_valid(dataset: Dataset) -> Dataset:
    """Keep only trials whose outcome observation was valid; order preserved."""
    kept = tuple(t for t in dataset.trials if t.valid)
    return Dataset(kept, dataset.seed, dataset.config_digest)


def kfold_split(dataset: Dataset, k: int, seed: int) -> list[tuple[Dataset, Dataset]]:
    """Shuffled k-fold partition; fold sizes differ by at most one."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > len(dataset):
        raise ValueError(f"k={k} exceeds dataset size {len(dataset)}")
    order = np.random.default_rng(seed).permutation(len(dataset))
    folds = np.array_split(order, k)
    pairs = []
    for i, test_idx in enumerate(folds):
        test_mask = np.zeros(len(dataset), dtype=bool)
        test_mask[test_idx] = True
        train = tuple(dataset.trials[j] for j in range(len(dataset)) if not test_mask[j])
        test = tuple(dataset.trials[j] for j in sorted(test_idx))
        pairs.append(
            (
                Dataset(train, dataset.seed, dataset.config_digest),
                Dataset(test, dataset.seed, dataset.config_digest),
            )
        )
    return pairs


@dataclass(frozen=True)
class DensityMap:
    """2-D histogram of before-poses on a square grid."""

    counts: np.ndarray
    x_edges: np.ndarray
    y_edges: np.ndarray

    @property
    def total(self) -> float:
        return float(self.counts.sum())


def density_stats(dataset: Dataset, grid_mm: float, half_extent: float = 105.0) -> DensityMap:
    """Histogram the before-pose positions on a grid of grid_mm cells."""
    if grid_mm <= 0:
        raise ValueError("grid_mm must be positive")
    edges = np.arange(-half_extent, half_extent + grid_mm, grid_mm)
    xs = np.array([t.before.pose.x for t in dataset.trials])
    ys = np.array([t.before.pose.y for t in dataset.trials])
    if len(dataset) == 0:
        counts = np.zeros((len(edges) - 1, len(edges) - 1))
    else:
        counts, _, _ = np.histogram2d(xs, ys, bins=(edges, edges))
    return DensityMap(counts, edges, edges)


def edge_center_density_ratio(
    dataset: Dataset,
    config: PlateConfig,
    band_mm: float = 20.0,
    core_radius_mm: float = 20.0,
) -> float:
    """Ratio of per-area point density in the outer wall band to density in
    the central disk, measured on before-poses."""
    sim = PlateSimulator(config)
    n_edge = 0
    n_core = 0
    for t in dataset.trials:
        x, y = t.before.pose.x, t.before.pose.y
        if sim.corral.wall_distance(x, y) <= band_mm:
            n_edge += 1
        if math.hypot(x, y) <= core_radius_mm:
            n_core += 1
    a = config.corral_inradius
    area_edge = sim.corral.area(a) - sim.corral.area(a - band_mm)
    area_core = math.pi * core_radius_mm**2
    if n_core == 0:
        return math.inf
    return (n_edge / area_edge) / (n_core / area_core)


def _format_row(t: Trial) -> str:
    return "\t".join(
        (
            str(t.episode_id),
            str(t.step_index),
            str(t.before.face),
            repr(t.before.pose.x),
            repr(t.before.pose.y),
            repr(t.before.pose.theta),
            str(t.action.solenoid),
            repr(t.action.duration_ms),
            str(t.after.face),
            repr(t.after.pose.x),
            repr(t.after.pose.y),
            repr(t.after.pose.theta),
            "1" if t.valid else "0",
        )
    )


def serialize_trials(dataset: Dataset) -> str:
    lines = ["# trial log v1"]
    if dataset.seed is not None:
        lines.append(f"# seed = {dataset.seed}")
    if dataset.config_digest is not None:
        lines.append(f"# config_digest = {dataset.config_digest}")
    lines.append("\t".join(COLUMNS))
    lines.extend(_format_row(t) for t in dataset.trials)
    return "\n".join(lines) + "\n"


def save_trials(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_trials(dataset))


def parse_trials(text: str) -> Dataset:
    seed = None
    digest = None
    trials = []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("seed ="):
                seed = int(body.split("=", 1)[1])
            elif body.startswith("config_digest ="):
                digest = body.split("=", 1)[1].strip()
            continue
        if not header_seen:
            if tuple(line.split("\t")) != COLUMNS:
                raise ValueError(f"unexpected trial log header: {line!r}")
            header_seen = True
            continue
        parts = line.split("\t")
        if len(parts) != len(COLUMNS):
            raise ValueError(f"malformed trial row: {line!r}")
        (ep, st, s, x, y, th, sol, dur, s2, x2, y2, th2, valid) = parts
        trials.append(
            Trial(
                before=DieState(int(s), Pose(float(x), float(y), float(th))),
                action=Action(int(sol), float(dur)),
                after=DieState(int(s2), Pose(float(x2), float(y2), float(th2))),
                valid=valid == "1",
                episode_id=int(ep),
                step_index=int(st),
            )
        )
    if not header_seen:
        raise ValueError("trial log has no header row")
    return Dataset(tuple(trials), seed=seed, config_digest=digest)


def load_trials(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trials(fh.read())
