"""Episode and campaign execution plus the aggregate metrics they produce.

A campaign runs a sequence of target-face episodes against one simulator
instance: the die carries over between episodes, each goal is drawn
uniformly from the faces that differ from both the previous goal and the
current face, and an episode ends at the first success or after
max_impulses.  A leaner observation leaves the controller blind, so the
next impulse is a random recovery shot and it counts against the budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import FACES, Action, DieState, GoalSpec, bind_goal, goal_satisfied
from .policy import decide_random
from .simulator import Leaner, Observation, PlateConfig, PlateSimulator, SimState
from .trials import Dataset

STEP_COLUMNS = (
    "episode",
    "step",
    "goal_kind",
    "goal_face",
    "s",
    "x",
    "y",
    "theta",
    "solenoid",
    "duration_ms",
    "s_out",
    "x_out",
    "y_out",
    "theta_out",
    "valid",
    "success",
)


@dataclass(frozen=True)
class StepRecord:
    before: DieState
    action: Action
    outcome: Observation
    success: bool


@dataclass(frozen=True)
class EpisodeResult:
    goal: GoalSpec
    steps: tuple[StepRecord, ...]
    succeeded: bool

    @property
    def impulses_used(self) -> int | None:
        """Impulses spent until success; None marks a failed episode."""
        return len(self.steps) if self.succeeded else None


def _run_episode(
    sim: PlateSimulator,
    state: SimState,
    last_obs: DieState,
    policy,
    goal: GoalSpec,
    policy_rng: np.random.Generator,
    max_impulses: int,
) -> tuple[EpisodeResult, SimState, DieState]:
    bound = bind_goal(goal, last_obs)
    steps: list[StepRecord] = []
    blind = False
    succeeded = False
    for _ in range(max_impulses):
        before = last_obs  # stale while blind; the recovery shot is random anyway
        if blind:
            action = decide_random(before, bound, policy_rng)
        else:
            action = policy.decide(before, bound, policy_rng)
        state, obs = sim.step(state, action)
        if isinstance(obs, Leaner):
            blind = True
            success = False
        else:
            blind = False
            last_obs = obs
            success = goal_satisfied(bound, obs)
        steps.append(StepRecord(before, action, obs, success))
        if success:
            succeeded = True
            break
    if blind:
        # Leave the caller with a usable pose for the next goal draw.
        last_obs = sim.observe(state)
    return EpisodeResult(bound, tuple(steps), succeeded), state, last_obs


def run_episode(
    sim: PlateSimulator,
    policy,
    goal: GoalSpec,
    max_impulses: int = 10,
    seed: int = 0,
) -> EpisodeResult:
    """Run one episode from a fresh seeded drop.  The target face must
    differ from the starting face."""
    sim_stream, policy_stream = np.random.SeedSequence(seed).spawn(2)
    state = sim.initial_state(sim_stream)
    obs = sim.observe(state)
    bound = bind_goal(goal, obs)
    if goal_satisfied(bound, obs):
        raise ValueError(f"goal {bound} already satisfied at episode start")
    result, _, _ = _run_episode(
        sim, state, obs, policy, bound, np.random.default_rng(policy_stream), max_impulses
    )
    return result


@dataclass
class CampaignReport:
    policy_name: str
    seed: int
    max_impulses: int
    episodes: list[EpisodeResult] = field(default_factory=list)

    @property
    def n_goals(self) -> int:
        return len(self.episodes)

    def cumulative_success(self) -> np.ndarray:
        """Fraction of episodes succeeding within 1..max_impulses impulses."""
        counts = np.zeros(self.max_impulses)
        for ep in self.episodes:
            if ep.succeeded:
                counts[len(ep.steps) - 1] += 1
        return np.cumsum(counts) / max(1, self.n_goals)

    def per_solenoid(self) -> tuple[np.ndarray, np.ndarray]:
        """(fired, succeeded) counts indexed by solenoid."""
        fired = np.zeros(7, dtype=int)
        succeeded = np.zeros(7, dtype=int)
        for ep in self.episodes:
            for step in ep.steps:
                fired[step.action.solenoid] += 1
                if step.success:
                    succeeded[step.action.solenoid] += 1
        return fired, succeeded

    def scatter(self) -> list[tuple[float, float, int]]:
        """(x, y, solenoid) of every decision, for coverage maps."""
        return [
            (s.before.pose.x, s.before.pose.y, s.action.solenoid)
            for ep in self.episodes
            for s in ep.steps
        ]

    def success_within(self, impulses: int) -> float:
        return float(self.cumulative_success()[impulses - 1])


def run_campaign(
    sim: PlateSimulator,
    policy,
    n_goals: int = 2000,
    seed: int = 0,
    max_impulses: int = 10,
) -> CampaignReport:
    """Continuous sequence of n_goals target-face episodes; the die state
    carries over and consecutive goals never repeat."""
    if n_goals < 1:
        raise ValueError("n_goals must be >= 1")
    sim_stream, policy_stream, goal_stream = np.random.SeedSequence(seed).spawn(3)
    state = sim.initial_state(sim_stream)
    policy_rng = np.random.default_rng(policy_stream)
    goal_rng = np.random.default_rng(goal_stream)
    obs = sim.observe(state)

    report = CampaignReport(getattr(policy, "name", "policy"), seed, max_impulses)
    previous_goal: int | None = None
    for _ in range(n_goals):
        options = [f for f in FACES if f != obs.face and f != previous_goal]
        target = int(options[goal_rng.integers(0, len(options))])
        episode, state, obs = _run_episode(
            sim, state, obs, policy, GoalSpec.target(target), policy_rng, max_impulses
        )
        report.episodes.append(episode)
        previous_goal = target
    return report


@dataclass(frozen=True)
class FaceChangeStats:
    fired: np.ndarray
    changed: np.ndarray

    @property
    def rates(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.fired > 0, self.changed / self.fired, 0.0)

    @property
    def overall_rate(self) -> float:
        total = int(self.fired.sum())
        return float(self.changed.sum() / total) if total else 0.0


def face_change_rates(dataset: Dataset) -> FaceChangeStats:
    """Per-solenoid face-change counts over the valid trials of a log."""
    fired = np.zeros(7, dtype=int)
    changed = np.zeros(7, dtype=int)
    for t in dataset:
        if not t.valid:
            continue
        fired[t.action.solenoid] += 1
        if t.after.face != t.before.face:
            changed[t.action.solenoid] += 1
    return FaceChangeStats(fired, changed)


def face_change_eval(
    sim: PlateSimulator,
    policy,
    n_impulses: int,
    seed: int = 0,
) -> CampaignReport:
    """Continuous single-impulse evaluation of the face-change task: every
    impulse is its own one-shot episode with the goal bound to the current
    face."""
    if n_impulses < 1:
        raise ValueError("n_impulses must be >= 1")
    sim_stream, policy_stream = np.random.SeedSequence(seed).spawn(2)
    state = sim.initial_state(sim_stream)
    policy_rng = np.random.default_rng(policy_stream)
    obs = sim.observe(state)

    report = CampaignReport(getattr(policy, "name", "policy"), seed, max_impulses=1)
    for _ in range(n_impulses):
        episode, state, obs = _run_episode(
            sim, state, obs, policy, GoalSpec.any_other(), policy_rng, max_impulses=1
        )
        report.episodes.append(episode)
    return report


def serialize_campaign(report: CampaignReport, task: str = "target") -> str:
    lines = [
        "# campaign report v1",
        f"# policy = {report.policy_name}",
        f"# task = {task}",
        f"# seed = {report.seed}",
        f"# n_goals = {report.n_goals}",
        f"# max_impulses = {report.max_impulses}",
        "\t".join(STEP_COLUMNS),
    ]
    for ep_i, ep in enumerate(report.episodes):
        for st_i, step in enumerate(ep.steps):
            before, act, out = step.before, step.action, step.outcome
            if isinstance(out, Leaner):
                out_fields = ("0", "", "", "", "0")
            else:
                out_fields = (
                    str(out.face),
                    repr(out.pose.x),
                    repr(out.pose.y),
                    repr(out.pose.theta),
                    "1",
                )
            lines.append(
                "\t".join(
                    (
                        str(ep_i),
                        str(st_i),
                        ep.goal.kind,
                        str(ep.goal.face),
                        str(before.face),
                        repr(before.pose.x),
                        repr(before.pose.y),
                        repr(before.pose.theta),
                        str(act.solenoid),
                        repr(act.duration_ms),
                        *out_fields,
                        "1" if step.success else "0",
                    )
                )
            )
    return "\n".join(lines) + "\n"


def write_campaign(report: CampaignReport, path, task: str = "target") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_campaign(report, task))


@dataclass(frozen=True)
class CampaignSummary:
    """Replayable aggregate of a campaign report file."""

    policy_name: str
    task: str
    n_goals: int
    max_impulses: int
    cumulative_success: np.ndarray
    fired: np.ndarray
    succeeded: np.ndarray
    scatter: list[tuple[float, float, int]]


def read_campaign(path) -> CampaignSummary:
    policy_name = "policy"
    task = "target"
    n_goals = 0
    max_impulses = 0
    success_step: dict[int, int] = {}
    fired = np.zeros(7, dtype=int)
    succeeded = np.zeros(7, dtype=int)
    scatter: list[tuple[float, float, int]] = []
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                for key in ("policy", "task", "seed", "n_goals", "max_impulses"):
                    if body.startswith(f"{key} ="):
                        value = body.split("=", 1)[1].strip()
                        if key == "policy":
                            policy_name = value
                        elif key == "task":
                            task = value
                        elif key == "n_goals":
                            n_goals = int(value)
                        elif key == "max_impulses":
                            max_impulses = int(value)
                continue
            if not header_seen:
                if tuple(line.split("\t")) != STEP_COLUMNS:
                    raise ValueError(f"unexpected campaign header: {line!r}")
                header_seen = True
                continue
            parts = line.split("\t")
            if len(parts) != len(STEP_COLUMNS):
                raise ValueError(f"malformed campaign row: {line!r}")
            episode = int(parts[0])
            step = int(parts[1])
            solenoid = int(parts[8])
            success = parts[15] == "1"
            fired[solenoid] += 1
            if success:
                succeeded[solenoid] += 1
                success_step.setdefault(episode, step + 1)
            scatter.append((float(parts[5]), float(parts[6]), solenoid))
    if not header_seen:
        raise ValueError("campaign file has no header row")
    counts = np.zeros(max(max_impulses, 1))
    for step_index in success_step.values():
        counts[step_index - 1] += 1
    cumulative = np.cumsum(counts) / max(1, n_goals)
    return CampaignSummary(
        policy_name, task, n_goals, max_impulses, cumulative, fired, succeeded, scatter
    )
