"""Decision rules: random baseline, greedy one-step, and two-step MPC.

All policies emit a single Action for an observed die state and a goal.
The greedy policy fires the solenoid whose neighborhood success estimate is
highest; the two-step variant scores each first impulse by its immediate
success probability plus the expected best second-impulse probability over
the empirically observed failure successors, re-planning every step.
Solenoids whose estimate abstains (support below the model's min_support)
drop out of the ranking; if every solenoid abstains the policy falls back
to a random impulse.
"""

from __future__ import annotations

import numpy as np

from .core import Action, DieState, GoalSpec, Pose, bind_goal
from .neighbors import NeighborModel


def ideal_throw_prob() -> float:
    """Single-throw success probability of a perfectly fair re-throw."""
    return 1.0 / 6.0


def decide_random(state: DieState, goal: GoalSpec, rng: np.random.Generator) -> Action:
    """Uniform solenoid, uniform duration across the full band."""
    return Action(int(rng.integers(0, 7)), float(rng.uniform(8.0, 25.0)))


def argmax_with_ties(scores: dict[int, float], rng: np.random.Generator) -> int:
    """Key of the maximal score; exact ties resolved uniformly at random."""
    best = max(scores.values())
    tied = [k for k, v in scores.items() if v == best]
    if len(tied) == 1:
        return tied[0]
    return int(tied[rng.integers(0, len(tied))])


def decide_greedy(
    state: DieState, goal: GoalSpec, model: NeighborModel, rng: np.random.Generator
) -> Action:
    """Fire the solenoid with the highest estimated success probability."""
    bound = bind_goal(goal, state)
    scores: dict[int, float] = {}
    for solenoid in range(7):
        p, n = model.success_prob(state, solenoid, bound)
        if p is not None and n >= model.min_support:
            scores[solenoid] = p
    if not scores:
        return decide_random(state, bound, rng)
    chosen = argmax_with_ties(scores, rng)
    return Action(chosen, model.select_duration(state, chosen, bound))


def mpc2_scores(
    state: DieState,
    goal: GoalSpec,
    model: NeighborModel,
    rng: np.random.Generator | None = None,
    rollout_cap: int = 50,
) -> dict[int, float]:
    """Two-step value per non-abstaining first solenoid:

        V(u1) = p1 + (1 - p1) * mean over failing successors q of
                                max over u2 of estimated success at q,

    where the successors are the after-states of the failing neighborhood
    trials, uniformly subsampled down to rollout_cap, and second-step
    abstentions score zero.
    """
    if rollout_cap < 1:
        raise ValueError("rollout_cap must be >= 1")
    bound = bind_goal(goal, state)
    values: dict[int, float] = {}
    for solenoid in range(7):
        nb = model.query(state, solenoid)
        if nb.count < model.min_support:
            continue
        succ = nb.success_mask(bound)
        p1 = float(succ.mean())
        if p1 >= 1.0:
            values[solenoid] = 1.0
            continue
        fail_idx = np.flatnonzero(~succ)
        if len(fail_idx) > rollout_cap:
            if rng is None:
                raise ValueError("rng required when subsampling rollouts")
            fail_idx = rng.choice(fail_idx, size=rollout_cap, replace=False)
        best_seconds = []
        for i in fail_idx:
            x, y, theta = nb.after_xyt[int(i)]
            q = DieState(int(nb.after_faces[int(i)]), Pose(float(x), float(y), float(theta)))
            best = 0.0
            for second in range(7):
                p2, n2 = model.success_prob(q, second, bound)
                if p2 is not None and n2 >= model.min_support:
                    best = max(best, p2)
            best_seconds.append(best)
        values[solenoid] = p1 + (1.0 - p1) * float(np.mean(best_seconds))
    return values


def decide_mpc2(
    state: DieState,
    goal: GoalSpec,
    model: NeighborModel,
    rng: np.random.Generator,
    rollout_cap: int = 50,
) -> Action:
    """Fire the first solenoid of the best two-step plan (re-planned each
    call); falls back to a random impulse when every solenoid abstains."""
    bound = bind_goal(goal, state)
    values = mpc2_scores(state, bound, model, rng, rollout_cap)
    if not values:
        return decide_random(state, bound, rng)
    chosen = argmax_with_ties(values, rng)
    return Action(chosen, model.select_duration(state, chosen, bound))


class RandomPolicy:
    name = "random"

    def decide(self, state: DieState, goal: GoalSpec, rng: np.random.Generator) -> Action:
        return decide_random(state, goal, rng)


class GreedyPolicy:
    name = "greedy"

    def __init__(self, model: NeighborModel):
        self.model = model

    def decide(self, state: DieState, goal: GoalSpec, rng: np.random.Generator) -> Action:
        return decide_greedy(state, goal, self.model, rng)


class Mpc2Policy:
    name = "mpc2"

    def __init__(self, model: NeighborModel, rollout_cap: int = 50):
        if rollout_cap < 1:
            raise ValueError("rollout_cap must be >= 1")
        self.model = model
        self.rollout_cap = rollout_cap

    def decide(self, state: DieState, goal: GoalSpec, rng: np.random.Generator) -> Action:
        return decide_mpc2(state, goal, self.model, rng, self.rollout_cap)
