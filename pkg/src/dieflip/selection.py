"""Hyperparameter selection for the neighborhood model via k-fold ROC sweeps.

For a candidate (radius, w) cell, each fold trains a model on the train
split and scores every valid test trial of a solenoid with the estimated
success probability.  Sweeping an acceptance threshold from 1.0 down to 0.0
yields an ROC curve per (cell, fold, solenoid); cells are ranked by mean
area under the curve.  Queries whose neighborhood support falls below
min_support abstain and count as predicted-negative at every threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GoalSpec, goal_satisfied
from .neighbors import DEFAULT_MIN_SUPPORT, NeighborModel, ScalarizedMetric
from .trials import Dataset, Trial, filter_valid, kfold_split

DEFAULT_THRESHOLDS = np.linspace(1.0, 0.0, 101)


@dataclass(frozen=True)
class RocCurve:
    """(fpr, tpr) points swept over descending score thresholds."""

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    n_pos: int
    n_neg: int

    @property
    def degenerate(self) -> bool:
        return self.n_pos == 0 or self.n_neg == 0


def cv_goal_for_trial(goal: GoalSpec, trial: Trial) -> GoalSpec:
    """Concrete per-trial goal used for cross-validation labeling.

    Unbound any-other binds to the trial's own before-face.  Unbound target
    assigns a rotating evaluation face (never the before-face) so every
    solenoid sees a balanced mix of targets.  Bound goals pass through.
    """
    if goal.face is not None:
        return goal
    if goal.kind == "any_other":
        return GoalSpec("any_other", trial.before.face)
    offset = 1 + trial.step_index % 5
    return GoalSpec("target", (trial.before.face - 1 + offset) % 6 + 1)


def roc_points(
    scores: np.ndarray, labels: np.ndarray, thresholds: np.ndarray | None = None
) -> RocCurve:
    """ROC curve from per-query scores (NaN = abstain) and boolean labels.

    With thresholds=None the sweep visits every distinct score, which makes
    the area exactly invariant under strictly monotone score transforms.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=bool)
    if thresholds is None:
        finite = np.unique(scores[~np.isnan(scores)])
        thresholds = np.concatenate([[np.inf], finite[::-1]])
    thresholds = np.asarray(thresholds, dtype=float)
    if np.any(np.diff(thresholds) > 0):
        raise ValueError("thresholds must be non-increasing")
    n_pos = int(labels.sum())
    n_neg = int(len(labels) - n_pos)
    valid = ~np.isnan(scores)
    predicted = valid[None, :] & (scores[None, :] >= thresholds[:, None])
    tp = (predicted & labels[None, :]).sum(axis=1)
    fp = (predicted & ~labels[None, :]).sum(axis=1)
    tpr = tp / n_pos if n_pos else np.zeros(len(thresholds))
    fpr = fp / n_neg if n_neg else np.zeros(len(thresholds))
    return RocCurve(thresholds, fpr, tpr, n_pos, n_neg)


def auroc(curve: RocCurve) -> float | None:
    """Trapezoidal area under the curve with (0,0) and (1,1) appended when
    absent.  Undefined (None) for degenerate curves."""
    if curve.degenerate:
        return None
    fpr, tpr = curve.fpr, curve.tpr
    if len(fpr) == 0 or fpr[0] != 0.0 or tpr[0] != 0.0:
        fpr = np.concatenate([[0.0], fpr])
        tpr = np.concatenate([[0.0], tpr])
    if fpr[-1] != 1.0 or tpr[-1] != 1.0:
        fpr = np.concatenate([fpr, [1.0]])
        tpr = np.concatenate([tpr, [1.0]])
    return float(np.trapezoid(tpr, fpr))


def scored_test_trials(
    model: NeighborModel,
    test: Dataset,
    solenoid: int,
    goal: GoalSpec,
) -> tuple[np.ndarray, np.ndarray]:
    """Scores (NaN where the model abstains) and true labels for the valid
    test trials of one solenoid."""
    scores = []
    labels = []
    for trial in test:
        if not trial.valid or trial.action.solenoid != solenoid:
            continue
        bound = cv_goal_for_trial(goal, trial)
        p, n = model.success_prob(trial.before, solenoid, bound)
        scores.append(np.nan if p is None or n < model.min_support else p)
        labels.append(goal_satisfied(bound, trial.after))
    return np.array(scores, dtype=float), np.array(labels, dtype=bool)


def roc_for(
    solenoid: int,
    fold_pair: tuple[Dataset, Dataset],
    metric: ScalarizedMetric,
    radius: float,
    goal: GoalSpec,
    thresholds: np.ndarray | None = None,
    *,
    model: NeighborModel | None = None,
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> RocCurve:
    """ROC curve for one solenoid on one train/test fold."""
    train, test = fold_pair
    if model is None:
        model = NeighborModel.build(train, metric, radius, min_support)
    scores, labels = scored_test_trials(model, test, solenoid, goal)
    if thresholds is None:
        thresholds = DEFAULT_THRESHOLDS
    return roc_points(scores, labels, thresholds)


@dataclass(frozen=True)
class CellScore:
    radius: float
    w: float
    fold: int
    solenoid: int
    auroc: float | None


@dataclass(frozen=True)
class SelectionResult:
    radius: float
    w: float
    mean_by_cell: dict[tuple[float, float], float | None]
    entries: tuple[CellScore, ...]
    goal: GoalSpec
    seed: int
    k: int

    def mean_for_radius(self, radius: float, w: float | None = None) -> float | None:
        return self.mean_by_cell.get((radius, self.w if w is None else w))


def pick_plateau(
    mean_by_cell: dict[tuple[float, float], float | None], tolerance: float = 0.01
) -> tuple[float, float]:
    """Smallest (radius, then w) cell whose mean AUROC is within tolerance
    of the grid maximum."""
    scored = {cell: m for cell, m in mean_by_cell.items() if m is not None}
    if not scored:
        raise ValueError("no grid cell produced a defined AUROC")
    best = max(scored.values())
    candidates = [cell for cell, m in scored.items() if m >= best - tolerance]
    return min(candidates)


def select_hyperparams(
    dataset: Dataset,
    goal: GoalSpec,
    r_grid,
    w_grid,
    k: int = 10,
    seed: int = 0,
    angle_mode: str = "wrapped",
    min_support: int = DEFAULT_MIN_SUPPORT,
    thresholds: np.ndarray | None = None,
    plateau_tolerance: float = 0.01,
) -> SelectionResult:
    """Cross-validated grid search over (radius, w), selecting the plateau
    knee: the lexicographically smallest cell within plateau_tolerance of
    the best mean AUROC."""
    r_grid = sorted(set(float(r) for r in r_grid))
    w_grid = sorted(set(float(w) for w in w_grid))
    if not r_grid or not w_grid:
        raise ValueError("hyperparameter grids must be non-empty")
    valid = filter_valid(dataset)
    folds = kfold_split(valid, k, seed)

    entries: list[CellScore] = []
    sums: dict[tuple[float, float], list[float]] = {
        (r, w): [] for r in r_grid for w in w_grid
    }
    for fold_i, (train, test) in enumerate(folds):
        for r in r_grid:
            base = NeighborModel.build(train, ScalarizedMetric(w_grid[0], angle_mode), r, min_support)
            for w in w_grid:
                model = base.with_metric(ScalarizedMetric(w, angle_mode))
                for solenoid in range(7):
                    curve = roc_for(
                        solenoid, (train, test), model.metric, r, goal,
                        thresholds, model=model, min_support=min_support,
                    )
                    a = auroc(curve)
                    entries.append(CellScore(r, w, fold_i, solenoid, a))
                    if a is not None:
                        sums[(r, w)].append(a)

    mean_by_cell = {
        cell: (float(np.mean(vals)) if vals else None) for cell, vals in sums.items()
    }
    radius, w = pick_plateau(mean_by_cell, plateau_tolerance)
    return SelectionResult(radius, w, mean_by_cell, tuple(entries), goal, seed, k)


def serialize_selection(result: SelectionResult) -> str:
    lines = [
        "# selection report v1",
        f"# goal = {result.goal.kind}",
        f"# seed = {result.seed}",
        f"# folds = {result.k}",
        f"# selected_r = {result.radius!r}",
        f"# selected_w = {result.w!r}",
        "r\tw\tfold\tsolenoid\tauroc",
    ]
    for e in result.entries:
        a = "" if e.auroc is None else repr(e.auroc)
        lines.append(f"{e.radius!r}\t{e.w!r}\t{e.fold}\t{e.solenoid}\t{a}")
    return "\n".join(lines) + "\n"


def write_selection_report(result: SelectionResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_selection(result))
