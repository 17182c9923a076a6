"""Learning controller for flipping a die with an under-plate impulse array."""

from .core import (
    Action,
    CubeOrientation,
    DieState,
    GoalSpec,
    Pose,
    bind_goal,
    goal_satisfied,
    opposite,
    orientation_for,
    roll,
    wrap_angle_diff,
)
from .harness import (
    CampaignReport,
    EpisodeResult,
    face_change_eval,
    face_change_rates,
    run_campaign,
    run_episode,
)
from .neighbors import NeighborModel, ScalarizedMetric, distance, knn_success_prob
from .policy import (
    GreedyPolicy,
    Mpc2Policy,
    RandomPolicy,
    decide_greedy,
    decide_mpc2,
    decide_random,
    ideal_throw_prob,
)
from .selection import RocCurve, auroc, roc_for, select_hyperparams
from .simulator import (
    LEANER,
    Leaner,
    PlateConfig,
    PlateSimulator,
    SimState,
    default_config,
)
from .trials import (
    Dataset,
    Trial,
    collect,
    density_stats,
    filter_valid,
    kfold_split,
    load_trials,
    save_trials,
)

__version__ = "0.1.0"
