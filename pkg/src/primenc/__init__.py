"""primenc: encode vehicle motion primitives in tiny neural controllers.

Deterministic, gradient-free: candidates are scored by rolling them out
against a grid of start-to-goal driving tasks on a kinematic or dynamic
vehicle model, and hill climbing accepts on (tasks solved, pathlength).
"""

from .models import (DYNAMIC16, KINEMATIC, DivergenceError, DynState16,
                     KinState3, VehicleParams)
from .nets import NetSpec, forward, init_params, param_count, tanh_approx
from .rng import ParkMillerRng, derive_seed
from .tasks import (FeatureConfig, Task, Tolerances, features,
                    gen_tasks_exp1, gen_tasks_lateral, goal_reached,
                    mirror_controls, mirror_task, partition_by_velocity)
from .tshc import (BankEntry, Score, TrainConfig, TrainReport, bank_lookup,
                   evaluate, rollout, score_better, train, train_scheduled)
from .vvc import VvcContext, apply_vvc, make_context

__version__ = "0.1.0"

__all__ = [
    "DYNAMIC16", "KINEMATIC", "DivergenceError", "DynState16", "KinState3",
    "VehicleParams", "NetSpec", "forward", "init_params", "param_count",
    "tanh_approx", "ParkMillerRng", "derive_seed", "FeatureConfig", "Task",
    "Tolerances", "features", "gen_tasks_exp1", "gen_tasks_lateral",
    "goal_reached", "mirror_controls", "mirror_task", "partition_by_velocity",
    "BankEntry", "Score", "TrainConfig", "TrainReport", "bank_lookup",
    "evaluate", "rollout", "score_better", "train", "train_scheduled",
    "VvcContext", "apply_vvc", "make_context", "__version__",
]
