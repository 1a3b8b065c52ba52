"""swarmq: multi-robot behavior switching with learned selection and tuning.

A deterministic planar multi-robot simulator built around a library of
weighted-consensus behaviors. A tabular learner picks which behavior to
run at every energy-triggered switch while a projected gradient flow
tunes each behavior's parameters online. Ships two missions (convoy
protection, box transport), an ideal and a random baseline, and a CLI for
seeded, reproducible experiments.
"""

__version__ = "0.1.0"

from .behaviors import (
    BehaviorId,
    BehaviorParams,
    BehaviorSpec,
    ParamSpace,
    control,
    default_library,
    energy,
    project,
    radius_to_theta,
    theta_to_radius,
)
from .config import ConfigError, ExperimentConfig, load_config
from .environments import BoxEnv, ConvoyEnv, tuning_cost
from .geometry import ARENA, EnsembleState, InteractionGraph, centroid, euler_step, rotate
from .kernels import active_backend
from .learning import (
    LearningConfig,
    ParamMemory,
    QTable,
    explore_rate,
    fd_gradient,
    ogd_step,
    q_update,
    select_epsilon_greedy,
    select_greedy,
)
from .runner import (
    EpisodeLog,
    RunConfig,
    StopReason,
    SwitchEvent,
    run_adhoc_convoy,
    run_dwell,
    run_episode_eval,
    run_episode_train,
    run_random_baseline,
)

__all__ = [
    "ARENA",
    "BehaviorId",
    "BehaviorParams",
    "BehaviorSpec",
    "BoxEnv",
    "ConfigError",
    "ConvoyEnv",
    "EnsembleState",
    "EpisodeLog",
    "ExperimentConfig",
    "InteractionGraph",
    "LearningConfig",
    "ParamMemory",
    "ParamSpace",
    "QTable",
    "RunConfig",
    "StopReason",
    "SwitchEvent",
    "active_backend",
    "centroid",
    "control",
    "default_library",
    "energy",
    "euler_step",
    "explore_rate",
    "fd_gradient",
    "load_config",
    "ogd_step",
    "project",
    "q_update",
    "radius_to_theta",
    "rotate",
    "run_adhoc_convoy",
    "run_dwell",
    "run_episode_eval",
    "run_episode_train",
    "run_random_baseline",
    "select_epsilon_greedy",
    "select_greedy",
    "theta_to_radius",
    "tuning_cost",
]
