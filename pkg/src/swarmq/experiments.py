"""Experiment orchestration: seeded training, evaluation, and comparisons.

Seeding discipline: every random stream is derived from the master seed
plus a stream tag and an episode index, so (a) reruns are bit-identical
and (b) evaluation modes share per-episode environment randomness
(initial robot positions and target disturbance) while drawing their own
policy randomness - a paired comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .behaviors import BehaviorSpec, default_library
from .config import ExperimentConfig
from .environments import BoxEnv, ConvoyEnv
from .learning import ParamMemory, QTable
from .runner import (
    EpisodeLog,
    run_adhoc_convoy,
    run_episode_eval,
    run_episode_train,
    run_random_baseline,
)

# Stream tags; never reuse an integer.
_TAG_QINIT = 0
_TAG_TRAIN_ENV = 1
_TAG_TRAIN_POLICY = 2
_TAG_EVAL_ENV = 3
_TAG_EVAL_POLICY_TRAINED = 4
_TAG_EVAL_POLICY_RANDOM = 5
_TAG_EVAL_POLICY_ADHOC = 6

EVAL_MODES = ("trained", "random", "adhoc")

_POLICY_TAGS = {
    "trained": _TAG_EVAL_POLICY_TRAINED,
    "random": _TAG_EVAL_POLICY_RANDOM,
    "adhoc": _TAG_EVAL_POLICY_ADHOC,
}


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (master seed, tag, indices...)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


def make_env(cfg: ExperimentConfig):
    """Fresh mission environment in its episode-start configuration."""
    if cfg.mission == "convoy":
        c = cfg.convoy
        return ConvoyEnv(np.array(c.z0), np.array(c.v_z), sigma=c.sigma,
                         delta=c.delta, bins=c.bins, bin_width=c.bin_width,
                         delta_known=c.delta_known)
    b = cfg.box
    return BoxEnv(np.array(b.e0), np.array(b.goal), rho=b.rho, kappa=b.kappa,
                  grid=tuple(b.grid), goal_tol=b.goal_tol,
                  push_offset=b.push_offset, teleport=(b.coupling == "teleport"))


def make_library(cfg: ExperimentConfig) -> list[BehaviorSpec]:
    return default_library(cfg.n_robots, cfg.library.to_space())


@dataclass
class TrainResult:
    qtable: QTable
    episode_rewards: list[float]
    logs: list[EpisodeLog] = field(default_factory=list)


def train(cfg: ExperimentConfig, keep_logs: bool = False) -> TrainResult:
    """Run the configured number of training episodes from scratch."""
    lib = make_library(cfg)
    env0 = make_env(cfg)
    seed = cfg.run.seed
    q = QTable.random_init(env0.n_states, [s.id.name for s in lib],
                           env0.discretization_id, stream(seed, _TAG_QINIT))
    policy_rng = stream(seed, _TAG_TRAIN_POLICY)
    mem = None
    if not cfg.run.reset_param_memory:
        mem = ParamMemory.random_init(lib, policy_rng)
    rewards: list[float] = []
    logs: list[EpisodeLog] = []
    for episode in range(cfg.run.episodes):
        env_rng = stream(seed, _TAG_TRAIN_ENV, episode)
        log = run_episode_train(q, lib, make_env(cfg), cfg.run, cfg.learning,
                                episode, env_rng, policy_rng, mem=mem)
        rewards.append(log.total_reward)
        if keep_logs:
            logs.append(log)
    return TrainResult(q, rewards, logs)


@dataclass
class EvalResult:
    mode: str
    episode_rewards: list[float]
    logs: list[EpisodeLog] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.episode_rewards))

    @property
    def std(self) -> float:
        return float(np.std(self.episode_rewards))


def evaluate(cfg: ExperimentConfig, mode: str, qtable: QTable | None = None,
             keep_logs: bool = False) -> EvalResult:
    """Score one mode over the evaluation episodes.

    Environment streams are shared across modes (paired comparison);
    policy streams are per mode. ``trained`` needs the Q-table.
    """
    if mode not in EVAL_MODES:
        raise ValueError(f"mode must be one of {EVAL_MODES}, got {mode!r}")
    if mode == "adhoc" and cfg.mission != "convoy":
        raise ValueError("the ad-hoc baseline is only defined for the convoy mission")
    if mode == "trained" and qtable is None:
        raise ValueError("trained mode needs a Q-table")
    lib = make_library(cfg)
    seed = cfg.run.seed
    rewards: list[float] = []
    logs: list[EpisodeLog] = []
    for episode in range(cfg.run.eval_episodes):
        env_rng = stream(seed, _TAG_EVAL_ENV, episode)
        policy_rng = stream(seed, _POLICY_TAGS[mode], episode)
        env = make_env(cfg)
        if mode == "trained":
            log = run_episode_eval(qtable, lib, env, cfg.run, cfg.learning,
                                   env_rng, policy_rng)
        elif mode == "random":
            log = run_random_baseline(lib, env, cfg.run, cfg.learning,
                                      env_rng, policy_rng)
        else:
            log = run_adhoc_convoy(lib, env, cfg.run, cfg.learning, env_rng)
        rewards.append(log.total_reward)
        if keep_logs:
            logs.append(log)
    return EvalResult(mode, rewards, logs)


def compare_modes(cfg: ExperimentConfig, qtable: QTable,
                  keep_logs: bool = False) -> dict[str, EvalResult]:
    """Trained vs random (vs ad-hoc on convoy) over identical episode seeds."""
    modes = ["trained", "random"] + (["adhoc"] if cfg.mission == "convoy" else [])
    return {m: evaluate(cfg, m, qtable, keep_logs) for m in modes}
