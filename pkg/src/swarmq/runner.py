"""Dwell execution, behavior switching, episode loops, and baselines.

An episode partitions the mission horizon into dwells. Within a dwell one
behavior's controller runs while its parameters follow the projected
gradient flow of the tuning cost; the dwell ends when the behavior energy
drops below the interrupt threshold (honored only after ``dwell_min``),
when the dwell timeout expires, or when the mission horizon is reached.
Rewards and discretized observations happen at the switches only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import kernels
from .behaviors import (
    BehaviorId,
    BehaviorParams,
    BehaviorSpec,
    energy,
    project,
    radius_to_theta,
)
from .environments import (
    BoxEnv,
    ConvoyEnv,
    box_done,
    box_waypoint,
    env_from_vector,
    env_kind,
    env_params_array,
    env_state_vector,
    observe,
    reward,
)
from .geometry import ARENA, EnsembleState
from .learning import (
    LearningConfig,
    ParamMemory,
    QTable,
    explore_rate,
    q_update,
    select_epsilon_greedy,
    select_greedy,
)


class StopReason(str, Enum):
    """Why a dwell ended. HORIZON covers both the mission time cap and
    early mission completion (box delivered)."""

    ENERGY = "EnergyThreshold"
    TIMEOUT = "DwellTimeout"
    HORIZON = "HorizonEnd"


@dataclass(frozen=True)
class RunConfig:
    eps_energy: float = 0.05    # interrupt threshold on the behavior energy
    dwell_max: float = 20.0     # per-dwell timeout, seconds
    t_f: float = 40.0           # mission horizon, seconds
    dt: float = 0.01            # integrator step
    episodes: int = 200
    eval_episodes: int = 50
    seed: int = 0
    reset_param_memory: bool = True
    dwell_min: float = 0.0      # energy interrupt honored only after this
    record_trajectory: bool = False

    def validate(self, prefix: str = "run") -> None:
        checks = [
            (self.eps_energy > 0, "eps_energy", "must be > 0"),
            (self.dt > 0, "dt", "must be > 0"),
            (self.dt < self.dwell_max, "dt", "must be < dwell_max"),
            (self.dwell_max <= self.t_f, "dwell_max", "must be <= t_f"),
            (0 <= self.dwell_min <= self.dwell_max, "dwell_min",
             "must be in [0, dwell_max]"),
            (self.episodes >= 1, "episodes", "must be >= 1"),
            (self.eval_episodes >= 1, "eval_episodes", "must be >= 1"),
        ]
        for ok, name, msg in checks:
            value = getattr(self, name)
            if not ok or not math.isfinite(float(value)):
                raise ValueError(f"{prefix}.{name} {msg} (got {value})")


@dataclass(frozen=True)
class SwitchEvent:
    """One dwell: when the behavior was engaged, with what, and how it ended."""

    tau: float                     # switching time at which the dwell started
    t_end: float
    behavior: BehaviorId
    params_in: BehaviorParams
    params_out: BehaviorParams
    s: int
    s_next: int
    reward: float
    interrupted_by: StopReason
    energy_exit: float


@dataclass
class EpisodeLog:
    events: list[SwitchEvent]
    total_reward: float
    final_positions: np.ndarray
    trajectory: list[np.ndarray] | None = None

    def recompute_total(self) -> float:
        return float(sum(e.reward for e in self.events))


@dataclass
class DwellResult:
    steps: int
    t_start: float
    t_end: float
    params_in: BehaviorParams
    params_out: BehaviorParams
    reason: StopReason
    energy_exit: float
    energies: np.ndarray  # post-step energies, one per executed step


def _steps_in(duration: float, dt: float) -> int:
    return int(math.floor(duration / dt + 1e-9))


def run_dwell(spec: BehaviorSpec, mem: ParamMemory, state: EnsembleState, env,
              run_cfg: RunConfig, learn_cfg: LearningConfig,
              noise: np.ndarray | None = None,
              min_steps_floor: int = 0):
    """Execute one dwell; returns (state', env', DwellResult).

    The final parameters are written back to ``mem``. ``noise`` supplies
    the target disturbance, one standard-normal pair per step; omitted
    means no disturbance. With ``dwell_min == 0`` an entry state already
    below the energy threshold returns immediately (a zero-length dwell)
    unless ``min_steps_floor`` forces progress.
    """
    params_in = mem.get(spec.id)
    if not params_in.feasible_in(spec.space, tol=1e-12):
        raise ValueError(f"stored parameters for {spec.id.name} are infeasible")
    t0 = state.time
    horizon_steps = _steps_in(run_cfg.t_f - t0, run_cfg.dt)
    timeout_steps = _steps_in(run_cfg.dwell_max, run_cfg.dt)
    max_steps = min(horizon_steps, timeout_steps)
    min_steps = max(int(math.ceil(run_cfg.dwell_min / run_cfg.dt - 1e-9)), min_steps_floor)

    e_entry = energy(spec, state, params_in)
    if min_steps == 0 and e_entry <= run_cfg.eps_energy:
        res = DwellResult(0, t0, t0, params_in, params_in, StopReason.ENERGY,
                          e_entry, np.empty(0))
        return state, env, res
    if max_steps == 0:
        res = DwellResult(0, t0, t0, params_in, params_in, StopReason.HORIZON,
                          e_entry, np.empty(0))
        return state, env, res

    if noise is None:
        noise_arr = np.zeros((max_steps, 2))
    else:
        noise_arr = np.ascontiguousarray(noise[:max_steps], dtype=np.float64)
        if noise_arr.shape != (max_steps, 2):
            raise ValueError(f"noise must cover {max_steps} steps, got {noise_arr.shape}")

    pos = state.positions.copy()
    phi = params_in.phi.copy()
    env_vec = env_state_vector(env)
    snap = env.z if isinstance(env, ConvoyEnv) else box_waypoint(env, state, spec.space)
    energies = np.empty(max_steps)
    ang = spec.rotation_angle()
    steps, code, e_exit, theta = kernels.dwell_kernel(
        int(spec.id), pos, spec.graph.edge_array(), spec.delta_array(),
        spec.leader_index(), params_in.theta, phi, spec.space.bounds_array(),
        math.cos(ang), math.sin(ang), spec.ring_coeff(),
        env_kind(env), env_vec, env_params_array(env), snap[0], snap[1],
        noise_arr, ARENA, run_cfg.dt, run_cfg.eps_energy, learn_cfg.ogd_rate,
        max_steps, min_steps, np.empty_like(pos), energies)

    if code == kernels.EXIT_ENERGY:
        reason = StopReason.ENERGY
    elif code == kernels.EXIT_MISSION_DONE or steps >= horizon_steps:
        reason = StopReason.HORIZON
    else:
        reason = StopReason.TIMEOUT

    params_out = BehaviorParams(theta, phi)
    mem.put(spec.id, params_out)
    t1 = t0 + steps * run_cfg.dt
    new_state = EnsembleState(pos, t1)
    new_env = env_from_vector(env, env_vec)
    res = DwellResult(steps, t0, t1, params_in, params_out, reason, float(e_exit),
                      energies[:steps])
    return new_state, new_env, res


def initial_positions(n: int, rng: np.random.Generator) -> np.ndarray:
    """Robot starts drawn uniformly over the arena."""
    x = rng.uniform(ARENA[0], ARENA[1], size=n)
    y = rng.uniform(ARENA[2], ARENA[3], size=n)
    return np.column_stack([x, y])


def episode_noise(run_cfg: RunConfig, env, rng: np.random.Generator) -> np.ndarray | None:
    """Pre-draw the whole episode's disturbance so the environment follows
    the same path regardless of where dwell boundaries fall."""
    if isinstance(env, ConvoyEnv) and env.sigma > 0:
        return rng.standard_normal((_steps_in(run_cfg.t_f, run_cfg.dt) + 1, 2))
    return None


def _episode_loop(select, lib, env, run_cfg, learn_cfg, env_rng,
                  on_transition=None) -> EpisodeLog:
    """Shared switching loop.

    ``select(s, env) -> (behavior index, ParamMemory)`` picks the next
    behavior; ``on_transition(s, m, r, s_next)`` runs after each dwell.
    A dwell is started only while a full integrator step still fits
    before the horizon.
    """
    state = EnsembleState(initial_positions(lib[0].n, env_rng), 0.0)
    noise = episode_noise(run_cfg, env, env_rng)
    s = observe(env, state)
    events: list[SwitchEvent] = []
    trajectory = [state.positions.copy()] if run_cfg.record_trajectory else None
    step_idx = 0
    prev_zero = False
    while run_cfg.t_f - state.time >= run_cfg.dt - 1e-9:
        m, mem = select(s, env)
        spec = lib[m]
        dwell_noise = None if noise is None else noise[step_idx:]
        state, env, res = run_dwell(spec, mem, state, env, run_cfg, learn_cfg,
                                    dwell_noise,
                                    min_steps_floor=1 if prev_zero else 0)
        step_idx += res.steps
        prev_zero = res.steps == 0
        r = reward(env, state)
        s_next = observe(env, state)
        events.append(SwitchEvent(res.t_start, res.t_end, spec.id, res.params_in,
                                  res.params_out, s, s_next, r, res.reason,
                                  res.energy_exit))
        if on_transition is not None:
            on_transition(s, m, r, s_next)
        if trajectory is not None:
            trajectory.append(state.positions.copy())
        s = s_next
        if isinstance(env, BoxEnv) and box_done(env):
            break
    total = float(sum(e.reward for e in events))
    return EpisodeLog(events, total, state.positions.copy(), trajectory)


def run_episode_train(q: QTable, lib: list[BehaviorSpec], env, run_cfg: RunConfig,
                      learn_cfg: LearningConfig, episode: int,
                      env_rng: np.random.Generator, policy_rng: np.random.Generator,
                      mem: ParamMemory | None = None) -> EpisodeLog:
    """One training episode: epsilon-greedy switching with Q-updates.

    ``q`` is updated in place. ``mem`` persists across episodes when the
    caller passes it and ``reset_param_memory`` is off.
    """
    _check_dims(q, lib, env)
    if mem is None or run_cfg.reset_param_memory:
        mem = ParamMemory.random_init(lib, policy_rng)
    eps = explore_rate(learn_cfg, episode)

    def select(s, _env):
        return select_epsilon_greedy(q, s, eps, policy_rng), mem

    def on_transition(s, m, r, s_next):
        q_update(q, s, m, r, s_next, learn_cfg)

    return _episode_loop(select, lib, env, run_cfg, learn_cfg, env_rng, on_transition)


def run_episode_eval(q: QTable, lib: list[BehaviorSpec], env, run_cfg: RunConfig,
                     learn_cfg: LearningConfig, env_rng: np.random.Generator,
                     policy_rng: np.random.Generator) -> EpisodeLog:
    """Greedy rollout of a trained table; no updates, q is read-only."""
    _check_dims(q, lib, env)
    mem = ParamMemory.random_init(lib, policy_rng)

    def select(s, _env):
        return select_greedy(q, s), mem

    return _episode_loop(select, lib, env, run_cfg, learn_cfg, env_rng)


def run_adhoc_convoy(lib: list[BehaviorSpec], env, run_cfg: RunConfig,
                     learn_cfg: LearningConfig,
                     env_rng: np.random.Generator) -> EpisodeLog:
    """Ideal convoy reference: cyclic pursuit re-pinned at every switch to
    circle the current target position at the ring distance.

    Parameters are held at the ideal values within each dwell (no gradient
    flow: the baseline already knows them).
    """
    if not isinstance(env, ConvoyEnv):
        raise TypeError("the ad-hoc baseline is defined for the convoy mission only")
    spec = _find(lib, BehaviorId.CYCLIC_PURSUIT)
    m = lib.index(spec)
    theta = radius_to_theta(env.delta, spec.n)
    mem = ParamMemory()

    def select(s, live_env):
        mem.put(spec.id, project(BehaviorParams(theta, live_env.z.copy()), spec.space))
        return m, mem

    return _episode_loop(select, lib, env, run_cfg, _frozen_params(learn_cfg), env_rng)


def run_random_baseline(lib: list[BehaviorSpec], env, run_cfg: RunConfig,
                        learn_cfg: LearningConfig, env_rng: np.random.Generator,
                        policy_rng: np.random.Generator) -> EpisodeLog:
    """Uniformly random behavior and parameters at every switch; the
    sampled parameters stay fixed within the dwell."""
    mem = ParamMemory()

    def select(s, _env):
        m = int(policy_rng.integers(len(lib)))
        sp = lib[m].space
        theta = policy_rng.uniform(sp.theta_lo, sp.theta_hi)
        phi = np.array([policy_rng.uniform(sp.phi_lo[0], sp.phi_hi[0]),
                        policy_rng.uniform(sp.phi_lo[1], sp.phi_hi[1])])
        mem.put(lib[m].id, BehaviorParams(theta, phi))
        return m, mem

    return _episode_loop(select, lib, env, run_cfg, _frozen_params(learn_cfg), env_rng)


def _frozen_params(learn_cfg: LearningConfig) -> LearningConfig:
    """Disable the parameter gradient flow (baselines pick, then hold)."""
    return replace(learn_cfg, ogd_rate=0.0)


def _find(lib: list[BehaviorSpec], behavior: BehaviorId) -> BehaviorSpec:
    for spec in lib:
        if spec.id == behavior:
            return spec
    raise ValueError(f"library has no {behavior.name}")


def _check_dims(q: QTable, lib: list[BehaviorSpec], env) -> None:
    if q.n_behaviors != len(lib):
        raise ValueError(f"Q-table has M={q.n_behaviors} but library has {len(lib)}")
    if q.n_states != env.n_states:
        raise ValueError(f"Q-table has S={q.n_states} but environment has {env.n_states}")
