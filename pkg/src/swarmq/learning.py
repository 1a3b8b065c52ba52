"""Tabular Q-learning plus projected gradient descent on behavior parameters.

The selection table is a dense (S, M) array over discrete environment
states and library entries. Parameter tuning discretizes the continuous
gradient flow ``p_dot = -grad C`` with forward Euler at the simulation
step and projects back onto the feasible box after every update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .behaviors import BehaviorId, BehaviorParams, BehaviorSpec, ParamSpace, project


@dataclass(frozen=True)
class LearningConfig:
    alpha: float = 0.1         # temporal-difference step size, in (0, 1]
    gamma: float = 1.0         # discount, in [0, 1]; 1 is fine for finite episodes
    eps0: float = 1.0          # initial exploration probability
    eps_decay: float = 0.995   # multiplicative exploration decay per episode
    ogd_rate: float = 1.0      # gain of the parameter gradient flow
    fd_step: float = 1e-4      # finite-difference step for numeric gradients

    def validate(self, prefix: str = "learning") -> None:
        checks = [
            (0.0 < self.alpha <= 1.0, "alpha", "must be in (0, 1]"),
            (0.0 <= self.gamma <= 1.0, "gamma", "must be in [0, 1]"),
            (0.0 <= self.eps0 <= 1.0, "eps0", "must be in [0, 1]"),
            (0.0 < self.eps_decay <= 1.0, "eps_decay", "must be in (0, 1]"),
            (self.ogd_rate > 0.0, "ogd_rate", "must be > 0"),
            (self.fd_step > 0.0, "fd_step", "must be > 0"),
        ]
        for ok, name, msg in checks:
            value = getattr(self, name)
            if not (ok and math.isfinite(float(value))):
                raise ValueError(f"{prefix}.{name} {msg} (got {value})")


@dataclass
class QTable:
    """State-behavior value table with the metadata needed to reuse it."""

    values: np.ndarray
    behavior_ids: tuple[str, ...]
    discretization_id: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"values must be (S, M), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("Q-table contains non-finite entries")
        if len(self.behavior_ids) != v.shape[1]:
            raise ValueError(f"{len(self.behavior_ids)} behavior ids for M={v.shape[1]}")
        self.values = v
        self.behavior_ids = tuple(str(b) for b in self.behavior_ids)

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    @property
    def n_behaviors(self) -> int:
        return self.values.shape[1]

    @classmethod
    def random_init(cls, n_states: int, behavior_ids, discretization_id: str,
                    rng: np.random.Generator, span: float = 0.1) -> "QTable":
        """Uniform init on [-span, span]; a bounded stand-in for arbitrary init."""
        values = rng.uniform(-span, span, size=(n_states, len(behavior_ids)))
        return cls(values, tuple(behavior_ids), discretization_id)


def select_greedy(q: QTable, s: int) -> int:
    """Argmax over row s; ties go to the lowest index."""
    if not (0 <= s < q.n_states):
        raise IndexError(f"state {s} out of range for S={q.n_states}")
    return int(np.argmax(q.values[s]))


def select_epsilon_greedy(q: QTable, s: int, eps_explore: float,
                          rng: np.random.Generator) -> int:
    """Uniform behavior with probability eps_explore, else greedy."""
    if not (0.0 <= eps_explore <= 1.0):
        raise ValueError(f"eps_explore must be in [0, 1], got {eps_explore}")
    if rng.random() < eps_explore:
        return int(rng.integers(q.n_behaviors))
    return select_greedy(q, s)


def explore_rate(cfg: LearningConfig, episode: int) -> float:
    """Exponentially decaying exploration probability."""
    if episode < 0:
        raise ValueError(f"episode must be >= 0, got {episode}")
    return cfg.eps0 * cfg.eps_decay ** episode


def q_update(q: QTable, s: int, m: int, reward: float, s_next: int,
             cfg: LearningConfig) -> float:
    """One temporal-difference update of entry (s, m); returns the new value.

    Q(s,m) += alpha * (r + gamma * max_j Q(s',j) - Q(s,m)). No other entry
    is touched.
    """
    if not (0 <= s < q.n_states and 0 <= s_next < q.n_states):
        raise IndexError(f"state index out of range: s={s}, s_next={s_next}")
    if not (0 <= m < q.n_behaviors):
        raise IndexError(f"behavior index {m} out of range")
    if not math.isfinite(reward):
        raise ValueError(f"reward must be finite, got {reward}")
    target = reward + cfg.gamma * float(np.max(q.values[s_next]))
    new = q.values[s, m] + cfg.alpha * (target - q.values[s, m])
    q.values[s, m] = new
    return float(new)


def ogd_step(params: BehaviorParams, grad_theta: float, grad_phi: np.ndarray,
             dt: float, cfg: LearningConfig, space: ParamSpace) -> BehaviorParams:
    """Euler-discretized gradient flow followed by projection."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    g_phi = np.asarray(grad_phi, dtype=np.float64).reshape(2)
    if not (math.isfinite(grad_theta) and np.all(np.isfinite(g_phi))):
        raise ValueError("non-finite gradient")
    step = dt * cfg.ogd_rate
    raw = BehaviorParams(params.theta - step * grad_theta, params.phi - step * g_phi)
    return project(raw, space)


def fd_gradient(cost: Callable[[BehaviorParams], float], params: BehaviorParams,
                h: float) -> tuple[float, np.ndarray]:
    """Central differences of ``cost`` in (theta, phi), step h per coordinate."""
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")

    def at(theta, phi):
        v = float(cost(BehaviorParams(theta, phi)))
        if not math.isfinite(v):
            raise ValueError("cost evaluated to a non-finite value")
        return v

    t, phi = params.theta, params.phi
    g_theta = (at(t + h, phi) - at(t - h, phi)) / (2 * h)
    g_phi = np.empty(2)
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        g_phi[k] = (at(t, phi + e) - at(t, phi - e)) / (2 * h)
    return g_theta, g_phi


@dataclass
class ParamMemory:
    """Per-behavior parameters persisted across dwells within a run."""

    entries: dict[BehaviorId, BehaviorParams] = field(default_factory=dict)

    def get(self, behavior: BehaviorId) -> BehaviorParams:
        return self.entries[behavior]

    def put(self, behavior: BehaviorId, params: BehaviorParams) -> None:
        self.entries[behavior] = params

    @classmethod
    def random_init(cls, library: list[BehaviorSpec], rng: np.random.Generator) -> "ParamMemory":
        """theta ~ U(Theta), phi ~ U(Phi) independently per behavior."""
        mem = cls()
        for spec in library:
            sp = spec.space
            theta = rng.uniform(sp.theta_lo, sp.theta_hi)
            phi = np.array([rng.uniform(sp.phi_lo[0], sp.phi_hi[0]),
                            rng.uniform(sp.phi_lo[1], sp.phi_hi[1])])
            mem.put(spec.id, BehaviorParams(theta, phi))
        return mem


def toy_mdp() -> tuple[np.ndarray, np.ndarray]:
    """A 3-state / 2-action deterministic MDP for checking the Q-update.

    Returns (transitions, rewards), both (3, 2): taking action a in state
    s lands in transitions[s, a] and pays rewards[s, a].
    """
    transitions = np.array([[1, 2], [2, 0], [0, 1]], dtype=np.int64)
    rewards = np.array([[0.0, 0.1], [1.0, 0.0], [0.2, 0.5]])
    return transitions, rewards
