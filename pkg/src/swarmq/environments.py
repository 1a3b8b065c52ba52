"""The two missions: convoy protection and simplified box transport.

Each environment owns the mission state (a drifting target, or a box and
its destination), advances it, scores the robots, discretizes what the
robots observe at switching times, and defines the parameter-tuning cost
whose gradient flow adjusts (theta, phi) during dwells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .behaviors import BehaviorParams, BehaviorSpec, ParamSpace
from .geometry import ARENA, EnsembleState, centroid


@dataclass(frozen=True)
class ConvoyEnv:
    """Moving target to be ringed at distance ``delta``.

    The target drifts with velocity ``v_z`` plus white noise of strength
    ``sigma`` and reflects off the arena walls. Observations are the
    centroid-to-target distance, binned.
    """

    z: np.ndarray
    v_z: np.ndarray
    sigma: float = 0.01
    delta: float = 0.5
    bins: int = 10
    bin_width: float = 0.3
    delta_known: bool = True  # expose delta to the tuning cost

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64).reshape(2)
        v = np.asarray(self.v_z, dtype=np.float64).reshape(2)
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(v))):
            raise ValueError("non-finite target state")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "v_z", v)
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.bins < 2:
            raise ValueError(f"bins must be >= 2, got {self.bins}")
        if self.bin_width <= 0:
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")

    @property
    def n_states(self) -> int:
        return self.bins

    @property
    def discretization_id(self) -> str:
        return f"convoy-bins{self.bins}-w{self.bin_width:g}"


def convoy_step(env: ConvoyEnv, dt: float, rng: np.random.Generator | None) -> ConvoyEnv:
    """Advance the target one step; reflect position (and flip velocity)
    at the arena walls."""
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    xi = rng.standard_normal(2) if rng is not None and env.sigma > 0 else np.zeros(2)
    z = env.z + dt * (env.v_z + env.sigma * xi)
    v = env.v_z.copy()
    for ax in range(2):
        lo, hi = ARENA[2 * ax], ARENA[2 * ax + 1]
        if z[ax] < lo:
            z[ax] = 2 * lo - z[ax]
            v[ax] = -v[ax]
        elif z[ax] > hi:
            z[ax] = 2 * hi - z[ax]
            v[ax] = -v[ax]
        z[ax] = min(max(z[ax], lo), hi)
    return replace(env, z=z, v_z=v)


def convoy_observe(env: ConvoyEnv, state: EnsembleState) -> int:
    """Binned centroid-to-target distance, clamped to the last bin."""
    d = float(np.linalg.norm(centroid(state) - env.z))
    return min(int(d / env.bin_width), env.bins - 1)


def convoy_reward(env: ConvoyEnv, state: EnsembleState) -> float:
    """Negative squared centroid error minus mean squared ring error."""
    xbar = centroid(state)
    r = -float(np.sum((env.z - xbar) ** 2))
    dists = np.linalg.norm(state.positions - env.z, axis=1)
    r -= float(np.mean((dists - env.delta) ** 2))
    return r


@dataclass(frozen=True)
class BoxEnv:
    """Box to be pushed to ``goal``; it co-moves with the robot centroid
    whenever some robot is within the detection radius ``rho``."""

    e: np.ndarray
    goal: np.ndarray
    rho: float = 0.2
    kappa: float = 0.1
    grid: tuple[int, int] = (8, 5)
    goal_tol: float = 0.05
    push_offset: float = 0.4     # march waypoint distance ahead of the box
    teleport: bool = False       # alternative coupling: box jumps to centroid

    def __post_init__(self):
        e = np.asarray(self.e, dtype=np.float64).reshape(2)
        g = np.asarray(self.goal, dtype=np.float64).reshape(2)
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(g))):
            raise ValueError("non-finite box state")
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "goal", g)
        nx, ny = self.grid
        if self.rho <= 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if nx < 1 or ny < 1 or nx * ny < 2:
            raise ValueError(f"grid must have >= 2 cells, got {self.grid}")
        if self.goal_tol <= 0:
            raise ValueError(f"goal_tol must be > 0, got {self.goal_tol}")
        if self.push_offset < 0:
            raise ValueError(f"push_offset must be >= 0, got {self.push_offset}")

    @property
    def n_states(self) -> int:
        return self.grid[0] * self.grid[1]

    @property
    def discretization_id(self) -> str:
        return f"box-grid{self.grid[0]}x{self.grid[1]}"


def box_step(env: BoxEnv, x_before: EnsembleState, x_after: EnsembleState) -> BoxEnv:
    """Couple the box to the robots over one robot step.

    Untouched (all robots farther than rho at the pre-step positions) the
    box stays put; otherwise it shifts by the centroid displacement, or
    jumps onto the centroid in teleport mode.
    """
    if x_before.n != x_after.n:
        raise ValueError("states disagree on robot count")
    mind = float(np.min(np.linalg.norm(x_before.positions - env.e, axis=1)))
    if mind > env.rho:
        return env
    if env.teleport:
        return replace(env, e=centroid(x_after))
    return replace(env, e=env.e + (centroid(x_after) - centroid(x_before)))


def box_observe(env: BoxEnv, state: EnsembleState) -> int:
    """Row-major arena grid cell of the box, clamped at the borders."""
    nx, ny = env.grid
    fx = (env.e[0] - ARENA[0]) / (ARENA[1] - ARENA[0])
    fy = (env.e[1] - ARENA[2]) / (ARENA[3] - ARENA[2])
    ix = min(max(int(fx * nx), 0), nx - 1)
    iy = min(max(int(fy * ny), 0), ny - 1)
    return iy * nx + ix


def box_reward(env: BoxEnv, state: EnsembleState | None = None) -> float:
    """Time penalty plus remaining distance, negated."""
    return -(env.kappa + float(np.linalg.norm(env.e - env.goal)))


def box_done(env: BoxEnv) -> bool:
    return float(np.linalg.norm(env.e - env.goal)) <= env.goal_tol


def env_kind(env) -> int:
    if isinstance(env, ConvoyEnv):
        return kernels.ENV_CONVOY
    if isinstance(env, BoxEnv):
        return kernels.ENV_BOX
    raise TypeError(f"unknown environment {type(env).__name__}")


def observe(env, state: EnsembleState) -> int:
    return convoy_observe(env, state) if isinstance(env, ConvoyEnv) else box_observe(env, state)


def reward(env, state: EnsembleState) -> float:
    return convoy_reward(env, state) if isinstance(env, ConvoyEnv) else box_reward(env, state)


#: Behavior scale aimed for while manipulating the box, as a fraction of
#: the detection radius; well below 1 keeps the cluster compact enough to
#: stay in contact while marching.
HUG_FRACTION = 0.3

#: Contact margin (fraction of the detection radius) below which the box
#: rides inside the cluster and centroid displacement transfers exactly.
GLUE_FRACTION = 0.5

#: Orbit radius for getting behind the box without touching it.
ORBIT_RADIUS = 0.5

#: Maximum orbit bearing change per dwell, radians.
ORBIT_STEP = 0.9


def env_params_array(env) -> np.ndarray:
    """Constant environment parameters packed for the dwell kernel."""
    if isinstance(env, ConvoyEnv):
        return np.array([env.sigma, env.delta, 1.0 if env.delta_known else 0.0,
                         0.0, 0.0, 0.0, 0.0])
    return np.array([env.goal[0], env.goal[1], env.rho, env.push_offset,
                     1.0 if env.teleport else 0.0, HUG_FRACTION * env.rho,
                     env.goal_tol])


def env_state_vector(env) -> np.ndarray:
    """Mutable environment state packed for the dwell kernel."""
    if isinstance(env, ConvoyEnv):
        return np.array([env.z[0], env.z[1], env.v_z[0], env.v_z[1]])
    return np.array([env.e[0], env.e[1], 0.0, 0.0])


def env_from_vector(env, vec: np.ndarray):
    """Rebuild an environment after the kernel advanced its state vector."""
    if isinstance(env, ConvoyEnv):
        return replace(env, z=vec[:2].copy(), v_z=vec[2:4].copy())
    return replace(env, e=vec[:2].copy())


def _capped(v: np.ndarray, length: float) -> np.ndarray:
    n = float(np.linalg.norm(v))
    return v if n <= length else v * (length / n)


def box_waypoint(env: BoxEnv, state: EnsembleState,
                 space: "ParamSpace | None" = None) -> np.ndarray:
    """Where the tuning cost sends phi for the box mission.

    The box co-moves with the robot centroid while touched, so contact
    ratchets: the flock cannot close in on a touched box, only sweep it
    ahead of itself. Cases, resolved once per dwell:

    * delivered: hold position.
    * glued (a robot well inside the detection radius): the box rides the
      cluster; advance the centroid by what the box still needs.
    * behind (flock on the far side of the box from the goal): sweep
      straight at the goal; the surfing box crosses it mid-dwell and the
      simulation stops there.
    * touching but not behind: retreat radially; moving away releases the
      ratchet immediately, circling while touched would broom the box.
    * otherwise: orbit around the box at a safe radius to get behind it
      without touching it.

    Passing the behavior's parameter ``space`` keeps waypoints inside the
    reachable phi box (orbit arcs then slide along its walls).
    """
    e, goal = env.e, env.goal
    xbar = centroid(state)
    to_goal = goal - e
    dist_goal = float(np.linalg.norm(to_goal))
    mind = float(np.min(np.linalg.norm(state.positions - e, axis=1)))
    if dist_goal <= env.goal_tol:
        wp = xbar.copy()  # done; hold position
    elif mind <= GLUE_FRACTION * env.rho:
        wp = xbar + _capped(to_goal, env.push_offset)
    else:
        away = -to_goal / dist_goal
        rel = xbar - e
        d_rel = float(np.linalg.norm(rel))
        heading = rel / d_rel if d_rel > 1e-9 else away
        behind = d_rel > 1e-9 and float(rel @ away) > 0.25 * d_rel and d_rel <= 0.9
        if behind:
            wp = e + _capped(to_goal, env.push_offset)
        elif mind <= env.rho:
            wp = e + ORBIT_RADIUS * heading
        else:
            beta = math.atan2(heading[1], heading[0])
            beta_target = math.atan2(away[1], away[0])
            diff = math.remainder(beta_target - beta, 2.0 * math.pi)
            beta += min(max(diff, -ORBIT_STEP), ORBIT_STEP)
            wp = e + ORBIT_RADIUS * np.array([math.cos(beta), math.sin(beta)])
    if space is not None:
        wp[0] = min(max(wp[0], space.phi_lo[0]), space.phi_hi[0])
        wp[1] = min(max(wp[1], space.phi_lo[1]), space.phi_hi[1])
    return wp


def tuning_cost(env, spec: BehaviorSpec, state: EnsembleState,
                params: BehaviorParams) -> tuple[float, float, np.ndarray]:
    """Parameter cost and its gradient for one behavior in one mission.

    Convoy: squared distance from phi to the target plus squared mismatch
    between the behavior's characteristic scale and the ring distance.
    Box: squared distance from phi to the waypoint (see ``box_waypoint``,
    clamped to the phi box), plus squared mismatch between the behavior
    scale and a fraction of the detection radius so the ensemble hugs the
    box while it marches.

    Callers freeze ``env`` and the waypoint at dwell entry; convoy uses
    the target position at the switch.
    """
    snap = env.z if isinstance(env, ConvoyEnv) else box_waypoint(env, state, spec.space)
    cost, g_theta, gpx, gpy = kernels.tuning_grad_kernel(
        int(spec.id), state.positions, env_kind(env), snap[0], snap[1],
        env_params_array(env), params.theta, params.phi[0], params.phi[1],
        spec.ring_coeff(),
        spec.space.phi_lo[0], spec.space.phi_hi[0],
        spec.space.phi_lo[1], spec.space.phi_hi[1])
    return float(cost), float(g_theta), np.array([gpx, gpy])
