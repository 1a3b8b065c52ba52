"""Library of weighted-consensus behaviors with tunable parameters.

Each behavior bundles a controller, a matching energy function, an
interaction graph, and the feasible parameter box (a scalar ``theta``
shaping the geometry plus a planar ``phi`` acting as goal or circle
center). Four behaviors are exact gradient flows of their energy; cyclic
pursuit circulates around ``phi`` and uses the mean squared distance to
its target circle as the energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np

from . import kernels
from .geometry import (
    EnsembleState,
    InteractionGraph,
    cycle_graph,
    fan_graph,
    path_graph,
    regular_polygon_deltas,
)


class BehaviorId(IntEnum):
    STATIC_FORMATION = kernels.KIND_STATIC_FORMATION
    FORMATION_WITH_LEADER = kernels.KIND_FORMATION_WITH_LEADER
    CYCLIC_PURSUIT = kernels.KIND_CYCLIC_PURSUIT
    LEADER_FOLLOWER = kernels.KIND_LEADER_FOLLOWER
    TRIANGULATION_COVERAGE = kernels.KIND_TRIANGULATION_COVERAGE


#: Behaviors whose controller is exactly the negative energy gradient.
GRADIENT_FLOW_IDS = (
    BehaviorId.STATIC_FORMATION,
    BehaviorId.FORMATION_WITH_LEADER,
    BehaviorId.LEADER_FOLLOWER,
    BehaviorId.TRIANGULATION_COVERAGE,
)

_LEADER_IDS = (BehaviorId.FORMATION_WITH_LEADER, BehaviorId.LEADER_FOLLOWER)
_DELTA_IDS = (BehaviorId.STATIC_FORMATION, BehaviorId.FORMATION_WITH_LEADER)


@dataclass(frozen=True)
class ParamSpace:
    """Feasible box for (theta, phi): theta in [lo, hi], phi per-axis."""

    theta_lo: float = 0.05
    theta_hi: float = 1.1
    phi_lo: tuple[float, float] = (-1.0, -1.0)
    phi_hi: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if not (math.isfinite(self.theta_lo) and math.isfinite(self.theta_hi)):
            raise ValueError("theta bounds must be finite")
        if self.theta_lo > self.theta_hi:
            raise ValueError(f"theta_lo {self.theta_lo} > theta_hi {self.theta_hi}")
        lo = tuple(float(v) for v in self.phi_lo)
        hi = tuple(float(v) for v in self.phi_hi)
        if len(lo) != 2 or len(hi) != 2:
            raise ValueError("phi bounds must be 2D")
        for a, b in zip(lo, hi):
            if not (math.isfinite(a) and math.isfinite(b)) or a > b:
                raise ValueError(f"bad phi bounds: {lo} .. {hi}")
        object.__setattr__(self, "phi_lo", lo)
        object.__setattr__(self, "phi_hi", hi)

    def bounds_array(self) -> np.ndarray:
        """[theta_lo, theta_hi, phix_lo, phix_hi, phiy_lo, phiy_hi]."""
        return np.array([self.theta_lo, self.theta_hi,
                         self.phi_lo[0], self.phi_hi[0],
                         self.phi_lo[1], self.phi_hi[1]])


@dataclass(frozen=True)
class BehaviorParams:
    """A concrete (theta, phi) choice for one behavior."""

    theta: float
    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.float64).reshape(2)
        if not (math.isfinite(self.theta) and np.all(np.isfinite(phi))):
            raise ValueError(f"non-finite parameters: theta={self.theta}, phi={self.phi}")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "phi", phi)

    def feasible_in(self, space: ParamSpace, tol: float = 0.0) -> bool:
        ok = space.theta_lo - tol <= self.theta <= space.theta_hi + tol
        for k in range(2):
            ok = ok and (space.phi_lo[k] - tol <= self.phi[k] <= space.phi_hi[k] + tol)
        return bool(ok)


@dataclass(frozen=True)
class BehaviorSpec:
    """One library entry: behavior kind, graph, parameter box, extras.

    ``leader`` is required exactly for the two leader behaviors;
    ``deltas`` (per-edge separations of the target shape, aligned with
    ``graph.edges``) exactly for the two formation behaviors.
    """

    id: BehaviorId
    graph: InteractionGraph
    space: ParamSpace
    leader: int | None = None
    deltas: tuple[float, ...] | None = None

    def __post_init__(self):
        if (self.leader is not None) != (self.id in _LEADER_IDS):
            raise ValueError(f"{self.id.name}: leader must be present iff the behavior has one")
        if self.leader is not None and not (0 <= self.leader < self.graph.n):
            raise ValueError(f"leader index {self.leader} out of range")
        if (self.deltas is not None) != (self.id in _DELTA_IDS):
            raise ValueError(f"{self.id.name}: deltas must be present iff the behavior is a formation")
        if self.deltas is not None:
            d = tuple(float(x) for x in self.deltas)
            if len(d) != len(self.graph.edges):
                raise ValueError(f"{len(d)} deltas for {len(self.graph.edges)} edges")
            if any(not math.isfinite(x) or x <= 0 for x in d):
                raise ValueError("deltas must be finite and > 0")
            object.__setattr__(self, "deltas", d)

    @property
    def n(self) -> int:
        return self.graph.n

    def delta_array(self) -> np.ndarray:
        if self.deltas is None:
            return np.ones(len(self.graph.edges))
        return np.array(self.deltas, dtype=np.float64)

    def leader_index(self) -> int:
        """Leader as an int for the kernels, -1 when absent."""
        return -1 if self.leader is None else int(self.leader)

    def ring_coeff(self) -> float:
        """Radius per unit theta for cyclic pursuit: 1 / (2 sin(pi/N))."""
        return 1.0 / (2.0 * math.sin(math.pi / self.n))

    def rotation_angle(self) -> float:
        """Pursuit rotation; pi/N keeps the on-circle chord tangential."""
        return math.pi / self.n


def project(params: BehaviorParams, space: ParamSpace) -> BehaviorParams:
    """Componentwise clamp of (theta, phi) onto the feasible box."""
    theta = min(max(params.theta, space.theta_lo), space.theta_hi)
    phi = np.array([
        min(max(params.phi[0], space.phi_lo[0]), space.phi_hi[0]),
        min(max(params.phi[1], space.phi_lo[1]), space.phi_hi[1]),
    ])
    return BehaviorParams(theta, phi)


def radius_to_theta(r: float, n: int) -> float:
    """Chord-length parameter of the n-robot circle with radius r."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if r <= 0:
        raise ValueError(f"radius must be > 0, got {r}")
    return 2.0 * r * math.sin(math.pi / n)


def theta_to_radius(theta: float, n: int) -> float:
    """Circle radius traced by n robots with chord-length parameter theta."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return theta / (2.0 * math.sin(math.pi / n))


def _check_inputs(spec: BehaviorSpec, state: EnsembleState, params: BehaviorParams):
    if state.n != spec.n:
        raise ValueError(f"state has {state.n} robots, spec graph has {spec.n}")
    if not params.feasible_in(spec.space, tol=1e-12):
        raise ValueError(f"params {params} infeasible in {spec.space}")


def control(spec: BehaviorSpec, state: EnsembleState, params: BehaviorParams) -> np.ndarray:
    """Velocity commands of all robots under this behavior, shape (N, 2)."""
    _check_inputs(spec, state, params)
    out = np.empty_like(state.positions)
    ang = spec.rotation_angle()
    kernels.control_kernel(
        int(spec.id), state.positions, spec.graph.edge_array(),
        spec.delta_array(), spec.leader_index(),
        params.theta, params.phi[0], params.phi[1],
        math.cos(ang), math.sin(ang), spec.ring_coeff(), out)
    return out


def energy(spec: BehaviorSpec, state: EnsembleState, params: BehaviorParams) -> float:
    """Nonnegative progress measure; the interrupt fires when it is small."""
    _check_inputs(spec, state, params)
    return float(kernels.energy_kernel(
        int(spec.id), state.positions, spec.graph.edge_array(),
        spec.delta_array(), spec.leader_index(),
        params.theta, params.phi[0], params.phi[1], spec.ring_coeff()))


def default_library(n: int = 5, space: ParamSpace | None = None) -> list[BehaviorSpec]:
    """The five stock behaviors on n robots.

    Formations use the triangulated polygon fan with unit-side regular
    n-gon separations (scaled by theta); cyclic pursuit the plain ring;
    leader-follower the chain; coverage the fan with all separations theta.
    """
    if n < 2:
        raise ValueError(f"library needs n >= 2, got {n}")
    if space is None:
        space = ParamSpace()
    form_graph = fan_graph(n) if n >= 3 else cycle_graph(n)
    form_deltas = regular_polygon_deltas(form_graph)
    return [
        BehaviorSpec(BehaviorId.STATIC_FORMATION, form_graph, space, deltas=form_deltas),
        BehaviorSpec(BehaviorId.FORMATION_WITH_LEADER, form_graph, space, leader=0, deltas=form_deltas),
        BehaviorSpec(BehaviorId.CYCLIC_PURSUIT, cycle_graph(n), space),
        BehaviorSpec(BehaviorId.LEADER_FOLLOWER, path_graph(n), space, leader=0),
        BehaviorSpec(BehaviorId.TRIANGULATION_COVERAGE, fan_graph(n) if n >= 3 else cycle_graph(n), space),
    ]


def with_space(spec: BehaviorSpec, space: ParamSpace) -> BehaviorSpec:
    return replace(spec, space=space)
