"""Planar geometry, interaction graphs, and single-integrator ensemble dynamics.

Robots are points in the plane moving under velocity control
(``x_dot = u``), integrated with fixed-step forward Euler. Positions are
kept as an ``(N, 2)`` float64 array; a ``Vec2`` is any finite ``(2,)``
float64 array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Workspace rectangle [x_lo, x_hi] x [y_lo, y_hi] in meters. Robot positions
# are not clamped to it, but environment targets/goals live inside it.
ARENA = np.array([-1.6, 1.6, -1.0, 1.0])

DEFAULT_DT = 0.01


def vec2(x: float, y: float) -> np.ndarray:
    """Build a finite 2D vector, rejecting NaN/Inf components."""
    v = np.array([x, y], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector components: ({x}, {y})")
    return v


@dataclass(frozen=True)
class EnsembleState:
    """Positions of N robots plus the simulation clock.

    ``positions`` has shape (N, 2). N is fixed for a run; ``time`` never
    decreases across updates.
    """

    positions: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise ValueError(f"positions must be (N, 2) with N >= 1, got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions contain non-finite values")
        t = float(self.time)
        if not math.isfinite(t) or t < 0.0:
            raise ValueError(f"time must be finite and >= 0, got {self.time}")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "time", t)

    @property
    def n(self) -> int:
        return self.positions.shape[0]


def centroid(state: EnsembleState) -> np.ndarray:
    """Arithmetic mean of the robot positions."""
    return state.positions.mean(axis=0)


def rotate(v: np.ndarray, angle: float) -> np.ndarray:
    """Rotate a 2D vector counterclockwise by ``angle`` radians."""
    if not math.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle}")
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def euler_step(state: EnsembleState, controls: np.ndarray, dt: float) -> EnsembleState:
    """Advance every robot by one forward-Euler step: x' = x + dt * u."""
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    u = np.asarray(controls, dtype=np.float64)
    if u.shape != state.positions.shape:
        raise ValueError(f"controls shape {u.shape} != positions shape {state.positions.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("controls contain non-finite values")
    return EnsembleState(state.positions + dt * u, state.time + dt)


@dataclass(frozen=True)
class InteractionGraph:
    """Undirected interaction graph on robot indices 0..n-1.

    Edges are canonical (i, j) pairs with i < j; ``deltas`` optionally
    stores a desired separation per edge, aligned with ``edges``.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    deltas: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"graph needs n >= 1, got {self.n}")
        canon = []
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            e = (min(i, j), max(i, j))
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
            canon.append(e)
        object.__setattr__(self, "edges", tuple(canon))
        if self.deltas is not None:
            d = tuple(float(x) for x in self.deltas)
            if len(d) != len(self.edges):
                raise ValueError(f"{len(d)} deltas for {len(self.edges)} edges")
            if any(not math.isfinite(x) or x <= 0.0 for x in d):
                raise ValueError("edge separations must be finite and > 0")
            object.__setattr__(self, "deltas", d)

    def neighbors(self, i: int) -> set[int]:
        """All j sharing an edge with robot i."""
        if not (0 <= i < self.n):
            raise IndexError(f"robot index {i} out of range for n={self.n}")
        out = set()
        for a, b in self.edges:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return out

    def edge_array(self) -> np.ndarray:
        """Edges as an (E, 2) int64 array for the numeric kernels."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.array(self.edges, dtype=np.int64)

    def delta_array(self) -> np.ndarray:
        """Per-edge separations as float64, defaulting to 1.0."""
        if self.deltas is None:
            return np.ones(len(self.edges), dtype=np.float64)
        return np.array(self.deltas, dtype=np.float64)


def neighbors(graph: InteractionGraph, i: int) -> set[int]:
    return graph.neighbors(i)


def cycle_graph(n: int) -> InteractionGraph:
    """Ring 0-1-...-(n-1)-0; a single edge for n = 2."""
    if n < 2:
        raise ValueError(f"cycle graph needs n >= 2, got {n}")
    if n == 2:
        return InteractionGraph(2, ((0, 1),))
    return InteractionGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> InteractionGraph:
    """Chain 0-1-...-(n-1)."""
    if n < 2:
        raise ValueError(f"path graph needs n >= 2, got {n}")
    return InteractionGraph(n, tuple((i, i + 1) for i in range(n - 1)))


def fan_graph(n: int) -> InteractionGraph:
    """Polygon ring plus all chords from vertex 0: a triangulated fan."""
    if n < 3:
        raise ValueError(f"fan graph needs n >= 3, got {n}")
    edges = [(i, (i + 1) % n) for i in range(n)]
    edges += [(0, j) for j in range(2, n - 1)]
    return InteractionGraph(n, tuple(edges))


def regular_polygon_deltas(graph: InteractionGraph) -> tuple[float, ...]:
    """Inter-vertex distances of the unit-side regular n-gon, per edge.

    Vertices i and j of the regular polygon with side 1 are separated by
    sin(pi*k/n) / sin(pi/n) where k is the index gap around the ring.
    """
    n = graph.n
    out = []
    for i, j in graph.edges:
        k = min(abs(i - j), n - abs(i - j))
        out.append(math.sin(math.pi * k / n) / math.sin(math.pi / n))
    return tuple(out)
