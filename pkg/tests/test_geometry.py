import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmq.geometry import (
    ARENA,
    EnsembleState,
    InteractionGraph,
    centroid,
    cycle_graph,
    euler_step,
    fan_graph,
    neighbors,
    path_graph,
    regular_polygon_deltas,
    rotate,
    vec2,
)


def state_of(*points, time=0.0):
    return EnsembleState(np.array(points, dtype=float), time)


class TestCentroid:
    def test_single_robot(self):
        assert np.allclose(centroid(state_of((0, 0))), [0, 0])

    def test_symmetric_pair(self):
        assert np.allclose(centroid(state_of((1, 0), (-1, 0))), [0, 0])

    def test_three_robots(self):
        assert np.allclose(centroid(state_of((1, 0), (0, 1), (2, 2))), [1, 1])


class TestNeighbors:
    def test_cycle(self):
        g = cycle_graph(3)
        assert neighbors(g, 0) == {1, 2}

    def test_empty_edges(self):
        g = InteractionGraph(3, ())
        assert neighbors(g, 1) == set()

    def test_star_center(self):
        g = InteractionGraph(4, ((0, 1), (0, 2), (0, 3)))
        assert neighbors(g, 0) == {1, 2, 3}

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            cycle_graph(3).neighbors(3)

    def test_symmetry(self):
        g = fan_graph(6)
        for i in range(6):
            for j in g.neighbors(i):
                assert i in g.neighbors(j)


class TestGraphValidation:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            InteractionGraph(3, ((1, 1),))

    def test_out_of_range_edge(self):
        with pytest.raises(ValueError):
            InteractionGraph(2, ((0, 2),))

    def test_duplicate_rejected(self):
        with pytest.raises(ValueError):
            InteractionGraph(3, ((0, 1), (1, 0)))

    def test_edge_array_canonical(self):
        g = InteractionGraph(3, ((2, 0), (1, 2)))
        assert g.edges == ((0, 2), (1, 2))

    def test_pentagon_deltas(self):
        g = fan_graph(5)
        d = dict(zip(g.edges, regular_polygon_deltas(g)))
        golden = (1 + math.sqrt(5)) / 2
        assert d[(0, 1)] == pytest.approx(1.0)
        assert d[(0, 2)] == pytest.approx(golden, abs=1e-12)


class TestEulerStep:
    def test_basic(self):
        s = euler_step(state_of((0, 0)), np.array([[1.0, 0.0]]), 0.1)
        assert np.allclose(s.positions, [[0.1, 0]])
        assert s.time == pytest.approx(0.1)

    def test_zero_control(self):
        s0 = state_of((0.3, -0.4), (1, 1))
        s1 = euler_step(s0, np.zeros((2, 2)), 0.05)
        assert np.array_equal(s1.positions, s0.positions)
        assert s1.time > s0.time

    def test_back_to_origin(self):
        s = euler_step(state_of((1, 1)), np.array([[-1.0, -1.0]]), 1.0)
        assert np.allclose(s.positions, [[0, 0]])

    def test_rejects_nonfinite_control(self):
        with pytest.raises(ValueError):
            euler_step(state_of((0, 0)), np.array([[np.nan, 0.0]]), 0.1)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            euler_step(state_of((0, 0)), np.zeros((1, 2)), 0.0)

    def test_linear_in_dt(self):
        # two half steps under constant control equal one full step
        rng = np.random.default_rng(3)
        s0 = EnsembleState(rng.uniform(-1, 1, (4, 2)))
        u = rng.uniform(-1, 1, (4, 2))
        full = euler_step(s0, u, 0.02)
        half = euler_step(euler_step(s0, u, 0.01), u, 0.01)
        assert np.allclose(full.positions, half.positions, atol=1e-12)
        assert abs(full.time - half.time) < 1e-12


class TestRotate:
    def test_identity(self):
        assert np.allclose(rotate(vec2(1, 0), 0.0), [1, 0])

    def test_quarter_turn(self):
        assert np.allclose(rotate(vec2(1, 0), math.pi / 2), [0, 1], atol=1e-12)

    def test_isometry_random(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            v = rng.uniform(-5, 5, 2)
            a = rng.uniform(-10, 10)
            assert abs(np.linalg.norm(rotate(v, a)) - np.linalg.norm(v)) < 1e-12

    @settings(max_examples=200, derandomize=True)
    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-10, 10))
    def test_isometry_property(self, x, y, a):
        v = np.array([x, y])
        assert np.linalg.norm(rotate(v, a)) == pytest.approx(np.linalg.norm(v), abs=1e-12)


class TestEnsembleState:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            EnsembleState(np.array([[np.nan, 0.0]]))

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            EnsembleState(np.zeros((1, 2)), -1.0)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            EnsembleState(np.zeros((0, 2)))

    def test_vec2_rejects_inf(self):
        with pytest.raises(ValueError):
            vec2(np.inf, 0)


def test_arena_shape():
    assert ARENA[0] < ARENA[1] and ARENA[2] < ARENA[3]


def test_path_graph_chain():
    g = path_graph(4)
    assert g.edges == ((0, 1), (1, 2), (2, 3))
