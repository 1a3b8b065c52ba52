import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarmq.behaviors import (
    GRADIENT_FLOW_IDS,
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
from swarmq.geometry import ARENA, EnsembleState, cycle_graph, path_graph

SPACE = ParamSpace()
LIB = default_library(5)
BY_ID = {s.id: s for s in LIB}


def random_state(rng, n=5):
    x = rng.uniform(ARENA[0], ARENA[1], size=n)
    y = rng.uniform(ARENA[2], ARENA[3], size=n)
    return EnsembleState(np.column_stack([x, y]))


def random_params(rng, space=SPACE):
    return BehaviorParams(
        rng.uniform(space.theta_lo, space.theta_hi),
        np.array([rng.uniform(space.phi_lo[0], space.phi_hi[0]),
                  rng.uniform(space.phi_lo[1], space.phi_hi[1])]))


def fd_energy_gradient(spec, positions, params, h=1e-5):
    """Independent oracle: central differences of the energy in positions."""
    g = np.zeros_like(positions)
    for i in range(positions.shape[0]):
        for k in range(2):
            plus = positions.copy()
            plus[i, k] += h
            minus = positions.copy()
            minus[i, k] -= h
            g[i, k] = (energy(spec, EnsembleState(plus), params)
                       - energy(spec, EnsembleState(minus), params)) / (2 * h)
    return g


class TestControlExamples:
    def test_two_robot_formation_equilibrium(self):
        # at the desired separation every consensus weight vanishes
        g = cycle_graph(2)
        spec = BehaviorSpec(BehaviorId.STATIC_FORMATION, g, SPACE, deltas=(1.0,))
        state = EnsembleState(np.array([[0.0, 0.0], [1.0, 0.0]]))
        u = control(spec, state, BehaviorParams(1.0, np.zeros(2)))
        assert np.allclose(u, 0.0, atol=1e-14)

    def test_leader_follower_direct_substitution(self):
        spec = BehaviorSpec(BehaviorId.LEADER_FOLLOWER, path_graph(2), SPACE, leader=1)
        state = EnsembleState(np.array([[0.0, 0.0], [2.0, 0.0]]))
        u = control(spec, state, BehaviorParams(1.0, np.zeros(2)))
        # non-leader 0: (|2|^2 - 1^2) * (x_1 - x_0) = 3 * (2, 0)
        assert np.allclose(u[0], [6.0, 0.0])

    def test_cyclic_pursuit_ring_feedback(self):
        # single pursuer at distance 1 from the center with ring radius r:
        # the center term has magnitude |1 - r| pointing at the center
        spec = BY_ID[BehaviorId.CYCLIC_PURSUIT]
        state = EnsembleState(np.tile([[1.0, 0.0]], (5, 1)))
        theta = 0.4
        u = control(spec, state, BehaviorParams(theta, np.zeros(2)))
        r = theta_to_radius(theta, 5)
        # all robots coincide: pursuit chords vanish, pure ring feedback
        assert np.allclose(u, np.tile([-(1 - r), 0.0], (5, 1)), atol=1e-12)

    def test_consensus_only_sums_to_zero(self):
        rng = np.random.default_rng(0)
        for spec in (BY_ID[BehaviorId.STATIC_FORMATION],
                     BY_ID[BehaviorId.TRIANGULATION_COVERAGE]):
            for _ in range(20):
                u = control(spec, random_state(rng), random_params(rng))
                assert np.allclose(u.sum(axis=0), 0.0, atol=1e-9)

    def test_translation_invariance(self):
        rng = np.random.default_rng(1)
        shift = np.array([0.37, -0.21])
        for spec in (BY_ID[BehaviorId.STATIC_FORMATION],
                     BY_ID[BehaviorId.TRIANGULATION_COVERAGE]):
            for _ in range(20):
                state = random_state(rng)
                p = random_params(rng)
                u0 = control(spec, state, p)
                u1 = control(spec, EnsembleState(state.positions + shift), p)
                assert np.allclose(u0, u1, atol=1e-12)

    def test_robot_count_mismatch(self):
        state = EnsembleState(np.zeros((3, 2)))
        with pytest.raises(ValueError):
            control(BY_ID[BehaviorId.CYCLIC_PURSUIT], state, BehaviorParams(0.5, np.zeros(2)))

    def test_infeasible_params_rejected(self):
        state = EnsembleState(np.zeros((5, 2)))
        with pytest.raises(ValueError):
            control(BY_ID[BehaviorId.CYCLIC_PURSUIT], state, BehaviorParams(5.0, np.zeros(2)))


class TestEnergy:
    def test_formation_zero_at_target_shape(self):
        # regular pentagon with side theta has zero formation energy
        spec = BY_ID[BehaviorId.STATIC_FORMATION]
        theta = 0.8
        r = theta / (2 * math.sin(math.pi / 5))
        ang = np.arange(5) * 2 * math.pi / 5
        state = EnsembleState(r * np.column_stack([np.cos(ang), np.sin(ang)]))
        assert energy(spec, state, BehaviorParams(theta, np.zeros(2))) < 1e-12

    def test_leader_follower_zero_on_goal(self):
        spec = BY_ID[BehaviorId.LEADER_FOLLOWER]
        theta = 0.5
        xs = np.column_stack([np.arange(5) * theta, np.zeros(5)])
        phi = xs[0].copy()  # leader 0 exactly at its goal
        assert energy(spec, EnsembleState(xs), BehaviorParams(theta, phi)) < 1e-12

    def test_cyclic_zero_on_ring(self):
        spec = BY_ID[BehaviorId.CYCLIC_PURSUIT]
        theta = 0.6
        r = theta_to_radius(theta, 5)
        ang = np.arange(5) * 2 * math.pi / 5
        phi = np.array([0.2, -0.1])
        state = EnsembleState(phi + r * np.column_stack([np.cos(ang), np.sin(ang)]))
        assert energy(spec, state, BehaviorParams(theta, phi)) < 1e-15

    def test_nonnegative_everywhere(self):
        rng = np.random.default_rng(2)
        for spec in LIB:
            for _ in range(50):
                assert energy(spec, random_state(rng), random_params(rng)) >= 0.0


class TestGradientConsistency:
    @pytest.mark.parametrize("behavior", GRADIENT_FLOW_IDS, ids=lambda b: b.name)
    def test_control_is_negative_energy_gradient(self, behavior):
        spec = BY_ID[behavior]
        rng = np.random.default_rng(int(behavior))
        for _ in range(100):
            state = random_state(rng)
            p = random_params(rng)
            u = control(spec, state, p)
            g = fd_energy_gradient(spec, state.positions, p)
            err = np.abs(u + g)
            tol = 1e-5 * np.maximum(1.0, np.abs(g))
            assert np.all(err <= tol)


class TestRadiusMaps:
    def test_round_trip(self):
        r = 0.7 / (2 * math.sin(math.pi / 4))
        assert theta_to_radius(radius_to_theta(r, 4), 4) == pytest.approx(r, abs=1e-12)

    def test_numeric_value(self):
        # 2 * 0.5 * sin(pi/5)
        assert radius_to_theta(0.5, 5) == pytest.approx(0.58779, abs=1e-5)

    def test_hexagon_exact(self):
        assert radius_to_theta(1.0, 6) == pytest.approx(1.0, abs=1e-15)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            radius_to_theta(0.5, 1)


class TestProject:
    def test_theta_clamped(self):
        p = project(BehaviorParams(0.01, np.zeros(2)), SPACE)
        assert p.theta == pytest.approx(0.05)

    def test_phi_clamped(self):
        p = project(BehaviorParams(0.5, np.array([1.5, -2.0])), SPACE)
        assert np.allclose(p.phi, [1.0, -1.0])

    def test_feasible_unchanged(self):
        p0 = BehaviorParams(0.5, np.array([0.2, -0.3]))
        p1 = project(p0, SPACE)
        assert p1.theta == p0.theta and np.array_equal(p1.phi, p0.phi)

    @settings(max_examples=300, derandomize=True)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3),
           st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
    def test_idempotent_and_nonexpansive(self, t1, x1, y1, t2, x2, y2):
        a = BehaviorParams(t1, np.array([x1, y1]))
        b = BehaviorParams(t2, np.array([x2, y2]))
        pa, pb = project(a, SPACE), project(b, SPACE)
        again = project(pa, SPACE)
        assert again.theta == pa.theta and np.array_equal(again.phi, pa.phi)
        da = np.array([a.theta - b.theta, *(a.phi - b.phi)])
        dp = np.array([pa.theta - pb.theta, *(pa.phi - pb.phi)])
        assert np.linalg.norm(dp) <= np.linalg.norm(da) + 1e-12


class TestDefaultLibrary:
    def test_five_distinct_behaviors(self):
        assert len(LIB) == 5
        assert len({s.id for s in LIB}) == 5

    def test_all_graphs_connected(self):
        # breadth-first search oracle via networkx
        for spec in LIB:
            g = nx.Graph()
            g.add_nodes_from(range(spec.graph.n))
            g.add_edges_from(spec.graph.edges)
            assert nx.is_connected(g), spec.id.name

    def test_cycle_graph_degree_two(self):
        g = BY_ID[BehaviorId.CYCLIC_PURSUIT].graph
        assert all(len(g.neighbors(i)) == 2 for i in range(5))

    def test_leaders_present_where_required(self):
        assert BY_ID[BehaviorId.FORMATION_WITH_LEADER].leader == 0
        assert BY_ID[BehaviorId.LEADER_FOLLOWER].leader == 0
        assert BY_ID[BehaviorId.STATIC_FORMATION].leader is None

    def test_rejects_tiny_team(self):
        with pytest.raises(ValueError):
            default_library(1)

    def test_spec_invariants_enforced(self):
        with pytest.raises(ValueError):
            BehaviorSpec(BehaviorId.STATIC_FORMATION, cycle_graph(5), SPACE)  # deltas missing
        with pytest.raises(ValueError):
            BehaviorSpec(BehaviorId.CYCLIC_PURSUIT, cycle_graph(5), SPACE, leader=0)
