"""Hand-evaluated right-hand sides and structural properties per variant."""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hkdelay as hk
from hkdelay.dynamics import (
    control_law,
    rhs_general,
    rhs_multi_leader,
    rhs_single_leader_constant,
    rhs_single_leader_controlled,
    rhs_two_leaders,
)
from hkdelay.model import KernelTable

from util import constant_histories, general_scenario, stage_at_zero


def _leader_scenario(variant, follower_values, leader_values, kernels, **kw):
    n = len(follower_values)
    defaults = dict(
        follower_delays=0.0,
        leader_delays=0.0 if not isinstance(variant, (hk.SingleLeaderConstant, hk.SingleLeaderControlled)) else None,
        leader_follower_delays=0.0 if isinstance(variant, hk.SingleLeaderControlled) else None,
        step_h=0.01,
        horizon=1.0,
    )
    defaults.update(kw)
    return hk.assemble_scenario(
        variant=variant,
        n_followers=n,
        dim=np.atleast_1d(follower_values[0]).shape[0],
        kernels=kernels,
        follower_histories=constant_histories(follower_values),
        leader_histories=constant_histories(leader_values) if leader_values else None,
        **defaults,
    )


class TestGeneralRHS:
    def test_three_agents_hand_evaluation(self):
        # (1/2) * sum of unit-weight differences from the constant histories:
        # agent 0: ((1-0)+(2-0))/2 = 1.5; agent 1: ((0-1)+(2-1))/2 = 0;
        # agent 2: ((0-2)+(1-2))/2 = -1.5.
        sc = general_scenario([0.0, 1.0, 2.0], delay=1.0)
        state, reader = stage_at_zero(sc)
        v = rhs_general(state, reader, sc)
        assert v[:, 0] == pytest.approx([1.5, 0.0, -1.5], abs=1e-15)

    def test_consensus_velocities_vanish(self):
        sc = general_scenario([0.7, 0.7, 0.7], delay=1.0, kernel=hk.GaussianShiftedKernel())
        state, reader = stage_at_zero(sc)
        assert np.all(rhs_general(state, reader, sc) == 0.0)

    def test_empty_mask_freezes_everyone(self):
        sc = general_scenario([0.0, 1.0, 2.0], delay=0.0, chi=np.zeros((3, 3), dtype=int))
        state, reader = stage_at_zero(sc)
        assert np.all(rhs_general(state, reader, sc) == 0.0)

    def test_mask_linearity(self):
        # The masked drift equals the sum of single-edge drifts.
        values = [0.2, 1.1, 2.7]
        full = np.ones((3, 3), dtype=int)
        edges = [(i, j) for i in range(3) for j in range(3) if i != j]
        sc_full = general_scenario(values, delay=1.0, chi=full, kernel=hk.GaussianShiftedKernel())
        state, reader = stage_at_zero(sc_full)
        total = rhs_general(state, reader, sc_full)
        acc = np.zeros_like(total)
        for i, j in edges:
            chi = np.zeros((3, 3), dtype=int)
            chi[i, j] = 1
            sc_e = general_scenario(values, delay=1.0, chi=chi, kernel=hk.GaussianShiftedKernel())
            st_e, rd_e = stage_at_zero(sc_e)
            acc += rhs_general(st_e, rd_e, sc_e)
        assert acc == pytest.approx(total, rel=1e-12, abs=1e-15)


class TestMultiLeaderRHS:
    def test_hand_evaluation_small_population(self):
        # Unit weights, effectively-zero lags.  Leaders at 0, 3, 6 give the
        # first leader ((3-0)+(6-0))/2 = 4.5; a follower at 0 feels all three
        # leaders with weight 1/(N+m-1) = 1/3: ((0-0)+(3-0)+(6-0))/3 = 3.
        # Built directly (not assembled): the window machinery wants N >= 2,
        # the vector field itself is defined for a single follower.
        const = hk.ConstantKernel(1.0)
        sc = hk.ScenarioConfig(
            variant=hk.MultiLeader(3),
            n_followers=1,
            dim=1,
            chi=hk.AdjacencyMask(np.zeros((1, 1), dtype=int)),
            delays=hk.DelayMatrix(np.zeros((4, 4)), 0.0),
            kernels={
                "a": KernelTable.shared(const, (3, 3)),
                "b": KernelTable.shared(const, (1, 1)),
                "c": KernelTable.shared(const, (1, 3)),
            },
            histories=tuple(constant_histories([0.0]) + constant_histories([0.0, 3.0, 6.0])),
            step_h=0.01,
            horizon=1.0,
            leader_source_delays=np.zeros(3),
        )
        state, reader = stage_at_zero(sc)
        v = rhs_multi_leader(state, reader, sc)
        assert v[:, 0] == pytest.approx([3.0, 4.5, 0.0, -4.5], abs=1e-15)

    def test_follower_mask_removes_exactly_one_term(self):
        const = hk.ConstantKernel(1.0)
        kernels = {"a": const, "b": const, "c": const}
        chi_on = np.ones((2, 2), dtype=int)
        chi_off = chi_on.copy()
        chi_off[0, 1] = 0
        values = [0.0, 2.0]
        leaders = [1.0, 3.0, 5.0]
        on = _leader_scenario(hk.MultiLeader(3), values, leaders, kernels, chi=chi_on)
        off = _leader_scenario(hk.MultiLeader(3), values, leaders, kernels, chi=chi_off)
        v_on = rhs_multi_leader(*stage_at_zero(on), on)
        v_off = rhs_multi_leader(*stage_at_zero(off), off)
        # N + m - 1 = 4; dropping edge (0, 1) removes (x_1 - x_0)/4 = 0.5.
        assert v_on[0, 0] - v_off[0, 0] == pytest.approx(0.5, abs=1e-15)
        assert v_on[1:, 0] == pytest.approx(v_off[1:, 0], abs=1e-15)

    def test_consensus_equilibrium(self):
        k = hk.GaussianShiftedKernel()
        sc = _leader_scenario(
            hk.MultiLeader(3), [2.0, 2.0], [2.0, 2.0, 2.0], {"a": k, "b": k, "c": k},
            follower_delays=1.0, leader_delays=1.0, step_h=0.5,
        )
        v = rhs_multi_leader(*stage_at_zero(sc), sc)
        assert np.all(v == 0.0)


class TestPinnedLeaderRHS:
    def test_hand_evaluation(self):
        # dx_0 = (1/2)(x_1 - x_0) + (1/2)(anchor - x_0) = 1 + 2 = 3.
        kernels = {"b": hk.ConstantKernel(1.0), "c": hk.ConstantKernel(1.0)}
        sc = _leader_scenario(hk.SingleLeaderConstant([4.0]), [0.0, 2.0], None, kernels)
        v = rhs_single_leader_constant(*stage_at_zero(sc), sc)
        assert v[:, 0] == pytest.approx([3.0, 0.0, 0.0], abs=1e-15)

    def test_leader_never_moves_in_a_run(self):
        kernels = {"b": hk.GaussianShiftedKernel(), "c": hk.ConstantKernel(0.5)}
        sc = _leader_scenario(
            hk.SingleLeaderConstant([1.0]), [0.0, 2.0, 3.0], None, kernels,
            follower_delays=1.0, horizon=5.0,
        )
        traj = hk.integrate(sc)
        assert np.all(traj.states[:, 3, 0] == 1.0)

    def test_followers_at_anchor_are_at_rest(self):
        kernels = {"b": hk.GaussianShiftedKernel(), "c": hk.GaussianShiftedKernel()}
        sc = _leader_scenario(hk.SingleLeaderConstant([1.5]), [1.5, 1.5], None, kernels)
        v = rhs_single_leader_constant(*stage_at_zero(sc), sc)
        assert np.all(v == 0.0)


class TestControlLaw:
    def test_direction_from_initial_position(self):
        u = control_law([0.0, 0.0], [1.0, 1.0], [3.0, 4.0], 1.0)
        assert u == pytest.approx([0.6, 0.8], abs=1e-15)

    def test_zero_once_on_target(self):
        u = control_law([0.0, 0.0], [3.0, 4.0], [3.0, 4.0], 1.0)
        assert np.all(u == 0.0)

    def test_zero_when_started_on_target(self):
        u = control_law([3.0, 4.0], [3.0, 4.0], [3.0, 4.0], 2.0)
        assert np.all(u == 0.0)

    @settings(max_examples=200, deadline=None)
    @given(
        y0=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        target=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        speed=st.floats(0.1, 5.0),
    )
    def test_admissible_norm(self, y0, target, speed):
        u = control_law(y0, y0, target, speed)
        norm = float(np.linalg.norm(u))
        assert norm <= speed * (1 + 1e-12)
        if not np.array_equal(np.asarray(y0), np.asarray(target)):
            assert norm == pytest.approx(speed, rel=1e-12)


class TestControlledRHS:
    def _kernels(self):
        return {"b": hk.ConstantKernel(1.0), "c": hk.ConstantKernel(1.0)}

    def test_target_at_start_matches_pinned_variant(self):
        followers = [0.0, 2.0, 3.0]
        controlled = _leader_scenario(
            hk.SingleLeaderControlled([1.0], 1.0), followers, [1.0], self._kernels(),
            follower_delays=1.0, leader_follower_delays=1.0, horizon=5.0,
        )
        pinned = _leader_scenario(
            hk.SingleLeaderConstant([1.0]), followers, None, self._kernels(),
            follower_delays=1.0, horizon=5.0,
        )
        a = hk.integrate(controlled)
        b = hk.integrate(pinned)
        assert a.arrival_time == 0.0
        assert np.array_equal(a.states, b.states)

    def test_leader_velocity_is_the_control(self):
        sc = _leader_scenario(
            hk.SingleLeaderControlled([5.0], 2.0), [0.0, 1.0], [0.0], self._kernels(),
            follower_delays=1.0, leader_follower_delays=1.0,
        )
        v = rhs_single_leader_controlled(*stage_at_zero(sc), sc)
        assert v[2, 0] == pytest.approx(2.0, abs=1e-15)

    def test_followers_read_the_delayed_leader(self):
        # Leader history ramps from -1 to 0 over [-1, 0]; with lag 1 the
        # followers see -1, not the current 0.
        ramp = hk.SampledHistory([-1.0, 0.0], [[-1.0], [0.0]])
        sc = hk.assemble_scenario(
            variant=hk.SingleLeaderControlled([5.0], 1.0),
            n_followers=2,
            dim=1,
            follower_delays=0.0,
            leader_follower_delays=1.0,
            kernels=self._kernels(),
            follower_histories=constant_histories([0.0, 0.0]),
            leader_histories=[ramp],
            step_h=0.5,
            horizon=1.0,
        )
        state, reader = stage_at_zero(sc)
        v = rhs_single_leader_controlled(state, reader, sc)
        # dx = (1/2)*(peer term 0) + (1/2)*(y(-1) - 0) = -0.5
        assert v[0, 0] == pytest.approx(-0.5, abs=1e-15)


class TestTwoLeaderRHS:
    def _kernels(self, a=None):
        return {
            "a": a or hk.ConstantKernel(1.0),
            "b": hk.ConstantKernel(1.0),
            "c": hk.ConstantKernel(1.0),
        }

    def test_leaders_chase_each_other_unnormalised(self):
        sc = _leader_scenario(hk.TwoLeaders(), [1.0, 1.0], [0.0, 4.0], self._kernels())
        v = rhs_two_leaders(*stage_at_zero(sc), sc)
        assert v[2, 0] == pytest.approx(4.0, abs=1e-15)
        assert v[3, 0] == pytest.approx(-4.0, abs=1e-15)

    def test_followers_average_over_n_plus_one(self):
        # Follower at 0 hears follower at 2 and leaders at 0 and 4:
        # ((2-0) + (0-0) + (4-0))/3 = 2.
        sc = _leader_scenario(hk.TwoLeaders(), [0.0, 2.0], [0.0, 4.0], self._kernels())
        v = rhs_two_leaders(*stage_at_zero(sc), sc)
        assert v[0, 0] == pytest.approx(2.0, abs=1e-15)

    def test_leader_block_ignores_followers(self):
        k = self._kernels(a=hk.GaussianShiftedKernel())
        base = _leader_scenario(hk.TwoLeaders(), [0.5, 1.0], [0.0, 2.0], k)
        moved = _leader_scenario(hk.TwoLeaders(), [9.5, -7.0], [0.0, 2.0], k)
        va = rhs_two_leaders(*stage_at_zero(base), base)
        vb = rhs_two_leaders(*stage_at_zero(moved), moved)
        assert np.array_equal(va[2:], vb[2:])

    def test_consensus_equilibrium(self):
        sc = _leader_scenario(hk.TwoLeaders(), [1.0, 1.0], [1.0, 1.0], self._kernels())
        assert np.all(rhs_two_leaders(*stage_at_zero(sc), sc) == 0.0)


class TestEquivariance:
    @pytest.mark.parametrize("shift", [1.0, -3.25])
    def test_translation_leaves_velocities_unchanged(self, shift):
        values = [0.2, 1.3, 2.9]
        sc = general_scenario(values, delay=1.0, kernel=hk.GaussianShiftedKernel())
        sc2 = general_scenario([v + shift for v in values], delay=1.0, kernel=hk.GaussianShiftedKernel())
        v1 = rhs_general(*stage_at_zero(sc), sc)
        v2 = rhs_general(*stage_at_zero(sc2), sc2)
        assert v2 == pytest.approx(v1, rel=1e-9, abs=1e-12)

    def test_translation_leaves_diameters_unchanged(self):
        values = [0.2, 1.3, 2.9]
        a = hk.integrate(general_scenario(values, delay=1.0, kernel=hk.GaussianShiftedKernel(), horizon=5.0))
        b = hk.integrate(general_scenario([v + 2.0 for v in values], delay=1.0, kernel=hk.GaussianShiftedKernel(), horizon=5.0))
        for t in (0.0, 2.5, 5.0):
            assert hk.diameter(a, t) == pytest.approx(hk.diameter(b, t), rel=1e-9, abs=1e-12)
