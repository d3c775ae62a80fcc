"""Right-hand sides for the five model variants and the leader control law.

All functions are pure maps from an immutable stage snapshot plus read-only
history access to per-entity velocities, stacked followers-first.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import (
    KERNEL_ROLE_AMONG,
    KERNEL_ROLE_FOLLOWER,
    KERNEL_ROLE_LEADER,
    General,
    MultiLeader,
    ScenarioConfig,
    SingleLeaderConstant,
    SingleLeaderControlled,
    TwoLeaders,
)


@dataclass(frozen=True, eq=False)
class SystemState:
    """Follower and leader opinions at one stage time."""

    t: float
    followers: np.ndarray  # (N, d)
    leaders: np.ndarray  # (m, d)


def _full_delayed(reader, scenario) -> np.ndarray:
    """(E, E, d) block: entry (i, j) holds x_j at the lag with which i reads j.

    One gather covers every coupling term.  Unreferenced entries (diagonal,
    masked pairs, the pinned-leader column) are gathered at lag zero so they
    never reach outside the buffer; their values are multiplied away.
    """
    e = scenario.n_entities
    taus = scenario.effective_delays
    if taus is None:
        taus = scenario.delays.entries
    return reader.delayed_block(taus, np.arange(e))


def _masked_follower_drift(state, full_delayed, scenario, role: str) -> np.ndarray:
    """Sum over unmasked peers of weight * (delayed peer - self), per follower."""
    n = scenario.n_followers
    x = state.followers
    diff = full_delayed[:n, :n] - x[:, None, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    w = scenario.kernels[role].weights(r) * scenario.chi.entries
    return np.einsum("ij,ijk->ik", w, diff)


def _leader_pull(state, full_delayed, scenario) -> np.ndarray:
    """Sum over all leaders of weight * (delayed leader - follower), per follower."""
    n = scenario.n_followers
    x = state.followers
    diff = full_delayed[:n, n:] - x[:, None, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    w = scenario.kernels[KERNEL_ROLE_LEADER].weights(r)
    return np.einsum("ij,ijk->ik", w, diff)


def rhs_general(state: SystemState, reader, scenario: ScenarioConfig) -> np.ndarray:
    """dx_i = (1/(N-1)) sum_{j != i} chi_ij psi(x_i, x_j(t - tau_ij)) (x_j(t - tau_ij) - x_i)."""
    n = scenario.n_followers
    full = _full_delayed(reader, scenario)
    return _masked_follower_drift(state, full, scenario, KERNEL_ROLE_AMONG) / (n - 1)


def _leader_consensus_drift(state, full_delayed, scenario) -> np.ndarray:
    """Per-leader sum of weight * (delayed peer leader - self)."""
    n = scenario.n_followers
    y = state.leaders
    diff = full_delayed[n:, n:] - y[:, None, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    w = scenario.kernels[KERNEL_ROLE_AMONG].weights(r)
    np.fill_diagonal(w, 0.0)
    return np.einsum("ij,ijk->ik", w, diff)


def rhs_multi_leader(state: SystemState, reader, scenario: ScenarioConfig) -> np.ndarray:
    """Leaders run a delayed all-to-all consensus among themselves; followers
    average masked peer terms and all leader terms with weight 1/(N+m-1)."""
    variant = scenario.variant
    if not isinstance(variant, MultiLeader):
        raise ConfigurationError("rhs_multi_leader requires the multi-leader variant")
    n, m = scenario.n_followers, scenario.n_leaders
    full = _full_delayed(reader, scenario)
    v_lead = _leader_consensus_drift(state, full, scenario) / (m - 1)
    v_foll = (
        _masked_follower_drift(state, full, scenario, KERNEL_ROLE_FOLLOWER)
        + _leader_pull(state, full, scenario)
    ) / (n + m - 1)
    return np.concatenate([v_foll, v_lead])


def rhs_single_leader_constant(state: SystemState, reader, scenario: ScenarioConfig) -> np.ndarray:
    """The leader does not move; followers add (c_i/N)(anchor - x_i) to the
    masked peer average 1/N."""
    n = scenario.n_followers
    x = state.followers
    y0 = state.leaders[0]
    full = _full_delayed(reader, scenario)
    diff = y0[None, :] - x
    r = np.linalg.norm(diff, axis=1)
    c = scenario.kernels[KERNEL_ROLE_LEADER].weights(r[:, None])[:, 0]
    v_foll = (
        _masked_follower_drift(state, full, scenario, KERNEL_ROLE_FOLLOWER)
        + c[:, None] * diff
    ) / n
    return np.concatenate([v_foll, np.zeros((1, scenario.dim))])


def control_law(y0_initial, y0_current, target, speed_limit: float) -> np.ndarray:
    """Full-speed steering along the fixed direction from the initial leader
    opinion to the target; zero once the leader sits exactly on the target.

    The direction never re-normalises against the current position, so the
    returned vector is constant until arrival and always has norm at most
    ``speed_limit``.  Arrival tolerance is handled by the integrator, which
    pins the leader to the target; afterwards the exact-equality branch here
    keeps the control at zero.
    """
    y0_initial = np.asarray(y0_initial, dtype=float)
    y0_current = np.asarray(y0_current, dtype=float)
    target = np.asarray(target, dtype=float)
    if np.array_equal(y0_current, target):
        return np.zeros_like(target)
    gap = target - y0_initial
    scale = float(np.max(np.abs(gap)))
    if scale == 0.0:
        return np.zeros_like(target)
    unit = gap / scale  # scaled first so the norm cannot underflow
    return (speed_limit / float(np.linalg.norm(unit))) * unit


def rhs_single_leader_controlled(state: SystemState, reader, scenario: ScenarioConfig) -> np.ndarray:
    """Controlled leader moving by the steering law; followers couple to the
    delayed leader state with per-pair lags."""
    variant = scenario.variant
    if not isinstance(variant, SingleLeaderControlled):
        raise ConfigurationError("rhs_single_leader_controlled requires the controlled variant")
    n = scenario.n_followers
    x = state.followers
    y0 = state.leaders[0]
    y0_init = scenario.histories[n].at(0.0)

    full = _full_delayed(reader, scenario)
    yd = full[:n, n, :]
    # Coupling strength reads the current leader opinion; the drift target is
    # the delayed one.
    r = np.linalg.norm(y0[None, :] - x, axis=1)
    c = scenario.kernels[KERNEL_ROLE_LEADER].weights(r[:, None])[:, 0]
    v_foll = (
        _masked_follower_drift(state, full, scenario, KERNEL_ROLE_FOLLOWER)
        + c[:, None] * (yd - x)
    ) / n
    u = control_law(y0_init, y0, variant.target, variant.speed_limit)
    return np.concatenate([v_foll, u[None, :]])


def rhs_two_leaders(state: SystemState, reader, scenario: ScenarioConfig) -> np.ndarray:
    """Each leader chases only the other (no normalisation); followers average
    masked peer terms and both leader terms with weight 1/(N+1)."""
    if not isinstance(scenario.variant, TwoLeaders):
        raise ConfigurationError("rhs_two_leaders requires the two-leader variant")
    n = scenario.n_followers
    full = _full_delayed(reader, scenario)
    v_lead = _leader_consensus_drift(state, full, scenario)  # one peer each, no normaliser
    v_foll = (
        _masked_follower_drift(state, full, scenario, KERNEL_ROLE_FOLLOWER)
        + _leader_pull(state, full, scenario)
    ) / (n + 1)
    return np.concatenate([v_foll, v_lead])


_RHS_BY_VARIANT = {
    General: rhs_general,
    MultiLeader: rhs_multi_leader,
    SingleLeaderConstant: rhs_single_leader_constant,
    SingleLeaderControlled: rhs_single_leader_controlled,
    TwoLeaders: rhs_two_leaders,
}


def make_rhs(scenario: ScenarioConfig):
    """Bind the scenario to its variant's right-hand side."""
    fn = _RHS_BY_VARIANT[type(scenario.variant)]

    def rhs(state: SystemState, reader) -> np.ndarray:
        return fn(state, reader, scenario)

    return rhs
