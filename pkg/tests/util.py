"""Shared builders for compact test scenarios."""
from __future__ import annotations

import numpy as np

import hkdelay as hk


def constant_histories(values):
    return [hk.ConstantHistory(np.atleast_1d(np.asarray(v, dtype=float))) for v in values]


def general_scenario(values, *, delay=1.0, kernel=None, chi=None, step_h=0.01, horizon=10.0, tolerance=None):
    values = [np.atleast_1d(np.asarray(v, dtype=float)) for v in values]
    return hk.assemble_scenario(
        variant=hk.General(),
        n_followers=len(values),
        dim=values[0].shape[0],
        chi=chi,
        follower_delays=delay,
        kernels={"a": kernel or hk.ConstantKernel(1.0)},
        follower_histories=constant_histories(values),
        step_h=step_h,
        horizon=horizon,
        tolerance=tolerance,
    )


def stage_at_zero(scenario):
    """Stage snapshot and history reader at t=0, for direct RHS evaluation."""
    buf = hk.seed_history(scenario)
    x = buf.last_state().copy()
    n = scenario.n_followers
    state = hk.SystemState(t=0.0, followers=x[:n], leaders=x[n:])
    return state, hk.StageReader(buf, 0.0, x)
