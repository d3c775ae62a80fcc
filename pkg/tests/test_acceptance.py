"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Every expected value is produced by the stated independent oracle: exact
closed forms in high-precision arithmetic, brute-force enumeration, a
brute-force structure oracle, fine-step reference integrations, or
Richardson step refinement.
"""
from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np
import pytest
from mpmath import mp

import hkdelay as hk
from hkdelay.analysis import check_ci, consensus_constants, verify_decay_envelope

from util import constant_histories

mp.dps = 50


def _line(num: int, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")


# -- criterion 1: closed-form certificate ------------------------------------


def test_criterion_01_certificate_closed_form():
    """Unit kernel, three agents, unit delay: certificate equals the exact
    formula values computed independently at 50-digit precision."""
    sc = hk.assemble_scenario(
        variant=hk.General(), n_followers=3, dim=1,
        follower_delays=1.0,
        kernels={"a": hk.ConstantKernel(1.0)},
        follower_histories=constant_histories([0.0, 1.0, 2.0]),
        step_h=0.1, horizon=1.0,
    )
    cert = consensus_constants(sc)

    e1 = mp.e ** -1
    c_exact = 1 - (1 - e1) / 2
    c_tilde_exact = 1 - e1 * (1 - c_exact)
    gamma_exact = mp.log(1 / c_tilde_exact) / 3

    assert abs(cert.contraction - float(c_exact)) < 1e-6
    assert abs(cert.window_contraction - float(c_tilde_exact)) < 1e-6
    assert abs(cert.decay_rate - float(gamma_exact)) < 1e-6
    # Much tighter than the acceptance tolerance in practice:
    assert cert.contraction == pytest.approx(float(c_exact), abs=1e-14)
    assert cert.window_contraction == pytest.approx(float(c_tilde_exact), abs=1e-14)
    assert cert.decay_rate == pytest.approx(float(gamma_exact), abs=1e-14)
    assert abs(cert.contraction - 0.683940) < 1e-6
    _line(1, True, f"certificate C={cert.contraction:.6f} Ct={cert.window_contraction:.6f} "
                   f"gamma={cert.decay_rate:.6f} matches the high-precision evaluation within 1e-6")


# -- criterion 2: envelope on random structured scenarios --------------------


def _random_ci_scenario(seed: int) -> hk.ScenarioConfig:
    """Complete graph with source-indexed mixed delays in [0.5, 5].

    Delays depending only on the transmitting agent give every pair every
    third agent as a common influencer, with per-pair lags still mixed.
    """
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(3, 9))
    dim = int(rng.integers(1, 4))
    source_lags = rng.uniform(0.5, 5.0, size=n)
    delays = np.tile(source_lags, (n, 1))
    if seed % 2 == 0:
        kernel = hk.GaussianShiftedKernel(1.0, 1.0)
    else:
        kernel = hk.ConstantKernel(float(rng.uniform(0.5, 2.0)))
    width = float(rng.uniform(1.0, 4.0))
    values = rng.uniform(0.0, width, size=(n, dim))
    return hk.assemble_scenario(
        variant=hk.General(), n_followers=n, dim=dim,
        follower_delays=delays,
        kernels={"a": kernel},
        follower_histories=constant_histories(values),
        step_h=0.01, horizon=30.0,
    )


def test_criterion_02_envelope_on_random_structured_scenarios():
    """20 seeded scenarios satisfying the shared-influencer structure: the
    certified envelope holds at tolerance max(10*h^2, 1e-9) with h = 1e-2."""
    worst = -math.inf
    for seed in range(20):
        sc = _random_ci_scenario(seed)
        n = sc.n_followers
        assert check_ci(sc.chi, sc.delays.entries[:n, :n]).holds
        traj = hk.integrate(sc)
        report = verify_decay_envelope(traj)
        assert report.tolerance == max(10 * 0.01**2, 1e-9)
        assert report.status == "PASS", f"seed {seed}: {report.line()}"
        worst = max(worst, report.worst_margin)
    _line(2, True, f"decay envelope holds on 20 seeded scenarios (worst margin {worst:.3e})")


# -- criteria 3 + 8: lemma suite and consensus limit on the goldens ----------

LEMMA_CHECKS = ("hull_and_bound", "interval_monotonicity", "interval_recursion", "contraction")


def test_criterion_03_lemma_suite_on_goldens(golden_runs):
    """Hull containment, norm bound, window monotonicity, the averaging
    recursion, and the contraction estimate pass on every golden scenario."""
    for name, run in golden_runs.items():
        for check in LEMMA_CHECKS:
            report = run.reports[check]
            assert report.status == "PASS", f"{name}/{check}: {report.line()}"
    _line(3, True, f"lemma suite passes on all {len(golden_runs)} golden scenarios")


def test_criterion_08_consensus_limit_on_goldens(golden_runs):
    """Every golden run is inside 1e-3 * max(D0, 1) of consensus by t=300."""
    details = []
    for name, run in golden_runs.items():
        traj = run.trajectory
        assert traj.times[-1] >= 300.0 - 1e-9
        assert run.certificate.delay <= 5.0
        final = hk.diameter(traj, traj.times[-1])
        threshold = 1e-3 * max(run.certificate.initial_spread, 1.0)
        assert final < threshold, f"{name}: d(T)={final:.3e} >= {threshold:.3e}"
        details.append(f"{name}={final:.1e}")
    _line(8, True, "final diameters " + ", ".join(details))


# -- criterion 4: controlled leader ------------------------------------------


def test_criterion_04_steered_leader(golden_runs):
    """Unit-speed leader from 0 to 5: arrival within one step of t=5, the
    containment radius holds everywhere, and the post-arrival dynamics pass
    the pinned-leader envelope."""
    run = golden_runs["steered_leader_delay1"]
    traj = run.trajectory
    h = run.scenario.step_h
    assert traj.arrival_time is not None
    assert 5.0 - h - 1e-12 <= traj.arrival_time <= 5.0 + h + 1e-12
    from hkdelay.analysis import containment_radius

    assert containment_radius(run.scenario) == 6.0
    assert run.reports["r_containment"].status == "PASS"
    assert run.reports["decay_envelope"].status == "PASS"
    _line(4, True, f"arrival t0={traj.arrival_time} in [5-h, 5+h]; containment and "
                   "post-arrival envelope hold")


# -- criterion 5: two-leader autonomy and envelope ---------------------------


def test_criterion_05_two_leader_autonomy_and_envelope(golden_runs):
    """Leader trajectories ignore follower data bit-for-bit, and the envelope
    built from the dominated two-leader factor holds."""
    run = golden_runs["two_leaders_delay5"]
    scenario = run.scenario
    n = scenario.n_followers

    perturbed_followers = constant_histories([2.3, 0.1, 1.8, 0.7, 2.1])
    perturbed = dataclasses.replace(
        scenario,
        histories=tuple(perturbed_followers) + scenario.histories[n:],
        horizon=50.0,
    )
    other = hk.integrate(perturbed)
    cut = run.trajectory.grid_index(50.0) + 1
    assert np.array_equal(run.trajectory.states[:cut, n:], other.states[:, n:])

    assert "two-leader" in run.certificate.note
    assert run.reports["decay_envelope"].status == "PASS"
    _line(5, True, "leader block bit-identical under follower perturbation; "
                   "dominated-factor envelope passes")


# -- criterion 6: structure checker vs brute force ---------------------------


def _oracle_common_influencer(mask, lags) -> bool:
    n = len(mask)
    if n < 3:
        return False
    for i in range(n):
        for j in range(i + 1, n):
            found = False
            for k in range(n):
                if k == i or k == j:
                    continue
                if mask[i][k] == 1 and mask[j][k] == 1 and lags[i][k] == lags[j][k]:
                    found = True
                    break
            if not found:
                return False
    return True


def _assert_agrees(mask, lags):
    result = check_ci(mask, lags)
    expected = _oracle_common_influencer(mask.tolist(), lags.tolist())
    assert result.holds == expected, f"disagreement on mask={mask.tolist()} lags={lags.tolist()}"
    if result.holds:
        for (i, j), ks in result.witnesses.items():
            for k in ks:
                assert mask[i, k] == 1 and mask[j, k] == 1 and lags[i, k] == lags[j, k]
    elif result.failing_pair is not None:
        i, j = result.failing_pair
        ok = [
            k for k in range(mask.shape[0])
            if k not in (i, j) and mask[i, k] == 1 and mask[j, k] == 1 and lags[i, k] == lags[j, k]
        ]
        assert not ok


def test_criterion_06_structure_checker_vs_brute_force():
    """Exhaustive agreement with a triple-loop oracle on all 4-agent masks at
    constant delays, plus 10^4 random mask/two-level-delay assignments."""
    n = 4
    off_diag = [(i, j) for i in range(n) for j in range(n) if i != j]

    for bits in itertools.product((0, 1), repeat=len(off_diag)):
        mask = np.zeros((n, n), dtype=int)
        for (i, j), b in zip(off_diag, bits):
            mask[i, j] = b
        _assert_agrees(mask, np.ones((n, n)))

    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        states = rng.integers(0, 3, size=len(off_diag))
        mask = np.zeros((n, n), dtype=int)
        lags = np.zeros((n, n))
        for (i, j), s in zip(off_diag, states):
            if s > 0:
                mask[i, j] = 1
                lags[i, j] = float(s)  # two delay levels: 1 and 2
        _assert_agrees(mask, lags)
    _line(6, True, "checker agrees with the brute-force oracle on 4096 exhaustive "
                   "masks and 10^4 random mask/delay assignments")


# -- criterion 7: integrator order -------------------------------------------


def test_criterion_07_integrator_order(golden_runs):
    """Richardson refinement on the golden delayed scenario: halving the step
    from 1e-2 to 5e-3 shrinks the endpoint error against an h=1e-4 reference
    by a factor in [3, 5]."""
    base = golden_runs["general_delay5"].scenario

    def final_state(h: float) -> np.ndarray:
        sc = dataclasses.replace(base, step_h=h, horizon=6.0)
        return hk.integrate(sc).states[-1]

    reference = final_state(1e-4)
    err_coarse = float(np.abs(final_state(1e-2) - reference).max())
    err_fine = float(np.abs(final_state(5e-3) - reference).max())
    ratio = err_coarse / err_fine
    assert 3.0 <= ratio <= 5.0, f"refinement ratio {ratio}"
    _line(7, True, f"error ratio {ratio:.3f} in [3, 5] (second order)")
