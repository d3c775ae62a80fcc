"""Diameters, window diameters, structural checks, and decay certificates.

Everything here is a pure, read-only pass over an immutable trajectory.  The
verifiers turn the guaranteed inequalities of the delayed consensus models
into executable assertions: each one reports the worst signed violation it
found, the tolerance it used, and where the worst case occurred.

Tolerance policy: inequalities proved for the continuous dynamics are checked
on the discretised trajectory, so every verifier accepts violations up to
``max(10*h^2, 1e-9)``.  Window maxima are restricted to grid times; the
induced snapping error is absorbed by the same tolerance.  Every report
carries this policy so the discrete/continuous gap stays visible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, HistoryRangeError
from .integrator import Trajectory
from .model import (
    AdjacencyMask,
    DelayMatrix,
    General,
    MultiLeader,
    ScenarioConfig,
    SingleLeaderConstant,
    SingleLeaderControlled,
    TwoLeaders,
    variant_kind,
)

_HULL_DIRECTION_SEED = 735128  # fixed so hull checks are reproducible
_N_RANDOM_DIRECTIONS = 100


def default_tolerance(step_h: float) -> float:
    """Discretisation allowance for all inequality verifiers."""
    return max(10.0 * step_h * step_h, 1e-9)


def tolerance_for(scenario: ScenarioConfig) -> float:
    if scenario.tolerance is not None:
        return scenario.tolerance
    return default_tolerance(scenario.step_h)


# ---------------------------------------------------------------------------
# Certificates and reports


@dataclass(frozen=True)
class DecayCertificate:
    """Computed decay constants and the envelope they imply.

    ``contraction_gap`` and ``window_gap`` hold ``1 - contraction`` and
    ``1 - window_contraction`` without cancellation, so the implied rate
    stays strictly positive even when the kernel floor is tiny.
    """

    kernel_sup: float  # largest kernel supremum in play
    kernel_floor: float  # smallest kernel infimum over the state ball
    state_bound: float  # a-priori bound on every tracked opinion norm
    initial_spread: float  # window diameter of the initial histories
    contraction: float  # per-two-window contraction factor, in (0, 1)
    contraction_gap: float
    window_contraction: float
    window_gap: float
    decay_rate: float  # exponential envelope rate; +inf sentinel when delay=0
    delay: float  # window length of the interval machinery
    variant: str
    note: str = ""


@dataclass(frozen=True)
class VerifierReport:
    """Outcome of one executable inequality check."""

    name: str
    status: str  # PASS | FAIL | INAPPLICABLE
    worst_margin: float | None = None  # signed violation; > tolerance means FAIL
    tolerance: float | None = None
    location: str = ""
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    @property
    def applicable(self) -> bool:
        return self.status != "INAPPLICABLE"

    def line(self) -> str:
        parts = [f"{self.name}: {self.status}"]
        if self.worst_margin is not None:
            parts.append(f"worst_margin={self.worst_margin:.6e}")
        if self.tolerance is not None:
            parts.append(f"tol={self.tolerance:.6e}")
        if self.location:
            parts.append(f"at {self.location}")
        if self.note:
            parts.append(f"[{self.note}]")
        return " ".join(parts)


@dataclass(frozen=True)
class CommonInfluencerResult:
    """Outcome of the shared-influencer structure check."""

    holds: bool
    witnesses: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)
    failing_pair: tuple[int, int] | None = None
    reason: str = ""


# ---------------------------------------------------------------------------
# Point-set geometry helpers


def _cloud_diameter(points: np.ndarray) -> float:
    """Largest pairwise distance in a point cloud (exact)."""
    pts = np.asarray(points, dtype=float)
    pts = pts.reshape(-1, pts.shape[-1])
    p = pts.shape[0]
    if p <= 1:
        return 0.0
    if pts.shape[1] == 1:
        return float(pts.max() - pts.min())
    sq = np.einsum("ij,ij->i", pts, pts)
    best = 0.0
    block = max(1, int(2**22 // max(p, 1)))
    for lo in range(0, p, block):
        hi = min(lo + block, p)
        g = pts[lo:hi] @ pts.T
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * g
        best = max(best, float(d2.max()))
    return math.sqrt(max(best, 0.0))


def _diameter_series(traj: Trajectory) -> np.ndarray:
    """Max pairwise distance over the tracked entity set at every stamp."""
    cached = getattr(traj, "_diam_series", None)
    if cached is not None:
        return cached
    states = traj.states
    length = states.shape[0]
    out = np.empty(length)
    block = max(1, int(2**22 // (states.shape[1] ** 2 * states.shape[2] + 1)))
    for lo in range(0, length, block):
        hi = min(lo + block, length)
        x = states[lo:hi]
        diff = x[:, :, None, :] - x[:, None, :, :]
        d2 = np.einsum("tijk,tijk->tij", diff, diff)
        out[lo:hi] = np.sqrt(d2.reshape(hi - lo, -1).max(axis=1))
    traj._diam_series = out
    return out


def diameter(trajectory: Trajectory, t: float) -> float:
    """Diameter of the tracked agent set (followers plus any leaders) at ``t``."""
    idx = trajectory.grid_index(t)
    return float(_diameter_series(trajectory)[idx])


def _window_indices(traj: Trajectory, lo: float, hi: float) -> tuple[int, int]:
    times = traj.times
    i0 = int(np.searchsorted(times, lo - 1e-9, side="left"))
    i1 = int(np.searchsorted(times, hi + 1e-9, side="right")) - 1
    return i0, i1


def interval_diameters(
    trajectory: Trajectory,
    tau: float | None = None,
    origin: float = 0.0,
    count: int | None = None,
) -> np.ndarray:
    """Sequence of window diameters over ``[origin+(n-1)*tau, origin+n*tau]``.

    Index ``n`` maximises the pairwise distance over all tracked entities and
    all pairs of (possibly different) grid times inside the window.  With
    ``tau == 0`` the windows degenerate; a single-entry sequence holding the
    instantaneous diameter at the origin is returned.
    """
    scenario = trajectory.scenario
    if tau is None:
        tau = certificate_delay(scenario)
    if tau <= 0.0:
        return np.asarray([diameter(trajectory, origin)])
    t_end = trajectory.times[-1]
    n_max = int(math.floor((t_end - origin) / tau + 1e-9))
    if count is not None:
        n_max = min(n_max, count - 1)
    out = np.empty(max(n_max + 1, 0))
    states = trajectory.states
    for n in range(n_max + 1):
        i0, i1 = _window_indices(trajectory, origin + (n - 1) * tau, origin + n * tau)
        i0 = max(i0, 0)
        cloud = states[i0 : i1 + 1].reshape(-1, scenario.dim)
        out[n] = _cloud_diameter(cloud)
    return out


# ---------------------------------------------------------------------------
# Structure check


def check_ci(
    chi: AdjacencyMask | np.ndarray,
    delays: DelayMatrix | np.ndarray,
    delay_tolerance: float = 0.0,
) -> CommonInfluencerResult:
    """Search a common influencer for every unordered agent pair.

    A pair (i, j) is served by any third agent k that transmits to both with
    exactly equal delays (equality up to ``delay_tolerance``, zero by default
    since configured delays are compared as given).  Returns all witnesses,
    or the first failing pair in lexicographic order.
    """
    mask = chi.entries if isinstance(chi, AdjacencyMask) else np.asarray(chi, dtype=float)
    lags = delays.entries if isinstance(delays, DelayMatrix) else np.asarray(delays, dtype=float)
    if mask.shape != lags.shape or mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise ConfigurationError(
            f"common-influencer check needs matching square inputs, got {mask.shape} and {lags.shape}"
        )
    n = mask.shape[0]
    if n < 3:
        return CommonInfluencerResult(False, {}, None, "no third agent")
    witnesses: dict[tuple[int, int], tuple[int, ...]] = {}
    for i in range(n):
        for j in range(i + 1, n):
            ok = (mask[i] > 0) & (mask[j] > 0) & (np.abs(lags[i] - lags[j]) <= delay_tolerance)
            ok[i] = ok[j] = False
            ks = np.flatnonzero(ok)
            if ks.size == 0:
                return CommonInfluencerResult(False, {}, (i, j), "pair has no common influencer")
            witnesses[(i, j)] = tuple(int(k) for k in ks)
    return CommonInfluencerResult(True, witnesses, None, "")


def _full_structure(scenario: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mask/delay matrices over followers and leaders for structure checks."""
    n, e = scenario.n_followers, scenario.n_entities
    mask = np.zeros((e, e))
    mask[:n, :n] = scenario.chi.entries
    mask[:, n:] = 1.0
    mask[n:, :n] = 0.0
    np.fill_diagonal(mask, 0.0)
    return mask, scenario.delays.entries


# ---------------------------------------------------------------------------
# A-priori bounds from the initial data


def _history_cloud(scenario: ScenarioConfig, window: float) -> np.ndarray:
    pts = [h.knots(-window, 0.0) for h in scenario.histories]
    return np.concatenate(pts, axis=0)


def state_bound(scenario: ScenarioConfig) -> float:
    """A-priori bound on every tracked opinion norm, from the initial data.

    For the steered-leader variant the bound is ``|target| + R`` with ``R``
    the containment radius: every follower stays within ``R`` of the target
    and the leader travels on the segment toward it.
    """
    if isinstance(scenario.variant, SingleLeaderControlled):
        return float(np.linalg.norm(scenario.variant.target)) + containment_radius(scenario)
    cloud = _history_cloud(scenario, scenario.tau_max)
    return float(np.linalg.norm(cloud, axis=1).max())


def containment_radius(scenario: ScenarioConfig) -> float:
    """Largest initial distance of any entity history from the leader target."""
    if not isinstance(scenario.variant, SingleLeaderControlled):
        raise ConfigurationError("containment radius is defined for the controlled variant only")
    cloud = _history_cloud(scenario, scenario.tau_max)
    return float(np.linalg.norm(cloud - scenario.variant.target[None, :], axis=1).max())


def initial_spread(scenario: ScenarioConfig, window: float | None = None) -> float:
    """Window diameter of the initial histories over ``[-window, 0]`` (exact).

    Histories are constant or piecewise linear, so the maximum pairwise
    distance is attained at sample knots or window endpoints.
    """
    if window is None:
        window = certificate_delay(scenario)
    return _cloud_diameter(_history_cloud(scenario, window))


def certificate_delay(scenario: ScenarioConfig) -> float:
    """The delay bound entering the window machinery, per variant.

    The pinned- and steered-leader variants exclude the leader lags: the
    pinned leader is read without delay, and the steered one is analysed
    after arrival, when its delayed reads are constant.
    """
    ref = (scenario.chi.entries > 0)
    n = scenario.n_followers
    fmax = float(scenario.delays.entries[:n, :n][ref].max()) if ref.any() else 0.0
    if isinstance(scenario.variant, (MultiLeader, TwoLeaders)):
        lead = float(scenario.leader_source_delays.max()) if scenario.n_leaders else 0.0
        return max(fmax, lead)
    return fmax


def leader_read_delay(scenario: ScenarioConfig) -> float:
    """Largest lag at which followers read the steered leader."""
    n = scenario.n_followers
    return float(scenario.delays.entries[:n, n].max())


# ---------------------------------------------------------------------------
# Certificate construction


def consensus_constants(scenario: ScenarioConfig) -> DecayCertificate:
    """Evaluate the certified decay constants for the scenario's variant.

    The contraction factor couples the kernel floor over the reachable state
    ball with the population normaliser of the variant's averaging rule; the
    window contraction and the envelope rate follow from it.  With two
    leaders the largest of the three case factors is used so the certificate
    dominates every case.
    """
    variant = scenario.variant
    n, m = scenario.n_followers, scenario.n_leaders
    k_sup = max(t.sup() for t in scenario.kernels.values())
    bound = state_bound(scenario)
    floor = min(t.floor_on_ball(bound) for t in scenario.kernels.values())
    tau = certificate_delay(scenario)
    shrink = -math.expm1(-k_sup * tau)  # 1 - exp(-K*tau), no cancellation
    note = ""

    if isinstance(variant, General):
        gap = floor / (k_sup * (n - 1)) * shrink
    elif isinstance(variant, (SingleLeaderConstant, SingleLeaderControlled)):
        gap = floor / (k_sup * n) * shrink
    elif isinstance(variant, MultiLeader):
        gap = floor / (k_sup * (n + m - 1)) * shrink
        note = "population-extrapolated factor over followers and leaders"
    elif isinstance(variant, TwoLeaders):
        gap = min(
            floor / (k_sup * (n + 1)) * shrink,
            math.exp(-2.0 * k_sup * tau),
            floor / k_sup * shrink,
        )
        note = "dominates all three two-leader contraction cases"
    else:  # pragma: no cover
        raise ConfigurationError(f"unknown variant {variant!r}")

    wgap = math.exp(-k_sup * tau) * gap
    if tau == 0.0:
        rate = math.inf
        note = (note + "; " if note else "") + "delay=0: no window structure, rate sentinel"
    else:
        rate = -math.log1p(-wgap) / (3.0 * tau)
    return DecayCertificate(
        kernel_sup=k_sup,
        kernel_floor=floor,
        state_bound=bound,
        initial_spread=initial_spread(scenario, tau if tau > 0 else scenario.tau_max),
        contraction=1.0 - gap,
        contraction_gap=gap,
        window_contraction=1.0 - wgap,
        window_gap=wgap,
        decay_rate=rate,
        delay=tau,
        variant=variant_kind(variant),
        note=note,
    )


# ---------------------------------------------------------------------------
# Verifiers


def _verification_origin(traj: Trajectory, cert: DecayCertificate) -> tuple[float, float, str] | None:
    """Time origin and initial window spread for envelope-type checks.

    Returns ``(origin, spread, note)`` or None when the check cannot start
    (steered leader that never arrived).  For the steered leader the origin
    is the first grid time from which every delayed leader read is already
    pinned to the target, which reduces the dynamics to the pinned-leader
    system; the window spread is then measured on the trajectory itself.
    """
    scenario = traj.scenario
    if not isinstance(scenario.variant, SingleLeaderControlled):
        return 0.0, cert.initial_spread, ""
    if traj.arrival_time is None:
        return None
    h = scenario.step_h
    start = traj.arrival_time + leader_read_delay(scenario)
    origin = math.ceil(start / h - 1e-9) * h
    if origin > traj.times[-1] + 1e-9:
        return None
    i0, i1 = _window_indices(traj, origin - cert.delay, origin)
    spread = _cloud_diameter(traj.states[max(i0, 0) : i1 + 1].reshape(-1, scenario.dim))
    return origin, spread, f"post-arrival origin t={origin:.6g}"


def _ci_gate(traj: Trajectory) -> CommonInfluencerResult | None:
    scenario = traj.scenario
    if isinstance(scenario.variant, General):
        n = scenario.n_followers
        return check_ci(scenario.chi, scenario.delays.entries[:n, :n])
    return None


def verify_decay_envelope(traj: Trajectory, cert: DecayCertificate | None = None) -> VerifierReport:
    """Check the exponential envelope implied by the certificate.

    Asserts ``d(t) <= spread * exp(-rate*(t - origin - 2*delay)) + tol`` at
    every grid time in scope.  For the plain variant the check is gated on
    the common-influencer structure; for the steered leader it starts once
    the leader's delayed reads have settled on the target.
    """
    scenario = traj.scenario
    if cert is None:
        cert = consensus_constants(scenario)
    tol = tolerance_for(scenario)
    name = "decay_envelope"
    ci = _ci_gate(traj)
    if ci is not None and not ci.holds:
        return VerifierReport(
            name, "INAPPLICABLE", None, tol,
            note=f"certificate inapplicable: no common influencer for pair {ci.failing_pair}"
            if ci.failing_pair else f"certificate inapplicable: {ci.reason}",
        )
    if not math.isfinite(cert.decay_rate):
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="delay=0 certificate is degenerate")
    anchored = _verification_origin(traj, cert)
    if anchored is None:
        return VerifierReport(
            name, "INAPPLICABLE", None, tol, note="leader did not arrive within the horizon"
        )
    origin, spread, note = anchored
    d = _diameter_series(traj)
    times = traj.times
    start = traj.grid_index(origin)
    exponent = np.clip(-cert.decay_rate * (times[start:] - origin - 2.0 * cert.delay), -745.0, 709.0)
    envelope = spread * np.exp(exponent)
    viol = d[start:] - envelope
    worst = int(np.argmax(viol))
    margin = float(viol[worst])
    status = "FAIL" if margin > tol else "PASS"
    return VerifierReport(name, status, margin, tol, f"t={times[start + worst]:.6g}", note)


def _snap_diameters(traj: Trajectory, origin: float, tau: float, count: int) -> np.ndarray:
    """Instantaneous diameters at the window endpoints, snapped to the grid."""
    h = traj.scenario.step_h
    d = _diameter_series(traj)
    out = np.empty(count)
    last = len(traj.times) - 1
    for n in range(count):
        k = int(round((origin + n * tau) / h)) + traj.zero_index
        out[n] = d[min(max(k, 0), last)]
    return out


def verify_interval_recursion(traj: Trajectory, cert: DecayCertificate | None = None) -> VerifierReport:
    """Window diameters obey the one-step averaging recursion.

    ``D_{n+1} <= exp(-K*tau) * d(n*tau) + (1 - exp(-K*tau)) * D_n`` for every
    window the trajectory covers.
    """
    scenario = traj.scenario
    if cert is None:
        cert = consensus_constants(scenario)
    tol = tolerance_for(scenario)
    name = "interval_recursion"
    if cert.delay <= 0:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="delay=0: windows degenerate")
    anchored = _verification_origin(traj, cert)
    if anchored is None:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="leader did not arrive within the horizon")
    origin, _, note = anchored
    dn = interval_diameters(traj, cert.delay, origin)
    if dn.size < 2:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="horizon shorter than one window")
    d_at = _snap_diameters(traj, origin, cert.delay, dn.size)
    decay = math.exp(-cert.kernel_sup * cert.delay)
    rhs = decay * d_at[:-1] + (1.0 - decay) * dn[:-1]
    viol = dn[1:] - rhs
    worst = int(np.argmax(viol))
    margin = float(viol[worst])
    status = "FAIL" if margin > tol else "PASS"
    return VerifierReport(name, status, margin, tol, f"window n={worst + 1}", note)


def verify_dn_monotone(traj: Trajectory, cert: DecayCertificate | None = None) -> VerifierReport:
    """Window diameters never increase from one window to the next."""
    scenario = traj.scenario
    if cert is None:
        cert = consensus_constants(scenario)
    tol = tolerance_for(scenario)
    name = "interval_monotonicity"
    if cert.delay <= 0:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="delay=0: windows degenerate")
    anchored = _verification_origin(traj, cert)
    if anchored is None:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="leader did not arrive within the horizon")
    origin, _, note = anchored
    dn = interval_diameters(traj, cert.delay, origin)
    if dn.size < 2:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="horizon shorter than one window")
    viol = np.diff(dn)
    worst = int(np.argmax(viol))
    margin = float(viol[worst])
    status = "FAIL" if margin > tol else "PASS"
    return VerifierReport(name, status, margin, tol, f"window n={worst + 1}", note)


def verify_contraction(traj: Trajectory, cert: DecayCertificate | None = None) -> VerifierReport:
    """Instantaneous diameter contracts against the window two steps back:
    ``d(n*tau) <= C * D_{n-2}`` for all windows with ``n >= 2``."""
    scenario = traj.scenario
    if cert is None:
        cert = consensus_constants(scenario)
    tol = tolerance_for(scenario)
    name = "contraction"
    ci = _ci_gate(traj)
    if ci is not None and not ci.holds:
        return VerifierReport(
            name, "INAPPLICABLE", None, tol,
            note=f"certificate inapplicable: no common influencer for pair {ci.failing_pair}"
            if ci.failing_pair else f"certificate inapplicable: {ci.reason}",
        )
    if cert.delay <= 0:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="delay=0: windows degenerate")
    anchored = _verification_origin(traj, cert)
    if anchored is None:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="leader did not arrive within the horizon")
    origin, _, note = anchored
    dn = interval_diameters(traj, cert.delay, origin)
    if dn.size < 3:
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="horizon shorter than two windows")
    d_at = _snap_diameters(traj, origin, cert.delay, dn.size)
    viol = d_at[2:] - cert.contraction * dn[:-2]
    worst = int(np.argmax(viol))
    margin = float(viol[worst])
    status = "FAIL" if margin > tol else "PASS"
    return VerifierReport(name, status, margin, tol, f"n={worst + 2}", note)


def _hull_directions(dim: int) -> np.ndarray:
    rng = np.random.default_rng(_HULL_DIRECTION_SEED)
    extra = rng.normal(size=(_N_RANDOM_DIRECTIONS, dim))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.concatenate([np.eye(dim), extra])


def verify_hull_and_bound(traj: Trajectory, cert: DecayCertificate | None = None) -> VerifierReport:
    """Directional hull containment plus the global norm bound.

    For each coordinate direction and a fixed set of seeded random unit
    directions, states after a window never leave the projected range the
    window spans.  Independently, every tracked norm stays below the
    a-priori state bound.  For the steered leader, hull windows start only
    once the dynamics have reduced to the pinned-leader system; the norm
    bound (target norm plus containment radius) covers the whole run.
    """
    scenario = traj.scenario
    if cert is None:
        cert = consensus_constants(scenario)
    tol = tolerance_for(scenario)
    name = "hull_and_bound"
    times = traj.times
    states = traj.states

    norms = np.linalg.norm(states[traj.zero_index :], axis=2)
    k_bound = int(np.argmax(norms.max(axis=1)))
    bound_margin = float(norms.max() - cert.state_bound)
    bound_loc = f"t={times[traj.zero_index + k_bound]:.6g}"

    tau = cert.delay
    hull_margin = -math.inf
    hull_loc = ""
    note = ""
    window_start = 0.0
    if isinstance(scenario.variant, SingleLeaderControlled):
        if traj.arrival_time is None:
            note = "hull windows skipped: leader did not arrive"
            tau = 0.0
        else:
            window_start = traj.arrival_time + leader_read_delay(scenario) + tau
            note = f"hull windows from t={window_start:.6g} (post-arrival reduction)"
    if tau > 0.0:
        h = scenario.step_h
        t_end = times[-1]
        anchors = []
        k = 0
        while True:
            t_anchor = k * tau
            if t_anchor > t_end + 1e-9:
                break
            if t_anchor >= window_start - 1e-9:
                anchors.append(t_anchor)
            k += 1
        directions = _hull_directions(scenario.dim)
        flat = states.reshape(-1, scenario.dim)
        for v in directions:
            proj = (flat @ v).reshape(states.shape[0], states.shape[1])
            per_t_max = proj.max(axis=1)
            per_t_min = proj.min(axis=1)
            sfx_max = np.maximum.accumulate(per_t_max[::-1])[::-1]
            sfx_min = np.minimum.accumulate(per_t_min[::-1])[::-1]
            for t_anchor in anchors:
                i0, i1 = _window_indices(traj, t_anchor - tau, t_anchor)
                i0 = max(i0, 0)
                m_hi = per_t_max[i0 : i1 + 1].max()
                m_lo = per_t_min[i0 : i1 + 1].min()
                over = float(sfx_max[i0] - m_hi)
                under = float(m_lo - sfx_min[i0])
                local = max(over, under)
                if local > hull_margin:
                    hull_margin = local
                    hull_loc = f"window T={t_anchor:.6g}"
    elif not note:
        note = "hull windows skipped: delay=0"

    if hull_margin > bound_margin:
        margin, loc = hull_margin, hull_loc + " (hull)"
    else:
        margin, loc = bound_margin, bound_loc + " (norm bound)"
    status = "FAIL" if margin > tol else "PASS"
    return VerifierReport(name, status, margin, tol, loc, note)


def verify_r_containment(traj: Trajectory) -> VerifierReport:
    """Steered-leader guarantees: followers stay within the containment
    radius of the target, the leader arrives on schedule and stays pinned."""
    scenario = traj.scenario
    tol = tolerance_for(scenario)
    name = "r_containment"
    if not isinstance(scenario.variant, SingleLeaderControlled):
        return VerifierReport(name, "INAPPLICABLE", None, tol, note="variant has no steered leader")
    target = scenario.variant.target
    n = scenario.n_followers
    radius = containment_radius(scenario)
    z = traj.zero_index
    dist = np.linalg.norm(traj.states[z:, :n] - target[None, None, :], axis=2)
    k_worst = int(np.argmax(dist.max(axis=1)))
    margin = float(dist.max() - radius)
    loc = f"t={traj.times[z + k_worst]:.6g}"

    h = scenario.step_h
    notes = [f"containment radius R={radius:.6g}"]
    failed = margin > tol
    if traj.arrival_time is None:
        failed = True
        notes.append("leader did not arrive within the horizon")
    else:
        y0 = traj.states[z, n]
        expected = float(np.linalg.norm(y0 - target)) / scenario.variant.speed_limit
        drift = abs(traj.arrival_time - expected)
        notes.append(f"arrival t0={traj.arrival_time:.6g} expected {expected:.6g}")
        if drift > h + 1e-9:
            failed = True
            notes.append("arrival time off by more than one step")
        ka = traj.grid_index(traj.arrival_time)
        pinned = np.linalg.norm(traj.states[ka:, n] - target[None, :], axis=1)
        if float(pinned.max()) > 0.0:
            failed = True
            notes.append("leader moved after pinning")
    status = "FAIL" if failed else "PASS"
    return VerifierReport(name, status, margin, tol, loc, "; ".join(notes))


# ---------------------------------------------------------------------------
# Orchestration


def ci_report(traj: Trajectory) -> VerifierReport | None:
    """Structure check as a report line, for the variants where it applies."""
    scenario = traj.scenario
    if isinstance(scenario.variant, General):
        n = scenario.n_followers
        result = check_ci(scenario.chi, scenario.delays.entries[:n, :n])
        if result.holds:
            return VerifierReport(
                "common_influencer", "PASS", 0.0, 0.0,
                note=f"witnesses for all {len(result.witnesses)} pairs",
            )
        where = f"pair {result.failing_pair}" if result.failing_pair else result.reason
        return VerifierReport("common_influencer", "FAIL", None, 0.0, note=where)
    if isinstance(scenario.variant, MultiLeader):
        mask, lags = _full_structure(scenario)
        result = check_ci(mask, lags)
        status = "PASS" if result.holds else "FAIL"
        return VerifierReport(
            "common_influencer", status, 0.0, 0.0,
            note="checked over followers and leaders jointly",
        )
    return None


def run_all_checks(
    traj: Trajectory, cert: DecayCertificate | None = None
) -> tuple[DecayCertificate, list[VerifierReport]]:
    """Every verifier applicable to the trajectory's variant, in fixed order."""
    if cert is None:
        cert = consensus_constants(traj.scenario)
    reports: list[VerifierReport] = []
    structural = ci_report(traj)
    if structural is not None:
        reports.append(structural)
    reports.append(verify_hull_and_bound(traj, cert))
    reports.append(verify_dn_monotone(traj, cert))
    reports.append(verify_interval_recursion(traj, cert))
    reports.append(verify_contraction(traj, cert))
    reports.append(verify_decay_envelope(traj, cert))
    if isinstance(traj.scenario.variant, SingleLeaderControlled):
        reports.append(verify_r_containment(traj))
    return cert, reports


def empirical_decay_rate(traj: Trajectory, cert: DecayCertificate | None = None) -> float:
    """Least-squares slope of log d over the window endpoints (sign-flipped).

    Returns NaN when fewer than three windows carry a usable diameter.
    """
    scenario = traj.scenario
    if cert is None:
        cert = consensus_constants(scenario)
    if cert.delay <= 0:
        return math.nan
    anchored = _verification_origin(traj, cert)
    if anchored is None:
        return math.nan
    origin, spread, _ = anchored
    dn_count = interval_diameters(traj, cert.delay, origin).size
    d_at = _snap_diameters(traj, origin, cert.delay, dn_count)
    ts = origin + cert.delay * np.arange(dn_count)
    keep = d_at > 1e-12 * max(spread, 1.0)
    if keep.sum() < 3:
        return math.nan
    slope = np.polyfit(ts[keep], np.log(d_at[keep]), 1)[0]
    return float(-slope)
