"""Fixed-step integration of the delayed systems by the method of steps.

The solver advances with the explicit midpoint rule on a uniform grid and
resolves every delayed state through linear interpolation in a growing
history buffer.  The initial history is sampled onto the same grid, so the
buffer covers ``[-tau_max, t]`` with no gap larger than one step.  Delays
smaller than half a step (including zero) are handled by bridging between
the last committed snapshot and the current integration stage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import HistoryRangeError, IntegrationError
from .model import ScenarioConfig, SingleLeaderControlled

_FRAC_SNAP = 1e-9  # fractional index this close to a stamp counts as exact


class HistoryBuffer:
    """Uniform-grid record of all entity states on ``[-tau_max, t_current]``.

    Stamps are ``(k - k0) * step`` for ``k = 0 .. len-1`` where ``k0`` is the
    number of pre-zero history stamps; time zero is always a stamp.
    """

    def __init__(self, *, step: float, n_history: int, n_entities: int, dim: int, capacity: int):
        self.step = float(step)
        self.k0 = int(n_history)
        self._times = np.empty(capacity)
        self._states = np.empty((capacity, n_entities, dim))
        self._len = 0

    # -- construction -----------------------------------------------------

    def append(self, state: np.ndarray) -> float:
        k = self._len
        t = (k - self.k0) * self.step
        self._times[k] = t
        self._states[k] = state
        self._len = k + 1
        return t

    # -- views ------------------------------------------------------------

    def __len__(self) -> int:
        return self._len

    @property
    def times(self) -> np.ndarray:
        return self._times[: self._len]

    @property
    def states(self) -> np.ndarray:
        return self._states[: self._len]

    @property
    def t_start(self) -> float:
        return self._times[0]

    @property
    def t_current(self) -> float:
        return self._times[self._len - 1]

    def last_state(self) -> np.ndarray:
        return self._states[self._len - 1]

    def pin_last(self, entity: int, value: np.ndarray) -> None:
        self._states[self._len - 1, entity] = value

    # -- lookup -----------------------------------------------------------

    def _positions(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        pos = np.asarray(t, dtype=float) / self.step + self.k0
        base = np.floor(pos + _FRAC_SNAP)
        frac = pos - base
        frac[frac < _FRAC_SNAP] = 0.0
        return base.astype(np.int64), frac

    def gather(
        self,
        t: np.ndarray,
        sources: np.ndarray,
        bridge_time: float | None = None,
        bridge_state: np.ndarray | None = None,
    ) -> np.ndarray:
        """States of ``sources`` at query times ``t`` (shape ``t.shape[:-1] x S``).

        ``t`` has shape (..., S) matching the broadcast of ``sources``; values
        beyond the last stamp are interpolated toward the supplied bridge
        stage, values before the first stamp raise.
        """
        t = np.asarray(t, dtype=float)
        base, frac = self._positions(t)
        last = self._len - 1
        over = base > last
        if np.any(over) or np.any((base == last) & (frac > 0)):
            if bridge_time is None:
                bad = float(t[over][0]) if np.any(over) else float(t[(base == last) & (frac > 0)][0])
                raise HistoryRangeError(f"state lookup at t={bad:g} beyond covered range")
            over = (base == last) & (frac > 0) | over
        else:
            over = np.zeros(t.shape, dtype=bool)
        if np.any(base < 0):
            bad = float(t[base < 0][0])
            raise HistoryRangeError(f"state lookup at t={bad:g} before covered range")

        src = np.broadcast_to(sources, t.shape)
        k_lo = np.minimum(base, last)
        k_hi = np.minimum(base + 1, last)
        w = frac[..., None]
        out = (1.0 - w) * self._states[k_lo, src] + w * self._states[k_hi, src]
        if np.any(over):
            t_last = self._times[last]
            span = bridge_time - t_last
            wb = ((t[over] - t_last) / span)[..., None]
            out[over] = (1.0 - wb) * self._states[last, src[over]] + wb * bridge_state[src[over]]
        return out

    def lookup(self, t: float, entity: int) -> np.ndarray:
        """Single delayed-state lookup; exact at stamps, linear in between."""
        value = self.gather(np.asarray([[float(t)]]), np.asarray([int(entity)]))
        return value[0, 0]


def history_lookup(buffer: HistoryBuffer, t: float, agent: int) -> np.ndarray:
    """Recorded state of ``agent`` at time ``t`` within the covered range."""
    return buffer.lookup(t, agent)


@dataclass(eq=False)
class Trajectory:
    """An integrated run: the scenario plus the filled state buffer."""

    scenario: ScenarioConfig
    buffer: HistoryBuffer
    arrival_time: float | None = None

    @property
    def times(self) -> np.ndarray:
        return self.buffer.times

    @property
    def states(self) -> np.ndarray:
        return self.buffer.states

    @property
    def zero_index(self) -> int:
        return self.buffer.k0

    def grid_index(self, t: float) -> int:
        """Index of the stamp equal to ``t``; raises for off-grid times."""
        pos = t / self.buffer.step + self.buffer.k0
        k = int(round(pos))
        if abs(pos - k) > 1e-6 or not (0 <= k < len(self.buffer)):
            raise HistoryRangeError(f"t={t!r} is not a recorded grid time")
        return k

    def state_at(self, t: float) -> np.ndarray:
        return self.buffer.states[self.grid_index(t)]


class StageReader:
    """Delayed-state access for one right-hand-side evaluation."""

    def __init__(self, buffer: HistoryBuffer, t: float, state: np.ndarray):
        self.buffer = buffer
        self.t = float(t)
        self.state = state

    def delayed_block(self, taus: np.ndarray, sources: np.ndarray) -> np.ndarray:
        """(R, S, d) block of source states at ``t - taus``."""
        q = self.t - np.asarray(taus, dtype=float)
        return self.buffer.gather(q, np.asarray(sources), self.t, self.state)


def history_steps(scenario: ScenarioConfig) -> int:
    if scenario.tau_max <= 0:
        return 0
    return int(math.ceil(scenario.tau_max / scenario.step_h - 1e-9))


def seed_history(scenario: ScenarioConfig, extra_capacity: int = 0) -> HistoryBuffer:
    """Buffer prefilled with the initial histories sampled on the step grid.

    When ``tau_max`` is not a step multiple the first stamp lies below
    ``-tau_max``; histories are evaluated with their time clamped to the
    declared interval, a constant extension confined to that single cell.
    """
    k0 = history_steps(scenario)
    h = scenario.step_h
    buf = HistoryBuffer(
        step=h,
        n_history=k0,
        n_entities=scenario.n_entities,
        dim=scenario.dim,
        capacity=k0 + 1 + extra_capacity,
    )
    tau = scenario.tau_max
    stamps = (np.arange(k0 + 1) - k0) * h
    t_eval = np.clip(stamps, -tau, 0.0)
    block = np.empty((k0 + 1, scenario.n_entities, scenario.dim))
    for e, hist in enumerate(scenario.histories):
        block[:, e, :] = hist.at(t_eval)
    for k in range(k0 + 1):
        buf.append(block[k])
    return buf


def step_count(scenario: ScenarioConfig) -> int:
    return int(math.ceil(scenario.horizon / scenario.step_h - 1e-9))


def integrate(scenario: ScenarioConfig, rhs=None) -> Trajectory:
    """Advance the scenario to (at least) its horizon and record every step.

    ``rhs`` maps ``(state, reader)`` to per-entity velocities and defaults to
    the right-hand side matching ``scenario.variant``.  For the controlled
    variant the leader is pinned to the target at the first grid time it
    comes within one step of it, and stays pinned.
    """
    from .dynamics import make_rhs, SystemState

    if rhs is None:
        rhs = make_rhs(scenario)
    n_steps = step_count(scenario)
    buf = seed_history(scenario, extra_capacity=n_steps)
    h = scenario.step_h
    n = scenario.n_followers

    arrival: float | None = None
    controlled = isinstance(scenario.variant, SingleLeaderControlled)
    if controlled:
        target = scenario.variant.target
        reach = scenario.variant.speed_limit * h * (1 + 1e-9) + 1e-12
        y0 = buf.last_state()[n]
        if float(np.linalg.norm(y0 - target)) <= reach:
            buf.pin_last(n, target)
            arrival = 0.0

    def as_state(t: float, x: np.ndarray) -> SystemState:
        return SystemState(t=t, followers=x[:n], leaders=x[n:])

    for _ in range(n_steps):
        t = buf.t_current
        x = buf.last_state()
        k1 = rhs(as_state(t, x), StageReader(buf, t, x))
        xm = x + (0.5 * h) * k1
        tm = t + 0.5 * h
        k2 = rhs(as_state(tm, xm), StageReader(buf, tm, xm))
        x_new = x + h * k2
        if not np.all(np.isfinite(x_new)):
            entity = int(np.argwhere(~np.isfinite(x_new).all(axis=1))[0, 0])
            raise IntegrationError(t + h, entity)
        t_new = buf.append(x_new)
        if controlled and arrival is None:
            if float(np.linalg.norm(x_new[n] - target)) <= reach:
                buf.pin_last(n, target)
                arrival = t_new

    return Trajectory(scenario=scenario, buffer=buf, arrival_time=arrival)
