"""Trajectory persistence: delimited text, lossless round trips.

Rows carry ``t, entity, kind, c0, ..., c{d-1}`` with floats printed at 17
significant digits, which round-trips IEEE doubles exactly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .integrator import Trajectory


@dataclass(eq=False)
class TrajectoryData:
    """Plain trajectory content as stored on disk."""

    times: np.ndarray  # (L,)
    states: np.ndarray  # (L, E, d)
    kinds: tuple[str, ...]  # per entity: "follower" | "leader"

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    @property
    def n_entities(self) -> int:
        return self.states.shape[1]


def from_trajectory(traj: Trajectory) -> TrajectoryData:
    kinds = tuple(traj.scenario.entity_kind(e) for e in range(traj.scenario.n_entities))
    return TrajectoryData(times=traj.times.copy(), states=traj.states.copy(), kinds=kinds)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory(data: Trajectory | TrajectoryData, path: str | Path) -> None:
    """Write the full recorded run (initial history included) as CSV."""
    if isinstance(data, Trajectory):
        data = from_trajectory(data)
    d = data.dim
    header = ["t", "entity", "kind"] + [f"c{c}" for c in range(d)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k, t in enumerate(data.times):
            ts = _fmt(t)
            for e in range(data.n_entities):
                writer.writerow([ts, e, data.kinds[e]] + [_fmt(v) for v in data.states[k, e]])


def read_trajectory(path: str | Path) -> TrajectoryData:
    """Parse a trajectory CSV back into arrays (bit-exact)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read trajectory file ({exc})") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError(f"{path}: empty trajectory file") from None
        if header[:3] != ["t", "entity", "kind"] or len(header) < 4:
            raise ConfigurationError(f"{path}: malformed header {header!r}")
        dim = len(header) - 3
        times: list[float] = []
        kinds: dict[int, str] = {}
        rows: list[tuple[int, int, list[float]]] = []
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3 + dim:
                raise ConfigurationError(f"{path}:{ln}: expected {3 + dim} columns, got {len(row)}")
            try:
                t = float(row[0])
                entity = int(row[1])
                coords = [float(v) for v in row[3 : 3 + dim]]
            except ValueError:
                raise ConfigurationError(f"{path}:{ln}: non-numeric value") from None
            kind = row[2]
            if kind not in ("follower", "leader"):
                raise ConfigurationError(f"{path}:{ln}: unknown entity kind {kind!r}")
            prev = kinds.setdefault(entity, kind)
            if prev != kind:
                raise ConfigurationError(f"{path}:{ln}: entity {entity} changes kind")
            if not times or t != times[-1]:
                times.append(t)
            rows.append((len(times) - 1, entity, coords))

    if not rows:
        raise ConfigurationError(f"{path}: no data rows")
    n_entities = max(kinds) + 1
    if sorted(kinds) != list(range(n_entities)):
        raise ConfigurationError(f"{path}: entity indices are not contiguous")
    states = np.full((len(times), n_entities, dim), np.nan)
    for k, entity, coords in rows:
        states[k, entity] = coords
    if np.isnan(states).any():
        raise ConfigurationError(f"{path}: missing entity rows for some grid times")
    kind_list = tuple(kinds[e] for e in range(n_entities))
    return TrajectoryData(times=np.asarray(times), states=states, kinds=kind_list)
