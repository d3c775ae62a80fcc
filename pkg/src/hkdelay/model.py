"""Domain types for delayed opinion-formation scenarios.

Entity layout convention used throughout the package: followers come first
(indices ``0 .. N-1``), leaders after them (``N .. N+m-1``).  All arrays are
made read-only after validation; every operation downstream is pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import ConfigurationError
from .kernels import InfluenceKernel, ConstantKernel

KERNEL_ROLE_AMONG = "a"  # peer coupling (followers in the plain model, leaders otherwise)
KERNEL_ROLE_FOLLOWER = "b"  # follower-to-follower coupling in leader variants
KERNEL_ROLE_LEADER = "c"  # leader-to-follower coupling


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _as_opinion(value, dim: int, what: str) -> np.ndarray:
    v = np.asarray(value, dtype=float).reshape(-1)
    if v.shape != (dim,):
        raise ConfigurationError(f"{what}: expected a vector of length {dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ConfigurationError(f"{what}: entries must be finite")
    return _freeze(v)


# ---------------------------------------------------------------------------
# Model variants


@dataclass(frozen=True)
class General:
    """No leaders; masked, pairwise-delayed interaction among all agents."""


@dataclass(frozen=True)
class MultiLeader:
    """A group of at least three leaders coupled all-to-all among themselves."""

    n_leaders: int

    def __post_init__(self):
        if self.n_leaders < 3:
            raise ConfigurationError(
                "MultiLeader requires at least 3 leaders; use the dedicated one- or "
                "two-leader variants for smaller groups"
            )


@dataclass(frozen=True, eq=False)
class SingleLeaderConstant:
    """One leader pinned at a fixed opinion."""

    anchor: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "anchor", _freeze(np.asarray(self.anchor, dtype=float).reshape(-1)))


@dataclass(frozen=True, eq=False)
class SingleLeaderControlled:
    """One leader steered at bounded speed toward a target opinion."""

    target: np.ndarray
    speed_limit: float

    def __post_init__(self):
        object.__setattr__(self, "target", _freeze(np.asarray(self.target, dtype=float).reshape(-1)))
        if not (math.isfinite(self.speed_limit) and self.speed_limit > 0):
            raise ConfigurationError("speed_limit must be a positive finite real")


@dataclass(frozen=True)
class TwoLeaders:
    """Two leaders, each coupled only to the other."""


ModelVariant = Union[General, MultiLeader, SingleLeaderConstant, SingleLeaderControlled, TwoLeaders]


def leader_count(variant: ModelVariant) -> int:
    if isinstance(variant, General):
        return 0
    if isinstance(variant, MultiLeader):
        return variant.n_leaders
    if isinstance(variant, (SingleLeaderConstant, SingleLeaderControlled)):
        return 1
    if isinstance(variant, TwoLeaders):
        return 2
    raise ConfigurationError(f"unknown variant {variant!r}")


def variant_kind(variant: ModelVariant) -> str:
    return {
        General: "general",
        MultiLeader: "multi_leader",
        SingleLeaderConstant: "single_leader_constant",
        SingleLeaderControlled: "single_leader_controlled",
        TwoLeaders: "two_leaders",
    }[type(variant)]


# ---------------------------------------------------------------------------
# Interaction structure


@dataclass(frozen=True, eq=False)
class AdjacencyMask:
    """0/1 matrix; entry (i, j) = 1 iff j transmits information to i.

    The diagonal is ignored by every operation and stored as zero.
    """

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigurationError(f"chi: mask must be square, got shape {m.shape}")
        if not np.isin(m, (0, 1)).all():
            raise ConfigurationError("chi: mask entries must be 0 or 1")
        m = m.astype(float)
        np.fill_diagonal(m, 0.0)
        object.__setattr__(self, "entries", _freeze(m))

    @classmethod
    def complete(cls, n: int) -> "AdjacencyMask":
        return cls(np.ones((n, n)))

    @property
    def size(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class DelayMatrix:
    """Pairwise delays over the full entity set, plus the referenced maximum.

    ``tau_max`` is the maximum over the entries a variant actually reads;
    unreferenced entries (masked-out pairs, the unused leader column of the
    pinned-leader variant, diagonals) do not contribute.
    """

    entries: np.ndarray
    tau_max: float

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigurationError(f"delays: matrix must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise ConfigurationError("delays: entries must be finite and nonnegative")
        object.__setattr__(self, "entries", _freeze(m))


# ---------------------------------------------------------------------------
# Initial histories


@dataclass(frozen=True, eq=False)
class ConstantHistory:
    """History frozen at a single opinion on the whole initial interval."""

    value: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "value", _freeze(np.asarray(self.value, dtype=float).reshape(-1)))
        if not np.all(np.isfinite(self.value)):
            raise ConfigurationError("history: constant value must be finite")

    @property
    def dim(self) -> int:
        return self.value.shape[0]

    def at(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        return np.broadcast_to(self.value, t.shape + self.value.shape).copy()

    def covers(self, lo: float) -> bool:
        return True

    def knots(self, lo: float, hi: float) -> np.ndarray:
        return self.value.reshape(1, -1)


@dataclass(frozen=True, eq=False)
class SampledHistory:
    """Piecewise-linear history through (time, opinion) samples."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if t.shape[0] != v.shape[0] or t.shape[0] < 2:
            raise ConfigurationError("history: need >= 2 samples with matching times/values")
        if np.any(np.diff(t) <= 0):
            raise ConfigurationError("history: sample times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise ConfigurationError("history: samples must be finite")
        object.__setattr__(self, "times", _freeze(t))
        object.__setattr__(self, "values", _freeze(v))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def at(self, times) -> np.ndarray:
        t = np.asarray(times, dtype=float)
        out = np.empty(t.shape + (self.dim,))
        for c in range(self.dim):
            out[..., c] = np.interp(t, self.times, self.values[:, c])
        return out

    def covers(self, lo: float) -> bool:
        return self.times[0] <= lo + 1e-12 and self.times[-1] >= -1e-12

    def knots(self, lo: float, hi: float) -> np.ndarray:
        inside = (self.times > lo) & (self.times < hi)
        ts = np.concatenate(([lo], self.times[inside], [hi]))
        return self.at(ts)


History = Union[ConstantHistory, SampledHistory]


# ---------------------------------------------------------------------------
# Kernel assignment tables


@dataclass(eq=False)
class KernelTable:
    """Kernel assignment for one coupling role over an (R, S) index block.

    A single shared kernel is the common case; per-pair overrides map to an
    integer id matrix so that weight evaluation stays vectorised.
    """

    kernels: tuple[InfluenceKernel, ...]
    ids: np.ndarray  # (R, S) indices into kernels

    def __post_init__(self):
        self.ids = _freeze(np.asarray(self.ids, dtype=np.int64))

    @classmethod
    def shared(cls, kernel: InfluenceKernel, shape: tuple[int, int]) -> "KernelTable":
        return cls((kernel,), np.zeros(shape, dtype=np.int64))

    @classmethod
    def with_overrides(
        cls,
        default: InfluenceKernel,
        shape: tuple[int, int],
        overrides: Mapping[tuple[int, int], InfluenceKernel],
    ) -> "KernelTable":
        kernels = [default]
        ids = np.zeros(shape, dtype=np.int64)
        for (i, j), k in sorted(overrides.items()):
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise ConfigurationError(f"kernel override index {(i, j)} outside block {shape}")
            try:
                idx = kernels.index(k)
            except ValueError:
                kernels.append(k)
                idx = len(kernels) - 1
            ids[i, j] = idx
        return cls(tuple(kernels), ids)

    @property
    def shape(self) -> tuple[int, int]:
        return self.ids.shape

    def weights(self, r: np.ndarray) -> np.ndarray:
        """Evaluate the per-pair kernel on a matching matrix of distances."""
        if len(self.kernels) == 1:
            return self.kernels[0].radial(r)
        out = np.empty_like(np.asarray(r, dtype=float))
        for idx, k in enumerate(self.kernels):
            sel = self.ids == idx
            out[sel] = k.radial(np.asarray(r)[sel])
        return out

    def kernel_at(self, i: int, j: int) -> InfluenceKernel:
        return self.kernels[int(self.ids[i, j])]

    def sup(self) -> float:
        return max(k.sup() for k in self.kernels)

    def floor_on_ball(self, radius_bound: float) -> float:
        from .kernels import kernel_inf_on_ball

        return min(kernel_inf_on_ball(k, radius_bound) for k in self.kernels)


# ---------------------------------------------------------------------------
# Full scenario


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """Complete problem statement for one simulation/verification run."""

    variant: ModelVariant
    n_followers: int
    dim: int
    chi: AdjacencyMask
    delays: DelayMatrix  # (E, E) over followers-then-leaders
    kernels: Mapping[str, KernelTable]
    histories: tuple[History, ...]  # length E, followers first
    step_h: float
    horizon: float
    leader_source_delays: np.ndarray = field(default_factory=lambda: np.zeros(0))
    effective_delays: np.ndarray | None = None  # referenced lags only, zeros elsewhere
    tolerance: float | None = None
    name: str = ""

    @property
    def n_leaders(self) -> int:
        return leader_count(self.variant)

    @property
    def n_entities(self) -> int:
        return self.n_followers + self.n_leaders

    @property
    def tau_max(self) -> float:
        return self.delays.tau_max

    @property
    def leader_indices(self) -> np.ndarray:
        return np.arange(self.n_followers, self.n_entities)

    def entity_kind(self, index: int) -> str:
        return "follower" if index < self.n_followers else "leader"


def _full_delay_matrix(
    variant: ModelVariant,
    n: int,
    chi: AdjacencyMask,
    follower_delays: np.ndarray,
    leader_source_delays: np.ndarray | None,
    leader_follower_delays: np.ndarray | None,
) -> tuple[DelayMatrix, np.ndarray, np.ndarray]:
    m = leader_count(variant)
    e = n + m
    full = np.zeros((e, e))
    full[:n, :n] = follower_delays

    src = np.zeros(m)
    if isinstance(variant, (MultiLeader, TwoLeaders)):
        if leader_source_delays is None:
            raise ConfigurationError("leader_delays: required for multi/two-leader variants")
        src = np.asarray(leader_source_delays, dtype=float).reshape(-1)
        if src.shape != (m,):
            raise ConfigurationError(f"leader_delays: expected {m} values, got {src.shape[0]}")
        # Source-indexed: every reader of leader j sees the same lag.
        full[:, n:] = src[None, :]
    elif isinstance(variant, SingleLeaderControlled):
        if leader_follower_delays is None:
            raise ConfigurationError("leader_follower_delays: required for the controlled variant")
        col = np.asarray(leader_follower_delays, dtype=float).reshape(-1)
        if col.shape != (n,):
            raise ConfigurationError(
                f"leader_follower_delays: expected {n} values, got {col.shape[0]}"
            )
        full[:n, n] = col
    # SingleLeaderConstant: the leader column is never read.

    referenced = np.zeros((e, e), dtype=bool)
    follower_block = chi.entries > 0
    referenced[:n, :n] = follower_block
    if isinstance(variant, (MultiLeader, TwoLeaders)):
        referenced[:, n:] = True
        referenced[np.arange(n, e), np.arange(n, e)] = False
        referenced[n:, :n] = False
    elif isinstance(variant, SingleLeaderControlled):
        referenced[:n, n] = True
    tau_max = float(full[referenced].max()) if referenced.any() else 0.0
    # Lags the right-hand sides actually read; unreferenced entries are
    # zeroed so a fused state gather never reaches outside the buffer.
    effective = np.where(referenced, full, 0.0)
    return DelayMatrix(full, tau_max), src, effective


def assemble_scenario(
    *,
    variant: ModelVariant,
    n_followers: int,
    dim: int,
    chi: AdjacencyMask | np.ndarray | None = None,
    follower_delays: float | np.ndarray = 0.0,
    leader_delays: float | Sequence[float] | None = None,
    leader_follower_delays: float | Sequence[float] | None = None,
    kernels: Mapping[str, KernelTable | InfluenceKernel],
    follower_histories: Sequence[History],
    leader_histories: Sequence[History] | None = None,
    step_h: float,
    horizon: float,
    tolerance: float | None = None,
    name: str = "",
) -> ScenarioConfig:
    """Validate and wire all the pieces of a scenario together.

    Scalar delays broadcast to every referenced pair.  For the pinned-leader
    variant the leader history defaults to the anchor opinion.
    """
    n = int(n_followers)
    d = int(dim)
    if n < 2:
        raise ConfigurationError(f"N: need at least 2 followers, got {n}")
    if d < 1:
        raise ConfigurationError(f"d: need dimension >= 1, got {d}")
    m = leader_count(variant)

    if isinstance(variant, SingleLeaderConstant) and variant.anchor.shape != (d,):
        raise ConfigurationError("variant.anchor: dimension mismatch with d")
    if isinstance(variant, SingleLeaderControlled) and variant.target.shape != (d,):
        raise ConfigurationError("variant.target: dimension mismatch with d")

    if chi is None:
        chi = AdjacencyMask.complete(n)
    elif not isinstance(chi, AdjacencyMask):
        chi = AdjacencyMask(np.asarray(chi))
    if chi.size != n:
        raise ConfigurationError(f"chi: mask is {chi.size}x{chi.size} but N={n}")

    fd = np.asarray(follower_delays, dtype=float)
    if fd.ndim == 0:
        fd = np.full((n, n), float(fd))
    if fd.shape != (n, n):
        raise ConfigurationError(f"delays: expected {n}x{n} follower block, got {fd.shape}")

    if leader_delays is not None and np.ndim(leader_delays) == 0:
        leader_delays = [float(leader_delays)] * m
    if leader_follower_delays is not None and np.ndim(leader_follower_delays) == 0:
        leader_follower_delays = [float(leader_follower_delays)] * n

    delays, src, effective = _full_delay_matrix(
        variant, n, chi, fd,
        None if leader_delays is None else np.asarray(leader_delays, dtype=float),
        None if leader_follower_delays is None else np.asarray(leader_follower_delays, dtype=float),
    )

    roles = _roles_for(variant)
    tables: dict[str, KernelTable] = {}
    shapes = {
        KERNEL_ROLE_AMONG: (n, n) if isinstance(variant, General) else (m, m),
        KERNEL_ROLE_FOLLOWER: (n, n),
        KERNEL_ROLE_LEADER: (n, m),
    }
    for role in roles:
        try:
            spec = kernels[role]
        except KeyError:
            raise ConfigurationError(f"kernels.{role}: required for this variant") from None
        if isinstance(spec, KernelTable):
            if spec.shape != shapes[role]:
                raise ConfigurationError(
                    f"kernels.{role}: table shape {spec.shape} != expected {shapes[role]}"
                )
            tables[role] = spec
        else:
            tables[role] = KernelTable.shared(spec, shapes[role])

    if len(follower_histories) != n:
        raise ConfigurationError(
            f"histories.followers: expected {n} entries, got {len(follower_histories)}"
        )
    if m == 0:
        leader_histories = []
    elif isinstance(variant, SingleLeaderConstant):
        if leader_histories is None or len(leader_histories) == 0:
            leader_histories = [ConstantHistory(variant.anchor)]
        if len(leader_histories) != 1:
            raise ConfigurationError("histories.leaders: pinned-leader variant takes one history")
        only = leader_histories[0]
        if not (isinstance(only, ConstantHistory) and np.array_equal(only.value, variant.anchor)):
            raise ConfigurationError(
                "histories.leaders: pinned leader history must equal the anchor opinion"
            )
    else:
        if leader_histories is None or len(leader_histories) != m:
            got = 0 if leader_histories is None else len(leader_histories)
            raise ConfigurationError(f"histories.leaders: expected {m} entries, got {got}")

    histories = tuple(follower_histories) + tuple(leader_histories)
    for idx, h in enumerate(histories):
        if h.dim != d:
            raise ConfigurationError(f"histories[{idx}]: dimension {h.dim} != d={d}")
        if not h.covers(-delays.tau_max):
            raise ConfigurationError(
                f"histories[{idx}]: samples must cover [-{delays.tau_max:g}, 0]"
            )

    if not (math.isfinite(step_h) and step_h > 0):
        raise ConfigurationError(f"step_h: must be positive finite, got {step_h!r}")
    if delays.tau_max > 0 and step_h > delays.tau_max + 1e-12:
        raise ConfigurationError(
            f"step_h: {step_h:g} exceeds the largest referenced delay {delays.tau_max:g}; "
            "need at least one step per delay interval"
        )
    if not (math.isfinite(horizon) and horizon >= 0):
        raise ConfigurationError(f"horizon_T: must be nonnegative finite, got {horizon!r}")
    if tolerance is not None and not (math.isfinite(tolerance) and tolerance > 0):
        raise ConfigurationError(f"tolerance: must be positive finite, got {tolerance!r}")

    return ScenarioConfig(
        variant=variant,
        n_followers=n,
        dim=d,
        chi=chi,
        delays=delays,
        kernels=tables,
        histories=histories,
        step_h=float(step_h),
        horizon=float(horizon),
        leader_source_delays=_freeze(src),
        effective_delays=_freeze(effective),
        tolerance=tolerance,
        name=name,
    )


def _roles_for(variant: ModelVariant) -> tuple[str, ...]:
    if isinstance(variant, General):
        return (KERNEL_ROLE_AMONG,)
    if isinstance(variant, (SingleLeaderConstant, SingleLeaderControlled)):
        return (KERNEL_ROLE_FOLLOWER, KERNEL_ROLE_LEADER)
    return (KERNEL_ROLE_AMONG, KERNEL_ROLE_FOLLOWER, KERNEL_ROLE_LEADER)
