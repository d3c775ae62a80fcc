"""Scenario ingestion: JSON documents to validated configurations.

Document layout::

    {
      "variant": {"kind": "general"}
                 | {"kind": "multi_leader", "m": 3}
                 | {"kind": "single_leader_constant", "anchor": [...]}
                 | {"kind": "single_leader_controlled", "target": [...], "speed_limit": 1.0}
                 | {"kind": "two_leaders"},
      "N": 10, "d": 1,
      "chi": "complete" | [[0/1 ...]],
      "delays": 5.0 | [[N x N]] | [[E x E]],
      "leader_delays": 5.0 | [per-leader ...],            # multi/two-leader reads
      "leader_follower_delays": 1.0 | [per-follower ...], # controlled-leader reads
      "kernels": {"a": K, "b": K, "c": K},
      "histories": {"followers": [H, ...] | {"random_box": {"low": .., "high": ..}},
                    "leaders":   [H, ...]},
      "seed": 42,
      "step_h": 0.01, "horizon_T": 300.0,
      "tolerance": null
    }

Kernel descriptors ``K``: ``{"kind": "constant", "level": ..}``,
``{"kind": "gaussian", "center": .., "scale": ..}``,
``{"kind": "tabulated", "samples": [[r, v], ...]}``,
``{"kind": "coupling_fraction", "divisor": ..}`` (role "c" only: a constant
kernel at the largest peer-kernel supremum divided by the divisor, which
defaults to the variant's follower normaliser), or
``{"kind": "per_pair", "default": K, "overrides": [[i, j, K], ...]}``.

History entries ``H``: ``{"constant": [...]}`` or
``{"samples": [[t, [...]], ...]}``.  ``random_box`` draws constant follower
opinions uniformly from ``[low, high]^d`` using the document seed.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .kernels import ConstantKernel, GaussianShiftedKernel, TabulatedRadialKernel
from .model import (
    KERNEL_ROLE_AMONG,
    KERNEL_ROLE_FOLLOWER,
    KERNEL_ROLE_LEADER,
    AdjacencyMask,
    ConstantHistory,
    General,
    KernelTable,
    MultiLeader,
    SampledHistory,
    ScenarioConfig,
    SingleLeaderConstant,
    SingleLeaderControlled,
    TwoLeaders,
    assemble_scenario,
    leader_count,
)


def _need(doc: dict, key: str, path: str):
    if key not in doc:
        raise ConfigurationError(f"{path}{key}: missing required field")
    return doc[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{path}: expected an integer, got {value!r}")
    return value


def _vector(value, path: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ConfigurationError(f"{path}: expected a non-empty list of numbers")
    return [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _parse_variant(doc, path: str):
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: expected an object with a 'kind' tag")
    kind = _need(doc, "kind", f"{path}.")
    if kind == "general":
        return General()
    if kind == "multi_leader":
        return MultiLeader(_integer(_need(doc, "m", f"{path}."), f"{path}.m"))
    if kind == "single_leader_constant":
        return SingleLeaderConstant(np.asarray(_vector(_need(doc, "anchor", f"{path}."), f"{path}.anchor")))
    if kind == "single_leader_controlled":
        return SingleLeaderControlled(
            np.asarray(_vector(_need(doc, "target", f"{path}."), f"{path}.target")),
            _number(_need(doc, "speed_limit", f"{path}."), f"{path}.speed_limit"),
        )
    if kind == "two_leaders":
        return TwoLeaders()
    raise ConfigurationError(f"{path}.kind: unknown variant {kind!r}")


def _parse_kernel(doc, path: str):
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: expected a kernel descriptor object")
    kind = _need(doc, "kind", f"{path}.")
    if kind == "constant":
        return ConstantKernel(_number(_need(doc, "level", f"{path}."), f"{path}.level"))
    if kind == "gaussian":
        return GaussianShiftedKernel(
            _number(doc.get("center", 1.0), f"{path}.center"),
            _number(doc.get("scale", 1.0), f"{path}.scale"),
        )
    if kind == "tabulated":
        samples = _need(doc, "samples", f"{path}.")
        if not isinstance(samples, list) or not samples:
            raise ConfigurationError(f"{path}.samples: expected a non-empty list of [r, value] pairs")
        try:
            return TabulatedRadialKernel.from_samples(samples)
        except (TypeError, IndexError):
            raise ConfigurationError(f"{path}.samples: entries must be [r, value] pairs") from None
    raise ConfigurationError(f"{path}.kind: unknown kernel {kind!r}")


def _parse_kernel_role(doc, path: str, shape: tuple[int, int], peer_sup: float | None, divisor: float):
    if isinstance(doc, dict) and doc.get("kind") == "coupling_fraction":
        if peer_sup is None:
            raise ConfigurationError(f"{path}: coupling_fraction is only valid for role 'c'")
        div = _number(doc.get("divisor", divisor), f"{path}.divisor")
        if div <= 0:
            raise ConfigurationError(f"{path}.divisor: must be positive")
        return KernelTable.shared(ConstantKernel(peer_sup / div), shape)
    if isinstance(doc, dict) and doc.get("kind") == "per_pair":
        default = _parse_kernel(_need(doc, "default", f"{path}."), f"{path}.default")
        overrides = {}
        for idx, entry in enumerate(doc.get("overrides", [])):
            if not (isinstance(entry, list) and len(entry) == 3):
                raise ConfigurationError(f"{path}.overrides[{idx}]: expected [i, j, kernel]")
            i = _integer(entry[0], f"{path}.overrides[{idx}][0]")
            j = _integer(entry[1], f"{path}.overrides[{idx}][1]")
            overrides[(i, j)] = _parse_kernel(entry[2], f"{path}.overrides[{idx}][2]")
        return KernelTable.with_overrides(default, shape, overrides)
    return KernelTable.shared(_parse_kernel(doc, path), shape)


def _parse_history(doc, dim: int, path: str):
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: expected a history object")
    if "constant" in doc:
        vec = _vector(doc["constant"], f"{path}.constant")
        if len(vec) != dim:
            raise ConfigurationError(f"{path}.constant: length {len(vec)} != d={dim}")
        return ConstantHistory(np.asarray(vec))
    if "samples" in doc:
        samples = doc["samples"]
        if not isinstance(samples, list) or len(samples) < 2:
            raise ConfigurationError(f"{path}.samples: need at least two [t, value] samples")
        ts, vs = [], []
        for idx, entry in enumerate(samples):
            if not (isinstance(entry, list) and len(entry) == 2):
                raise ConfigurationError(f"{path}.samples[{idx}]: expected [t, [coords]]")
            ts.append(_number(entry[0], f"{path}.samples[{idx}][0]"))
            vec = _vector(entry[1], f"{path}.samples[{idx}][1]")
            if len(vec) != dim:
                raise ConfigurationError(f"{path}.samples[{idx}][1]: length {len(vec)} != d={dim}")
            vs.append(vec)
        return SampledHistory(np.asarray(ts), np.asarray(vs))
    raise ConfigurationError(f"{path}: history needs 'constant' or 'samples'")


def _delay_parts(doc: dict, n: int, m: int, variant) -> tuple:
    raw = _need(doc, "delays", "")
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        follower = float(raw)
        lead = doc.get("leader_delays", raw if m > 0 else None)
        lead_follow = doc.get("leader_follower_delays", raw)
        return follower, lead, lead_follow
    arr = np.asarray(raw, dtype=float)
    e = n + m
    if arr.shape == (n, n):
        return arr, doc.get("leader_delays"), doc.get("leader_follower_delays")
    if arr.shape == (e, e) and m > 0:
        lead = None
        lead_follow = None
        if isinstance(variant, (MultiLeader, TwoLeaders)):
            lead = []
            for j in range(m):
                col = np.delete(arr[:, n + j], n + j)  # the diagonal entry is unused
                if np.any(col != col[0]):
                    raise ConfigurationError(
                        f"delays: column {n + j} must hold a single lag per source leader"
                    )
                lead.append(float(col[0]))
        elif isinstance(variant, SingleLeaderControlled):
            lead_follow = arr[:n, n].tolist()
        return arr[:n, :n], lead, lead_follow
    raise ConfigurationError(
        f"delays: expected a scalar, an {n}x{n} matrix, or an {e}x{e} matrix; got shape {arr.shape}"
    )


def parse_scenario(doc: dict, name: str = "") -> ScenarioConfig:
    """Validate a parsed JSON document and build the scenario."""
    if not isinstance(doc, dict):
        raise ConfigurationError("scenario: top level must be an object")
    variant = _parse_variant(_need(doc, "variant", ""), "variant")
    n = _integer(_need(doc, "N", ""), "N")
    dim = _integer(_need(doc, "d", ""), "d")
    m = leader_count(variant)

    chi_raw = doc.get("chi", "complete")
    if isinstance(chi_raw, str):
        if chi_raw != "complete":
            raise ConfigurationError(f"chi: unknown shorthand {chi_raw!r}")
        chi = AdjacencyMask.complete(n)
    else:
        arr = np.asarray(chi_raw)
        if arr.ndim != 2 or arr.shape != (n, n):
            raise ConfigurationError(f"chi: expected an {n}x{n} matrix, got shape {arr.shape}")
        chi = AdjacencyMask(arr)

    follower_delays, leader_delays, leader_follower_delays = _delay_parts(doc, n, m, variant)

    kernels_doc = _need(doc, "kernels", "")
    if not isinstance(kernels_doc, dict):
        raise ConfigurationError("kernels: expected an object with kernel roles")
    roles = (
        (KERNEL_ROLE_AMONG,)
        if isinstance(variant, General)
        else (KERNEL_ROLE_FOLLOWER, KERNEL_ROLE_LEADER)
        if isinstance(variant, (SingleLeaderConstant, SingleLeaderControlled))
        else (KERNEL_ROLE_AMONG, KERNEL_ROLE_FOLLOWER, KERNEL_ROLE_LEADER)
    )
    shapes = {
        KERNEL_ROLE_AMONG: (n, n) if isinstance(variant, General) else (m, m),
        KERNEL_ROLE_FOLLOWER: (n, n),
        KERNEL_ROLE_LEADER: (n, m),
    }
    normaliser = {
        "general": n - 1,
        "multi_leader": n + m - 1,
        "single_leader_constant": n,
        "single_leader_controlled": n,
        "two_leaders": n + 1,
    }
    tables = {}
    peer_sup = None
    for role in roles:
        if role == KERNEL_ROLE_LEADER:
            peer_sup = max(tables[r].sup() for r in tables) if tables else None
        spec = _need(kernels_doc, role, "kernels.")
        tables[role] = _parse_kernel_role(
            spec,
            f"kernels.{role}",
            shapes[role],
            peer_sup if role == KERNEL_ROLE_LEADER else None,
            float(normaliser[_variant_key(variant)]),
        )

    hist_doc = _need(doc, "histories", "")
    if not isinstance(hist_doc, dict):
        raise ConfigurationError("histories: expected an object")
    seed = doc.get("seed", 0)
    followers_raw = _need(hist_doc, "followers", "histories.")
    if isinstance(followers_raw, dict) and "random_box" in followers_raw:
        box = followers_raw["random_box"]
        low = _number(_need(box, "low", "histories.followers.random_box."), "histories.followers.random_box.low")
        high = _number(_need(box, "high", "histories.followers.random_box."), "histories.followers.random_box.high")
        if high <= low:
            raise ConfigurationError("histories.followers.random_box: need high > low")
        rng = np.random.default_rng(_integer(seed, "seed"))
        values = rng.uniform(low, high, size=(n, dim))
        follower_histories = [ConstantHistory(values[i]) for i in range(n)]
    elif isinstance(followers_raw, list):
        follower_histories = [
            _parse_history(h, dim, f"histories.followers[{i}]") for i, h in enumerate(followers_raw)
        ]
    else:
        raise ConfigurationError("histories.followers: expected a list or a random_box object")

    leaders_raw = hist_doc.get("leaders")
    leader_histories = None
    if leaders_raw is not None:
        if not isinstance(leaders_raw, list):
            raise ConfigurationError("histories.leaders: expected a list")
        leader_histories = [
            _parse_history(h, dim, f"histories.leaders[{i}]") for i, h in enumerate(leaders_raw)
        ]

    tolerance = doc.get("tolerance")
    if tolerance is not None:
        tolerance = _number(tolerance, "tolerance")

    return assemble_scenario(
        variant=variant,
        n_followers=n,
        dim=dim,
        chi=chi,
        follower_delays=follower_delays,
        leader_delays=leader_delays,
        leader_follower_delays=leader_follower_delays,
        kernels=tables,
        follower_histories=follower_histories,
        leader_histories=leader_histories,
        step_h=_number(_need(doc, "step_h", ""), "step_h"),
        horizon=_number(_need(doc, "horizon_T", ""), "horizon_T"),
        tolerance=tolerance,
        name=name or str(doc.get("name", "")),
    )


def _variant_key(variant) -> str:
    from .model import variant_kind

    return variant_kind(variant)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{p}: cannot read scenario file ({exc})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{p}: invalid JSON at line {exc.lineno}, column {exc.colno}") from None
    return parse_scenario(doc, name=p.stem)
