"""Influence kernels: positive bounded radial weight functions.

The coupling weight between an agent and a (possibly delayed) neighbour is a
kernel evaluated on the distance between their opinion vectors.  Only closed
kernel families are supported so that the exact supremum and the exact
infimum over a bounded region are computable; both enter the certified decay
constants and cannot be left to black-box callables.

* ``ConstantKernel`` -- a fixed positive level, independent of distance.
* ``GaussianShiftedKernel`` -- ``scale * exp(-(r - center)**2)``.
* ``TabulatedRadialKernel`` -- linear interpolation of positive samples,
  extended with the boundary sample values outside the tabulated range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError, InvariantViolation


def _check_positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ConfigurationError(f"{name} must be a positive finite real, got {value!r}")


@dataclass(frozen=True)
class ConstantKernel:
    """Distance-independent weight."""

    level: float

    def __post_init__(self):
        _check_positive("ConstantKernel.level", self.level)

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return np.full(r.shape, self.level)

    def sup(self) -> float:
        return self.level

    def inf_on_ball(self, radius_bound: float) -> float:
        return self.level


@dataclass(frozen=True)
class GaussianShiftedKernel:
    """``scale * exp(-(r - center)**2)`` on the distance ``r >= 0``.

    The default ``center=1, scale=1`` peaks at unit distance.
    """

    center: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        _check_positive("GaussianShiftedKernel.scale", self.scale)
        if not math.isfinite(self.center):
            raise ConfigurationError("GaussianShiftedKernel.center must be finite")

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return self.scale * np.exp(-((r - self.center) ** 2))

    def sup(self) -> float:
        # Maximum over r >= 0: at r=center when reachable, else at r=0.
        if self.center >= 0.0:
            return self.scale
        return self.scale * math.exp(-(self.center**2))

    def inf_on_ball(self, radius_bound: float) -> float:
        # On [0, 2*radius_bound] the kernel is unimodal, so the minimum sits
        # at one of the interval endpoints.
        hi = 2.0 * radius_bound
        return min(
            self.scale * math.exp(-((0.0 - self.center) ** 2)),
            self.scale * math.exp(-((hi - self.center) ** 2)),
        )


@dataclass(frozen=True)
class TabulatedRadialKernel:
    """Piecewise-linear positive kernel given as (radius, value) samples."""

    radii: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.radii) != len(self.values) or len(self.radii) == 0:
            raise ConfigurationError("TabulatedRadialKernel needs matching, non-empty samples")
        r = np.asarray(self.radii, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(r)) or np.any(r < 0) or np.any(np.diff(r) <= 0):
            raise ConfigurationError(
                "TabulatedRadialKernel radii must be finite, nonnegative, strictly increasing"
            )
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ConfigurationError("TabulatedRadialKernel values must be positive finite")

    @classmethod
    def from_samples(cls, samples) -> "TabulatedRadialKernel":
        radii = tuple(float(s[0]) for s in samples)
        values = tuple(float(s[1]) for s in samples)
        return cls(radii, values)

    def radial(self, r):
        # np.interp holds the boundary sample values outside the table.
        r = np.asarray(r, dtype=float)
        return np.interp(r, self.radii, self.values)

    def sup(self) -> float:
        return float(max(self.values))

    def inf_on_ball(self, radius_bound: float) -> float:
        # Piecewise-linear minima sit at sample knots or interval endpoints;
        # the evaluation grid is therefore the knots inside [0, 2*radius_bound]
        # plus the two endpoints, which is exact.
        hi = 2.0 * radius_bound
        pts = [0.0, hi] + [r for r in self.radii if 0.0 < r < hi]
        return float(np.min(self.radial(np.asarray(pts))))


InfluenceKernel = Union[ConstantKernel, GaussianShiftedKernel, TabulatedRadialKernel]


def eval_kernel(kernel: InfluenceKernel, xi, xj_delayed) -> float:
    """Weight between opinion ``xi`` and (delayed) opinion ``xj_delayed``."""
    a = np.asarray(xi, dtype=float)
    b = np.asarray(xj_delayed, dtype=float)
    if a.shape != b.shape:
        raise ConfigurationError(f"opinion dimension mismatch: {a.shape} vs {b.shape}")
    r = float(np.linalg.norm(a - b))
    return float(kernel.radial(r))


def kernel_sup(kernel: InfluenceKernel) -> float:
    """Supremum of the kernel over its whole domain."""
    return float(kernel.sup())


def kernel_inf_on_ball(kernel: InfluenceKernel, radius_bound: float, dim: int = 1) -> float:
    """Infimum of the kernel over pairs of points with norm <= radius_bound.

    For the radial families this is the infimum over distances in
    ``[0, 2*radius_bound]``; ``dim`` does not affect that range and is kept
    for interface completeness.
    """
    if radius_bound < 0 or not math.isfinite(radius_bound):
        raise ConfigurationError(f"radius_bound must be finite nonnegative, got {radius_bound!r}")
    value = float(kernel.inf_on_ball(float(radius_bound)))
    if not value > 0.0:
        raise InvariantViolation(
            f"kernel infimum {value!r} on ball radius {radius_bound:g} is not strictly "
            "positive (value underflowed or kernel is not positive); certificates need "
            "a positive floor"
        )
    return value
