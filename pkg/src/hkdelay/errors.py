"""Exception types shared across the package."""
from __future__ import annotations


class ConfigurationError(ValueError):
    """A scenario, kernel, or matrix is malformed (user input error)."""


class InvariantViolation(RuntimeError):
    """A mathematical invariant the certificates rely on does not hold."""


class HistoryRangeError(RuntimeError):
    """A state lookup outside the covered time range (programming bug)."""


class IntegrationError(RuntimeError):
    """A non-finite state was produced while stepping a system.

    Carries the time and the entity index at which the blow-up was seen.
    """

    def __init__(self, time: float, entity: int):
        super().__init__(f"non-finite state at t={time:g} for entity {entity}")
        self.time = time
        self.entity = entity
