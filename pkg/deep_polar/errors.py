from __future__ import annotations


class DeepPolarError(Exception):
    """Base class for errors raised by the deep_polar package."""


class InvalidArgument(DeepPolarError, ValueError):
    pass


class ConstructionInfeasible(DeepPolarError, ValueError):
    """A code description violates one of its structural invariants."""

    def __init__(self, invariant: str, detail: str = "") -> None:
        self.invariant = invariant
        message = f"construction infeasible ({invariant})"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class ConfigRejected(DeepPolarError, ValueError):
    """Simulation config refused before any trial runs."""
