"""Exception hierarchy for cavity-bragg."""

from typing import Optional


class CavityBraggError(ValueError):
    """Base class for every error raised by the library."""


class BudgetExceeded(CavityBraggError):
    """Exact enumeration would exceed the configured configuration budget."""

    def __init__(self, requested: int, budget: int, message: Optional[str] = None):
        self.requested = requested
        self.budget = budget
        super().__init__(
            message or f"Enumeration needs {requested} configurations, budget is {budget}"
        )


class DomainError(CavityBraggError):
    """Argument outside the domain of an operation."""


class DimensionError(CavityBraggError):
    """Invalid Hilbert-space dimension."""


class UnsupportedCombination(CavityBraggError):
    """State/geometry combination without a collapse-time prediction."""
