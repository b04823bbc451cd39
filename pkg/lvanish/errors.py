"""
Exception hierarchy for lvanish.

Library code raises these; the CLI maps them to exit codes and the MCP
server turns them into ``{"error": ...}`` tool results.
"""

from typing import Optional


class LVanishError(Exception):
    """Base class for every error raised by lvanish."""


class ValidationError(LVanishError):
    """Input to an operation violates its preconditions."""


class ConfigError(ValidationError):
    """A job configuration failed schema validation."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class PoleError(LVanishError):
    """Slash operator evaluated where gamma_21 * x + gamma_22 == 0."""


class SearchBudgetError(LVanishError):
    """A bounded search ran out of budget before finding an answer."""


class GeodesicProximityError(LVanishError):
    """A floating point evaluation point sits too close to a geodesic."""

    def __init__(self, message: str, form: Optional[object] = None):
        self.form = form
        super().__init__(message)


class CostLimitError(LVanishError):
    """An evaluation point exceeds the configured enumeration cost rail."""
