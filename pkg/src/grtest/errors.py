"""Shared exception types."""


class DegenerateDataError(ValueError):
    """A statistic is undefined on the given data (zero variance, no events)."""


class BudgetExceededError(RuntimeError):
    """Exact enumeration would exceed the configured orbit budget."""


class ConfigError(ValueError):
    """A simulation grid configuration is invalid."""
