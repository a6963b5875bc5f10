"""Exception types shared across the package."""


class DevfreqError(Exception):
    """Base class for package errors."""


class DomainError(DevfreqError, ValueError):
    """An argument lies outside the domain of a function."""


class HypothesisViolation(DevfreqError, ValueError):
    """Parameters violate a stated hypothesis of a bound.

    The message names the violated condition, e.g. ``"β − αγ > 0"``.
    """

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        msg = f"violated hypothesis: {condition}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ResourceLimitError(DevfreqError, RuntimeError):
    """A grid or factorization would exceed the configured budget."""


class ConfigError(DevfreqError, ValueError):
    """An experiment configuration could not be parsed or validated."""
