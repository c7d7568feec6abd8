"""Exception types shared across the package."""


class ReAugmentError(Exception):
    """Base class for all package errors."""


class DimensionError(ReAugmentError, ValueError):
    """Array shapes do not agree."""


class ConfigError(ReAugmentError, ValueError):
    """Invalid configuration or arguments."""


class FormatError(ReAugmentError, ValueError):
    """Malformed input file."""


class NumericalError(ReAugmentError, FloatingPointError):
    """Non-finite values encountered during training or an update step."""


class UsageError(ReAugmentError, RuntimeError):
    """An API was called out of order (e.g. backward without a forward cache)."""


class UndefinedMetricError(ReAugmentError, ZeroDivisionError):
    """A ratio metric has a zero denominator."""


class StageError(ReAugmentError, RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
