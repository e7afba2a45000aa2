"""Exception hierarchy.

Every exception carries an ``exit_code`` used by the command line front end:
2 for configuration problems, 3 when the input violates a mathematical
hypothesis, 4 for numerical failures.
"""

from __future__ import annotations

__all__ = [
    "HypermomentError",
    "ConfigError",
    "OrderLimitError",
    "WindowError",
    "HypothesisError",
    "AdmissibilityError",
    "NonExponentialError",
    "NotAVarietyError",
    "IndependenceError",
    "NotInSpanError",
    "BasisNotDegreeOrderedError",
    "HypothesisViolatedError",
    "SineSpaceDimensionError",
    "DimensionAmbiguousError",
    "NotASineError",
    "IndeterminateDegreeError",
    "ConditioningError",
    "DivergenceError",
]


class HypermomentError(Exception):
    exit_code = 4


class ConfigError(HypermomentError, ValueError):
    exit_code = 2


class OrderLimitError(ConfigError):
    pass


class WindowError(HypermomentError, IndexError):
    """A requested point or translate falls outside the available window."""

    def __init__(self, message: str, first_invalid: int | None = None):
        super().__init__(message)
        self.first_invalid = first_invalid


class HypothesisError(HypermomentError):
    """The input is not an instance of the mathematical structure required."""

    exit_code = 3


class AdmissibilityError(HypothesisError):
    def __init__(self, message: str, where: tuple[int, ...] | None = None):
        super().__init__(message)
        self.where = where


class NonExponentialError(HypothesisError):
    pass


class NotAVarietyError(HypothesisError):
    pass


class IndependenceError(HypothesisError):
    pass


class NotInSpanError(HypothesisError):
    pass


class BasisNotDegreeOrderedError(HypothesisError):
    pass


class HypothesisViolatedError(HypothesisError):
    pass


class SineSpaceDimensionError(HypothesisError):
    def __init__(self, message: str, dimension: int | None = None, spectrum=None):
        super().__init__(message)
        self.dimension = dimension
        self.spectrum = spectrum


class DimensionAmbiguousError(SineSpaceDimensionError):
    pass


class NotASineError(HypothesisError):
    pass


class IndeterminateDegreeError(HypermomentError):
    pass


class ConditioningError(HypermomentError):
    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


class DivergenceError(HypermomentError):
    def __init__(self, message: str, last_good_x: float):
        super().__init__(message)
        self.last_good_x = last_good_x
