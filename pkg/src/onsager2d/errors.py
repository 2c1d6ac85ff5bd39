"""Exception hierarchy.

Validation problems (bad input, violated construction rules) derive from
:class:`ValidationError`; failures that only show up while computing
(NaN, CFL) derive from :class:`NumericalError`. The CLI maps them to exit
codes 2 and 3.
"""

import warnings


class ValidationError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


class ResolutionError(ValidationError):
    """Grid too coarse to represent a band-limited field."""


class AliasingError(ValidationError):
    """Grid too coarse to resolve a quadratic product exactly."""


class AliasingWarning(UserWarning):
    pass


class ConjugateSymmetryError(ValidationError):
    pass


class DivergenceError(ValidationError):
    """Field expected to be divergence-free is not."""


class NonzeroMeanError(ValidationError):
    pass


class GapRuleError(ValidationError):
    pass


class BlockOverlapError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class CFLViolation(NumericalError):
    pass


class NaNDetected(NumericalError):
    pass


def warn_aliasing(msg):
    warnings.warn(msg, AliasingWarning, stacklevel=3)
