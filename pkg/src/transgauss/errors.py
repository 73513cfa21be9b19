"""Exception types shared across the package.

The CLI maps these onto its exit-code contract, so library code should
raise the most specific type that applies rather than bare ValueError.
"""


class TransgaussError(Exception):
    """Base class for all package errors."""


class DimensionError(TransgaussError, ValueError):
    """Array shape is incompatible with the requested operation."""


class DegenerateBasisError(TransgaussError, ValueError):
    """Gram-Schmidt pivot fell below the degeneracy threshold."""


class IllConditionedFitError(TransgaussError, ValueError):
    """Polynomial fit matrix condition estimate exceeded the guard."""


class ParameterError(TransgaussError, ValueError):
    """A numeric parameter is outside its admissible range."""


class DomainError(TransgaussError, ValueError):
    """A geometric input does not lie in the required domain."""


class ImmersionError(TransgaussError, ValueError):
    """The parametrization failed to be an immersion at a sample point."""


class ConfigError(TransgaussError, ValueError):
    """Bad scenario/CLI configuration (exit code 2)."""


class InconclusiveDegreeError(TransgaussError, RuntimeError):
    """Degree estimate too far from an integer to round (exit code 3)."""


class RetryWithDifferentValueError(TransgaussError, RuntimeError):
    """Preimage search hit a near-critical point; pick another regular value."""


class TheoremContradictionError(TransgaussError, RuntimeError):
    """Rank obstruction satisfied but degree nonzero (exit code 4)."""
