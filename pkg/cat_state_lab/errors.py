"""Exceptions raised by the simulation library."""


class CatLabError(Exception):
    """Base class for numerical failures; ``code`` is the name reported by the CLI."""

    code = "cat-lab-error"


class TruncationError(CatLabError, ValueError):
    """The chosen Fock dimension leaves more than the allowed tail probability."""

    code = "truncation-insufficient"


class DimensionMismatchError(CatLabError, ValueError):
    code = "dimension-mismatch"


class ModeMismatchError(DimensionMismatchError):
    code = "mode-mismatch"


class ZeroProbabilityError(CatLabError, ArithmeticError):
    """A conditioning event has (numerically) zero probability."""

    code = "zero-probability-event"


class InvalidDistributionError(CatLabError, ValueError):
    code = "invalid-distribution"


class StepSizeError(CatLabError, RuntimeError):
    """The master-equation integrator could not reach the requested time."""

    code = "step-size-failure"


class MissingFieldError(CatLabError, ValueError):
    code = "missing-field"


class CutoffError(CatLabError, ValueError):
    """A detector-count sum was truncated too early."""

    code = "cutoff-insufficient"


class TermCountOverflowError(CatLabError, RuntimeError):
    code = "term-count-overflow"


class NoFeasiblePointError(CatLabError, RuntimeError):
    code = "no-feasible-point"


class HermiteOverflowError(CatLabError, OverflowError):
    code = "hermite-overflow"
