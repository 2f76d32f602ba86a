"""Custom exceptions for deepnorm-lab."""


class DeepNormLabError(Exception):
    """Base exception for this package."""


class MissingDependencyError(DeepNormLabError):
    """Raised when an optional dependency is required but not installed."""


class DimensionError(DeepNormLabError, ValueError):
    """Raised when tensor shapes or list lengths do not agree."""


class LayerIndexError(DeepNormLabError, IndexError):
    """Raised when a layer index falls outside ``1..N``."""


class InputError(DeepNormLabError, ValueError):
    """Raised for invalid data inputs (token ids, empty traces)."""


class OracleError(DeepNormLabError):
    """Raised when the finite-difference oracle sees a non-finite evaluation."""


class FitError(DeepNormLabError):
    """Raised when a scaling-law fit is under-determined."""


class AssumptionError(DeepNormLabError, ValueError):
    """Raised when a scalar model violates ``0 < v, w <= 1`` or ``alpha >= 1``."""


class SweepError(DeepNormLabError):
    """Raised when one or more sweep runs fail with an exception."""

    def __init__(self, errors: dict[str, Exception]) -> None:
        self.errors = errors
        names = ", ".join(errors.keys())
        super().__init__(f"Sweep runs failed: {names}")
