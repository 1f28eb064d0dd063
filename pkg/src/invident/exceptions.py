"""Exception hierarchy.

The CLI maps each family onto an exit code, so new errors should subclass
the nearest family rather than :class:`InvidentError` directly.
"""


class InvidentError(Exception):
    """Base class for all package errors."""


class ParameterError(InvidentError, ValueError):
    """An argument or configuration value violates its contract."""


class ConfigurationError(ParameterError):
    pass


class DomainError(InvidentError):
    """A well-formed request that the problem domain cannot satisfy."""


class FixtureLookupError(DomainError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ClassificationError(DomainError, ValueError):
    """Operating point outside the region scheme."""

    def __init__(self, message, nearest=None):
        super().__init__(message)
        self.nearest = nearest


class DataError(InvidentError):
    """Problems with an ingested dataset."""


class IngestionError(DataError, ValueError):
    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class PipelineError(DataError):
    pass


class EstimationError(InvidentError):
    """Model fitting failed."""


class MetricUndefinedError(EstimationError, ValueError):
    pass


class DegreesOfFreedomError(EstimationError, ValueError):
    pass


class SweepError(EstimationError):
    def __init__(self, message, causes=None):
        super().__init__(message)
        self.causes = dict(causes or {})


class ModelError(InvidentError):
    """A model cannot answer the request (coverage, emptiness, format)."""


class CoverageError(ModelError):
    def __init__(self, message, hole=None):
        super().__init__(message)
        self.hole = hole


class EmptyModelError(ModelError):
    pass
