"""Exception types shared across the engine."""


class ModelProbeError(Exception):
    """Base class for all engine errors."""


class IngestError(ModelProbeError):
    """Raised when a dataset source cannot be parsed."""


class UnknownFeatureError(ModelProbeError):
    """Raised when an operation references a feature that does not exist."""


class UnknownPointError(ModelProbeError):
    """Raised when an operation references a datapoint id that does not exist."""


class TypeMismatchError(ModelProbeError):
    """Raised when an edited value is incompatible with the feature kind."""


class ModelSpecError(ModelProbeError):
    """Raised when a builtin model document fails validation."""


class RemoteModelError(ModelProbeError):
    """Raised when a remote inference endpoint fails.

    ``status`` carries the HTTP status code when one was received; calls that
    failed before a response (connection refused, timeout) leave it at None.
    ``retriable`` distinguishes transient transport failures from protocol
    violations in an otherwise successful response.
    """

    def __init__(self, message: str, status: int | None = None, retriable: bool = False):
        super().__init__(message)
        self.status = status
        self.retriable = retriable


class AnalysisError(ModelProbeError):
    """Raised when an analysis request is invalid (bad slice, wrong task kind, ...)."""


class UnknownDatasetError(ModelProbeError):
    """Raised when a request references a dataset id that does not exist."""
