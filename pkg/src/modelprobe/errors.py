"""Exception hierarchy shared across the engine.

Every error that crosses a module boundary derives from ModelProbeError so the
CLI and service can map failures onto their exit-code / HTTP contracts in one
place.
"""

from __future__ import annotations


class ModelProbeError(Exception):
    """Base class for all engine errors."""


class SpecError(ModelProbeError):
    """A model-spec or dataset document failed to parse or validate.

    ``locus`` points at the offending field (e.g. ``model.weights[2]``) or
    carries a ``line N column M`` position for raw parse failures.
    """

    def __init__(self, message: str, locus: str | None = None):
        super().__init__(message)
        self.locus = locus

    def __str__(self) -> str:
        base = super().__str__()
        return f"{base} (at {self.locus})" if self.locus else base


class SchemaViolation(ModelProbeError):
    """A data point does not conform to its schema."""

    def __init__(self, message: str, feature: str | None = None):
        super().__init__(message)
        self.feature = feature


class UnsupportedMethod(ModelProbeError):
    """The requested method does not apply to this model class."""


class ExactLimitExceeded(ModelProbeError):
    """Exact subset enumeration was requested above the dimension limit."""


class ProtocolError(ModelProbeError):
    """An external-model subprocess broke the line protocol.

    ``payload`` carries the raw offending response (or a description of the
    failure) verbatim for diagnosis.
    """

    def __init__(self, message: str, payload: str | None = None):
        super().__init__(message)
        self.payload = payload


class ConfigError(ModelProbeError):
    """A search / attribution / fidelity configuration is invalid."""


class DegenerateRegion(ModelProbeError):
    """A sampling region has zero volume."""
