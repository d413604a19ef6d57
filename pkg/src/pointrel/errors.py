"""Exception types shared across the package."""


class PointrelError(Exception):
    """Base class for all package errors."""


class ImproperInterval(PointrelError):
    """An event interval has start >= end."""


class ParseError(PointrelError):
    """Malformed expression or schema text."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(message + loc)


class DuplicateRelationName(PointrelError):
    """Two relations in one schema share a name."""


class EmptySchema(PointrelError):
    """A schema defines no relations."""


class ValidationError(PointrelError):
    """Schema failed exclusivity/exhaustiveness validation."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"schema validation failed: {report.summary()}")


class UnknownRelation(PointrelError):
    """A relation name is not part of the schema or mapping at hand."""


class DuplicateId(PointrelError):
    """Two records in one file share an id."""


class SplitViolation(PointrelError):
    """An operation restricted to the train split saw dev/test records."""


class DimensionMismatch(PointrelError):
    """Feature vector dimensionality disagrees with the model."""


class LengthMismatch(PointrelError):
    """Paired label sequences have different lengths."""


class EmptyDataset(PointrelError):
    """Training requires at least one example."""


class CheckpointError(PointrelError):
    """Checkpoint file is unreadable or has an unsupported version."""


class MissingPlaceholder(PointrelError):
    """A prompt template placeholder could not be resolved."""


class TransportError(PointrelError):
    """A chat-completion request failed; carries any partial trace."""

    def __init__(self, message, trace=None):
        self.trace = trace or []
        super().__init__(message)


class DomainError(PointrelError):
    """A numeric argument is outside its documented domain."""
