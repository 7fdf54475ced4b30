"""Exception hierarchy shared across the package."""


class RagBenchError(Exception):
    """Base class for all package errors."""


# --- document store ---

class UnsupportedFormat(RagBenchError):
    pass


class ExtractionFailed(RagBenchError):
    pass


class EmptyDocument(RagBenchError):
    pass


class InvalidConfig(RagBenchError):
    pass


# --- embedding / index ---

class EmptyText(RagBenchError):
    pass


class RemoteEmbedderUnavailable(RagBenchError):
    pass


class DimensionMismatch(RagBenchError):
    pass


class DuplicateId(RagBenchError):
    pass


class IoFailure(RagBenchError):
    pass


class CorruptIndex(RagBenchError):
    pass


# --- chat / backends ---

class TemplateInvalid(RagBenchError):
    pass


class UnknownModel(RagBenchError):
    pass


class BackendTimeout(RagBenchError):
    pass


class BackendError(RagBenchError):
    pass


class EmptyQuestion(RagBenchError):
    pass


# --- metrics ---

class EmptyReference(RagBenchError):
    pass


class EmptyList(RagBenchError):
    pass


# --- benchmark harness ---

class ParseError(RagBenchError):
    pass


class StrictShapeViolation(RagBenchError):
    pass


class DuplicateItemId(RagBenchError):
    pass


class DatasetEmpty(RagBenchError):
    pass


class UnknownRecord(RagBenchError):
    pass


class OutOfRange(RagBenchError):
    pass


class NoRecords(RagBenchError):
    pass
