"""Exception types shared across the package."""


class PeerRiskError(Exception):
    """Base class for every error raised by peerrisk."""


class InvalidParams(PeerRiskError):
    """A caller-supplied parameter violates a documented precondition."""


# --- corpus ---------------------------------------------------------------

class DecodeError(PeerRiskError):
    pass


class EmptyDocument(PeerRiskError):
    pass


# --- embeddings / index ---------------------------------------------------

class DimensionMismatch(PeerRiskError):
    pass


class ZeroNorm(PeerRiskError):
    pass


class EmptyInput(PeerRiskError):
    pass


class DuplicateChunk(PeerRiskError):
    pass


class ModelMismatch(PeerRiskError):
    pass


class EmptyStore(PeerRiskError):
    pass


# --- llm gateway ----------------------------------------------------------

class ProviderError(PeerRiskError):
    """HTTP provider failure. Carries the last HTTP status when one was seen."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class CacheMiss(PeerRiskError):
    """Cache-only (replay) mode and the request key is not recorded."""


class BadResponse(PeerRiskError):
    """Provider answered but the content field is missing or empty."""


class UnknownStage(PeerRiskError):
    pass


# --- prompts ----------------------------------------------------------------

class UnknownTemplate(PeerRiskError):
    pass


class MissingBinding(PeerRiskError):
    pass


class UnknownPlaceholder(PeerRiskError):
    pass


class NoPeers(PeerRiskError):
    pass


class TargetInPeers(PeerRiskError):
    pass


# --- pipeline ---------------------------------------------------------------

class NoDocuments(PeerRiskError):
    pass


class EmptyExtraction(PeerRiskError):
    pass


class ParseError(PeerRiskError):
    pass


class PipelineError(PeerRiskError):
    """Failure inside a multi-company run, tagged with the ticker that failed."""

    def __init__(self, message: str, ticker: str | None = None):
        super().__init__(message)
        self.ticker = ticker


# --- metrics ----------------------------------------------------------------

class EmbedderError(PeerRiskError):
    pass


class EmptyReference(PeerRiskError):
    pass


class EmptyList(PeerRiskError):
    pass


# --- config / cli -----------------------------------------------------------

class ConfigError(PeerRiskError):
    pass
