"""Exception hierarchy.

Every concrete error is also a `ValueError`, so code catching `ValueError`
keeps working.
"""


class LexclassError(Exception):
    """Base class of every error raised on purpose by the package."""


class ConfigError(LexclassError, ValueError):
    """Invalid configuration value or missing configuration asset."""


class CorpusError(LexclassError, ValueError):
    """Malformed corpus record or corpus-level invariant violation."""


class FeatureError(LexclassError, ValueError):
    pass


class StrategyError(LexclassError, ValueError):
    pass


class ModelError(LexclassError, ValueError):
    pass


class MetricError(LexclassError, ValueError):
    pass


class ExplainError(LexclassError, ValueError):
    pass


class DocumentError(LexclassError):
    """Wraps an error raised while processing a single document."""

    def __init__(self, doc_id, error):
        self.doc_id = doc_id
        self.error = error
        super().__init__(f"document '{doc_id}': {error}")
