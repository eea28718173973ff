# matching/exceptions.py


class MatchingError(Exception):
    """Base exception for request/ontology matching."""


class SimilarityDomainError(MatchingError, ValueError):
    """Raised when a similarity is requested for an empty string."""


class ReportFormatError(MatchingError, ValueError):
    """Raised when an XML similarity report cannot be read back."""
