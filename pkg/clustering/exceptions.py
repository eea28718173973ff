# clustering/exceptions.py


class ClusteringError(Exception):
    """Base exception for clustering and sweep runs."""


class InvalidThresholdError(ClusteringError, ValueError):
    """Raised when D_max is not a positive number."""

    def __init__(self, d_max: float):
        self.d_max = d_max
        super().__init__(f"Constraint violated: d_max > 0 (d_max={d_max})")


class InvalidSweepGridError(ClusteringError, ValueError):
    """Raised when a sweep grid is empty, unsorted or out of range."""


class ReplayMismatchError(ClusteringError):
    """Raised when a merge log does not reproduce its partition."""
