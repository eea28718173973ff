# graphs/exceptions.py


class GraphError(Exception):
    """Base exception for user-ontology graph construction."""


class InvalidGraphParamsError(GraphError, ValueError):
    """Raised when arc weight parameters violate their bounds."""

    def __init__(self, constraint: str, **values: float):
        self.constraint = constraint
        self.values = values
        shown = ", ".join(f"{k}={v}" for k, v in values.items())
        super().__init__(f"Constraint violated: {constraint} ({shown})" if shown else constraint)


class WeightDomainError(GraphError, ValueError):
    """Raised when arc weights are aggregated from out-of-range inputs."""


class InconsistentReportError(GraphError, ValueError):
    """Raised when profiles reference ids unknown to the ontology."""

    def __init__(self, message: str, ids: list[str] | None = None):
        self.ids = sorted(set(ids or []))
        super().__init__(f"{message}: {', '.join(self.ids)}" if self.ids else message)


class ArtifactFormatError(GraphError, ValueError):
    """Raised when a graph or distance artifact cannot be read back."""
