# ontology/exceptions.py


class OntologyError(Exception):
    """Base exception for ontology loading and validation."""


class MalformedDocumentError(OntologyError, ValueError):
    """Raised when the ontology document cannot be parsed or breaks the schema."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class DanglingReferenceError(OntologyError, ValueError):
    """Raised when a parent, owner or synonym target does not resolve."""

    def __init__(self, message: str, ids: list[str] | None = None):
        self.ids = sorted(ids or [])
        super().__init__(f"{message}: {', '.join(self.ids)}" if self.ids else message)


class TaxonomyCycleError(OntologyError, ValueError):
    """Raised when parent links do not form a forest."""

    def __init__(self, class_id: str):
        self.class_id = class_id
        super().__init__(f"Parent links form a cycle through class '{class_id}'")
