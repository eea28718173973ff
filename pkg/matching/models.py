# matching/models.py

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class SimilarityReport:
    """
    Similarities of one request to ontology classes and attributes.

    Scores are in (0, 1]; elements with score 0 are never listed.
    """

    request_id: str
    class_scores: tuple[tuple[str, float], ...] = ()
    attribute_scores: tuple[tuple[str, float], ...] = ()

    @property
    def is_empty(self) -> bool:
        return not self.class_scores and not self.attribute_scores

    def to_dict(self) -> dict[str, Any]:
        return {
            "request_id": self.request_id,
            "classes": [[cid, score] for cid, score in self.class_scores],
            "attributes": [[aid, score] for aid, score in self.attribute_scores],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimilarityReport":
        return cls(
            request_id=str(data["request_id"]),
            class_scores=tuple((str(cid), float(s)) for cid, s in data.get("classes", [])),
            attribute_scores=tuple((str(aid), float(s)) for aid, s in data.get("attributes", [])),
        )


@dataclass(frozen=True)
class Entry:
    """A contiguous fragment of an attribute name found in a request."""

    text: str
    position: int
    words: tuple[str, ...] = field(default=())
    score: float = 0.0
