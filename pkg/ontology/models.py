# ontology/models.py
"""
In-memory ontology: classes, their attributes and the synonym table.

Instances are immutable after loading, so one Ontology can be shared by
any number of matching workers.
"""

from dataclasses import dataclass, field
from enum import StrEnum
from functools import cached_property


class ArcKind(StrEnum):
    CC = "CC"  # child class -> parent class (is-a)
    CA = "CA"  # attribute -> owner class (has-attribute)


@dataclass(frozen=True)
class OntologyClass:
    id: str
    name: str
    parent: str | None = None
    attribute_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class OntologyAttribute:
    id: str
    name: str
    owner_class: str
    unit: str | None = None

    @property
    def words(self) -> list[str]:
        return self.name.split()


@dataclass(frozen=True)
class TaxonomyArc:
    source: str
    target: str
    kind: ArcKind


@dataclass(frozen=True)
class Ontology:
    classes: tuple[OntologyClass, ...] = ()
    attributes: tuple[OntologyAttribute, ...] = ()
    synonyms: dict[str, str] = field(default_factory=dict)

    @cached_property
    def classes_by_id(self) -> dict[str, OntologyClass]:
        return {c.id: c for c in self.classes}

    @cached_property
    def attributes_by_id(self) -> dict[str, OntologyAttribute]:
        return {a.id: a for a in self.attributes}

    def element_name(self, element_id: str) -> str | None:
        """Name of the class or attribute with this id, if any."""
        if element_id in self.classes_by_id:
            return self.classes_by_id[element_id].name
        if element_id in self.attributes_by_id:
            return self.attributes_by_id[element_id].name
        return None

    @cached_property
    def synonym_targets(self) -> dict[str, str]:
        return {" ".join(term.lower().split()): target for term, target in self.synonyms.items()}

    @cached_property
    def synonym_phrases(self) -> frozenset[str]:
        """Synonym keys of two or more words, matched as phrases in requests."""
        return frozenset(term for term in self.synonym_targets if " " in term)

    @cached_property
    def vocabulary(self) -> frozenset[str]:
        return frozenset(vocabulary(self))

    @cached_property
    def arcs(self) -> list[TaxonomyArc]:
        return taxonomy_arcs(self)


def vocabulary(ontology: Ontology) -> set[str]:
    """
    All whitespace-separated words of class names, attribute names and
    synonym keys, lower-cased. Feeds spelling correction.
    """
    terms: set[str] = set()
    for cls in ontology.classes:
        terms.update(cls.name.lower().split())
    for attr in ontology.attributes:
        terms.update(attr.name.lower().split())
    for synonym in ontology.synonyms:
        terms.update(synonym.lower().split())
    return terms


def taxonomy_arcs(ontology: Ontology) -> list[TaxonomyArc]:
    """One CC arc per (child, parent) and one CA arc per (attribute, owner)."""
    arcs = [
        TaxonomyArc(source=cls.id, target=cls.parent, kind=ArcKind.CC)
        for cls in ontology.classes
        if cls.parent is not None
    ]
    arcs.extend(
        TaxonomyArc(source=attr.id, target=attr.owner_class, kind=ArcKind.CA)
        for attr in ontology.attributes
    )
    return arcs
