# ontology/loader.py

import hashlib
import json
import logging
from pathlib import Path
from typing import Any

from .exceptions import DanglingReferenceError, MalformedDocumentError, TaxonomyCycleError
from .models import Ontology, OntologyAttribute, OntologyClass

logger = logging.getLogger(__name__)


def _identifier(value: Any, field: str) -> str:
    # JSON documents in the wild use both numeric and string ids
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise MalformedDocumentError("Identifier must be a string or integer", field=field)
    text = str(value).strip()
    if not text:
        raise MalformedDocumentError("Identifier must not be empty", field=field)
    return text


def _name(value: Any, field: str) -> str:
    if not isinstance(value, str) or not value.split():
        raise MalformedDocumentError("Name must be a non-empty string", field=field)
    return value


def _parse_classes(raw_classes: Any) -> tuple[list[OntologyClass], list[OntologyAttribute]]:
    if not isinstance(raw_classes, list):
        raise MalformedDocumentError("'classes' must be an array", field="classes")

    classes: list[OntologyClass] = []
    attributes: list[OntologyAttribute] = []
    seen_classes: set[str] = set()
    seen_attributes: set[str] = set()

    for index, raw in enumerate(raw_classes):
        prefix = f"classes[{index}]"
        if not isinstance(raw, dict):
            raise MalformedDocumentError("Class entry must be an object", field=prefix)

        class_id = _identifier(raw.get("id"), f"{prefix}.id")
        if class_id in seen_classes:
            raise MalformedDocumentError(f"Duplicate class id '{class_id}'", field=f"{prefix}.id")
        seen_classes.add(class_id)

        name = _name(raw.get("name"), f"{prefix}.name")
        parent = raw.get("parent")
        parent_id = None if parent is None else _identifier(parent, f"{prefix}.parent")

        raw_attributes = raw.get("attributes", [])
        if not isinstance(raw_attributes, list):
            raise MalformedDocumentError("'attributes' must be an array", field=f"{prefix}.attributes")

        attribute_ids = []
        for attr_index, raw_attr in enumerate(raw_attributes):
            attr_prefix = f"{prefix}.attributes[{attr_index}]"
            if not isinstance(raw_attr, dict):
                raise MalformedDocumentError("Attribute entry must be an object", field=attr_prefix)
            attr_id = _identifier(raw_attr.get("id"), f"{attr_prefix}.id")
            if attr_id in seen_attributes:
                raise MalformedDocumentError(
                    f"Duplicate attribute id '{attr_id}'", field=f"{attr_prefix}.id"
                )
            seen_attributes.add(attr_id)
            unit = raw_attr.get("unit")
            if unit is not None and not isinstance(unit, str):
                raise MalformedDocumentError("Unit must be a string", field=f"{attr_prefix}.unit")
            attributes.append(
                OntologyAttribute(
                    id=attr_id,
                    name=_name(raw_attr.get("name"), f"{attr_prefix}.name"),
                    owner_class=class_id,
                    unit=unit,
                )
            )
            attribute_ids.append(attr_id)

        classes.append(
            OntologyClass(
                id=class_id, name=name, parent=parent_id, attribute_ids=tuple(attribute_ids)
            )
        )

    return classes, attributes


def _check_forest(classes: list[OntologyClass]) -> None:
    parents = {c.id: c.parent for c in classes}
    done: set[str] = set()

    for start in parents:
        path: list[str] = []
        on_path: set[str] = set()
        node: str | None = start
        while node is not None and node not in done:
            if node in on_path:
                raise TaxonomyCycleError(node)
            on_path.add(node)
            path.append(node)
            node = parents.get(node)
        done.update(path)


def validate_ontology(ontology: Ontology) -> Ontology:
    """Check references and the parent forest. Returns the ontology unchanged."""
    class_ids = set(ontology.classes_by_id)

    dangling = [c.parent for c in ontology.classes if c.parent and c.parent not in class_ids]
    dangling += [a.owner_class for a in ontology.attributes if a.owner_class not in class_ids]
    dangling += [
        target
        for target in ontology.synonyms.values()
        if target not in class_ids and target not in ontology.attributes_by_id
    ]
    if dangling:
        raise DanglingReferenceError("Unresolved references", ids=sorted(set(dangling)))

    _check_forest(list(ontology.classes))
    return ontology


def load_ontology(document: str) -> Ontology:
    """
    Parse and validate an ontology JSON document.

    Raises MalformedDocumentError, DanglingReferenceError or TaxonomyCycleError.
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocumentError(f"Invalid JSON: {exc.msg}", line=exc.lineno) from exc

    if not isinstance(data, dict):
        raise MalformedDocumentError("Top level must be an object", line=1)

    classes, attributes = _parse_classes(data.get("classes", []))

    raw_synonyms = data.get("synonyms", {})
    if not isinstance(raw_synonyms, dict):
        raise MalformedDocumentError("'synonyms' must be an object", field="synonyms")
    synonyms = {
        str(term): _identifier(target, f"synonyms.{term}") for term, target in raw_synonyms.items()
    }

    ontology = validate_ontology(
        Ontology(classes=tuple(classes), attributes=tuple(attributes), synonyms=synonyms)
    )
    logger.info(
        f"Loaded ontology: {len(ontology.classes)} classes, "
        f"{len(ontology.attributes)} attributes, {len(ontology.synonyms)} synonyms"
    )
    return ontology


def load_ontology_file(path: str | Path) -> Ontology:
    """Read an ontology document from disk. FileNotFoundError propagates."""
    text = Path(path).read_text(encoding="utf-8")
    return load_ontology(text)


def dump_ontology(ontology: Ontology) -> str:
    """Serialize back to the document format; load_ontology(dump_ontology(o)) == o."""
    attributes = ontology.attributes_by_id
    classes = []
    for cls in ontology.classes:
        entry: dict[str, Any] = {"id": cls.id, "name": cls.name}
        if cls.parent is not None:
            entry["parent"] = cls.parent
        entry["attributes"] = []
        for attr_id in cls.attribute_ids:
            attr = attributes[attr_id]
            attr_entry = {"id": attr.id, "name": attr.name}
            if attr.unit is not None:
                attr_entry["unit"] = attr.unit
            entry["attributes"].append(attr_entry)
        classes.append(entry)

    document = {"classes": classes, "synonyms": dict(ontology.synonyms)}
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def ontology_digest(ontology: Ontology) -> str:
    """Content digest used as the ontology version for cached reports."""
    return hashlib.sha256(dump_ontology(ontology).encode("utf-8")).hexdigest()
