# ontology/tests.py
import json
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from .exceptions import DanglingReferenceError, MalformedDocumentError, TaxonomyCycleError
from .loader import dump_ontology, load_ontology, load_ontology_file, ontology_digest
from .models import ArcKind, Ontology, OntologyAttribute, OntologyClass, taxonomy_arcs, vocabulary

EXAMPLE = Path(settings.BASE_DIR) / "docs" / "examples" / "handling_ontology.json"


def document(classes, synonyms=None) -> str:
    return json.dumps({"classes": classes, "synonyms": synonyms or {}})


class LoadOntologyTests(SimpleTestCase):
    """Parsing and validation of ontology documents"""

    def test_parent_and_child(self):
        """Two classes with a parent link give one CC arc"""
        ontology = load_ontology(
            document(
                [
                    {"id": 1, "name": "Projects", "attributes": []},
                    {"id": 2, "name": "Pick & place", "parent": 1, "attributes": []},
                ]
            )
        )
        self.assertEqual(len(ontology.classes), 2)
        self.assertEqual(ontology.classes_by_id["2"].parent, "1")
        self.assertEqual(len(ontology.arcs), 1)
        self.assertEqual(ontology.arcs[0].kind, ArcKind.CC)
        self.assertEqual((ontology.arcs[0].source, ontology.arcs[0].target), ("2", "1"))

    def test_empty_classes(self):
        """An empty class list is a valid empty ontology"""
        ontology = load_ontology(document([]))
        self.assertEqual(ontology.classes, ())
        self.assertEqual(ontology.attributes, ())
        self.assertEqual(vocabulary(ontology), set())

    def test_self_parent_is_cycle(self):
        """A class that is its own parent is a cycle"""
        with self.assertRaises(TaxonomyCycleError) as ctx:
            load_ontology(document([{"id": "c", "name": "Loop", "parent": "c"}]))
        self.assertEqual(ctx.exception.class_id, "c")

    def test_longer_cycle_names_a_member(self):
        """Cycle errors name a class on the cycle"""
        with self.assertRaises(TaxonomyCycleError) as ctx:
            load_ontology(
                document(
                    [
                        {"id": "a", "name": "A", "parent": "c"},
                        {"id": "b", "name": "B", "parent": "a"},
                        {"id": "c", "name": "C", "parent": "b"},
                        {"id": "d", "name": "D"},
                    ]
                )
            )
        self.assertIn(ctx.exception.class_id, {"a", "b", "c"})

    def test_dangling_references_listed(self):
        """Unknown parents and synonym targets are reported together"""
        with self.assertRaises(DanglingReferenceError) as ctx:
            load_ontology(
                document(
                    [{"id": "a", "name": "A", "parent": "missing"}],
                    synonyms={"alias": "nowhere"},
                )
            )
        self.assertEqual(ctx.exception.ids, ["missing", "nowhere"])

    def test_invalid_json_reports_line(self):
        """Syntax errors carry the line number"""
        with self.assertRaises(MalformedDocumentError) as ctx:
            load_ontology('{\n  "classes": [\n    {"id": 1,,}\n  ]\n}')
        self.assertEqual(ctx.exception.line, 3)

    def test_missing_name_reports_field(self):
        """Schema errors carry the field path"""
        with self.assertRaises(MalformedDocumentError) as ctx:
            load_ontology(document([{"id": "a"}]))
        self.assertEqual(ctx.exception.field, "classes[0].name")

    def test_duplicate_ids_rejected(self):
        """Class ids are unique"""
        with self.assertRaises(MalformedDocumentError):
            load_ontology(document([{"id": "a", "name": "A"}, {"id": "a", "name": "B"}]))

    def test_example_document(self):
        """The shipped example loads with 10 classes and 3 attributes"""
        ontology = load_ontology_file(EXAMPLE)
        self.assertEqual(len(ontology.classes), 10)
        self.assertEqual(len(ontology.attributes), 3)
        self.assertEqual(ontology.attributes_by_id["a2"].owner_class, "7")
        self.assertEqual(ontology.synonyms["payload"], "a1")

    def test_missing_file(self):
        with self.assertRaises(FileNotFoundError):
            load_ontology_file(EXAMPLE.with_name("nope.json"))


class VocabularyTests(SimpleTestCase):
    """Vocabulary feeding spelling correction"""

    def test_class_name_words(self):
        ontology = Ontology(classes=(OntologyClass("1", "Pick & place"),))
        self.assertEqual(vocabulary(ontology), {"pick", "&", "place"})

    def test_class_and_attribute(self):
        ontology = Ontology(
            classes=(OntologyClass("1", "Projects", attribute_ids=("a",)),),
            attributes=(OntologyAttribute("a", "Stroke X", "1"),),
        )
        self.assertEqual(vocabulary(ontology), {"projects", "stroke", "x"})

    def test_synonym_keys_included(self):
        ontology = Ontology(
            classes=(OntologyClass("1", "Drives"),), synonyms={"Actuator": "1"}
        )
        self.assertIn("actuator", vocabulary(ontology))

    def test_lowercasing_idempotent(self):
        ontology = load_ontology_file(EXAMPLE)
        terms = vocabulary(ontology)
        self.assertEqual({t.lower() for t in terms}, terms)


class TaxonomyArcTests(SimpleTestCase):
    """CC and CA arcs of the taxonomy"""

    def test_three_attributes_give_three_ca_arcs(self):
        ontology = Ontology(
            classes=(OntologyClass("1", "Linear axis", attribute_ids=("x", "y", "z")),),
            attributes=(
                OntologyAttribute("x", "Stroke X", "1"),
                OntologyAttribute("y", "Stroke Y", "1"),
                OntologyAttribute("z", "Stroke Z", "1"),
            ),
        )
        arcs = taxonomy_arcs(ontology)
        self.assertEqual(len(arcs), 3)
        self.assertTrue(all(a.kind == ArcKind.CA and a.target == "1" for a in arcs))

    def test_arc_count(self):
        """Arcs = classes with a parent + attributes"""
        ontology = load_ontology_file(EXAMPLE)
        with_parent = sum(1 for c in ontology.classes if c.parent)
        self.assertEqual(len(taxonomy_arcs(ontology)), with_parent + len(ontology.attributes))


class SerializationTests(SimpleTestCase):
    """dump_ontology / ontology_digest"""

    def test_example_round_trips_byte_identical(self):
        text = EXAMPLE.read_text(encoding="utf-8")
        self.assertEqual(dump_ontology(load_ontology(text)), text)

    def test_load_dump_is_identity(self):
        ontology = load_ontology_file(EXAMPLE)
        again = load_ontology(dump_ontology(ontology))
        self.assertEqual(again.classes, ontology.classes)
        self.assertEqual(again.attributes, ontology.attributes)
        self.assertEqual(again.synonyms, ontology.synonyms)

    def test_digest_tracks_content(self):
        ontology = load_ontology_file(EXAMPLE)
        self.assertEqual(ontology_digest(ontology), ontology_digest(load_ontology_file(EXAMPLE)))
        changed = load_ontology(
            dump_ontology(ontology).replace('"Palletizing"', '"Palletising"')
        )
        self.assertNotEqual(ontology_digest(ontology), ontology_digest(changed))
