# textproc/tests.py
import random
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase

from ontology.loader import load_ontology_file
from ontology.models import Ontology, OntologyClass
from textproc import get_text_pipeline, read_lexicon

from .pipeline import TextPipeline, TokenKind, correct_spelling, preprocess, stem, tokenize

EXAMPLE = Path(settings.BASE_DIR) / "docs" / "examples" / "handling_ontology.json"
STROKE_REQUEST = "Pay load 5 kg, Stroke X 100 mm, Stroke Y 200 mm"


class TokenizeTests(SimpleTestCase):
    """Tokenizer kinds and offsets"""

    def test_pay_load(self):
        tokens = tokenize("Pay load 5 kg")
        self.assertEqual([t.normalized for t in tokens], ["pay", "load", "5", "kg"])
        self.assertEqual(
            [t.kind for t in tokens],
            [TokenKind.WORD, TokenKind.WORD, TokenKind.NUMBER, TokenKind.UNIT],
        )

    def test_empty(self):
        self.assertEqual(tokenize(""), [])

    def test_punctuation_kept(self):
        tokens = tokenize("Stroke = 5")
        self.assertEqual([t.surface for t in tokens], ["Stroke", "=", "5"])
        self.assertEqual(
            [t.kind for t in tokens],
            [TokenKind.WORD, TokenKind.PUNCTUATION, TokenKind.NUMBER],
        )

    def test_decimal_number(self):
        tokens = tokenize("Stroke 12.5 mm")
        self.assertEqual(tokens[1].surface, "12.5")
        self.assertEqual(tokens[1].kind, TokenKind.NUMBER)

    def test_stopwords(self):
        tokens = tokenize("I need the motor")
        self.assertEqual(
            [t.kind for t in tokens],
            [TokenKind.STOPWORD, TokenKind.STOPWORD, TokenKind.STOPWORD, TokenKind.WORD],
        )

    def test_offsets_reconstruct_text(self):
        """Surfaces sit at their offsets; offsets increase without overlap"""
        rng = random.Random(7)
        pieces = ["Stroke", "X", "100", "mm", ",", "&", "pay", "load", ">", "0.5", "kg"]
        for _ in range(200):
            text = "".join(rng.choice(pieces) + rng.choice([" ", "", "  "]) for _ in range(8))
            tokens = tokenize(text)
            end = 0
            for token in tokens:
                self.assertGreaterEqual(token.position, end)
                self.assertEqual(text[token.position : token.position + len(token.surface)], token.surface)
                self.assertTrue(text[end : token.position].isspace() or end == token.position)
                end = token.position + len(token.surface)
            self.assertTrue(text[end:] == "" or text[end:].isspace())


class SpellingTests(SimpleTestCase):
    """Edit-distance correction against the ontology vocabulary"""

    def test_known_word_unchanged(self):
        self.assertEqual(correct_spelling("stroke", {"stroke"}), ("stroke", False))

    def test_close_word_corrected(self):
        self.assertEqual(correct_spelling("strke", {"stroke", "motor"}, max_distance=2), ("stroke", True))

    def test_far_word_unchanged(self):
        self.assertEqual(correct_spelling("zzzzz", {"stroke", "motor"}, max_distance=2), ("zzzzz", False))

    def test_ties_break_lexicographically(self):
        self.assertEqual(correct_spelling("bbbb", {"bbbc", "bbba"}), ("bbba", True))

    def test_short_words_left_alone(self):
        self.assertEqual(correct_spelling("z", {"x", "y"}), ("z", False))


class StemTests(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(stem("loading"), "load")
        self.assertEqual(stem("kg"), "kg")
        self.assertEqual(stem("strokes"), "stroke")

    def test_idempotent(self):
        for word in ["grippers", "palletizing", "generalizations", "components", "motoring"]:
            self.assertEqual(stem(stem(word)), stem(word))

    def test_other_languages(self):
        self.assertEqual(stem(stem("Greifern", "de"), "de"), stem("Greifern", "de"))
        self.assertEqual(stem(stem("двигатели", "ru"), "ru"), stem("двигатели", "ru"))

    def test_unsupported_language(self):
        with self.assertRaises(ImproperlyConfigured):
            stem("word", "xx")


class PreprocessTests(SimpleTestCase):
    """Full pipeline against the example ontology"""

    def setUp(self):
        self.ontology = load_ontology_file(EXAMPLE)

    def test_attribute_request(self):
        req = preprocess(STROKE_REQUEST, self.ontology)
        self.assertEqual(req.match_words, ["pay", "load", "stroke", "x", "stroke", "y"])

    def test_empty(self):
        req = preprocess("", self.ontology)
        self.assertEqual(req.tokens, ())
        self.assertEqual(req.match_words, [])

    def test_ampersand_is_punctuation(self):
        req = preprocess("Pick & place", self.ontology)
        self.assertEqual(req.match_words, ["pick", "place"])
        self.assertEqual(req.tokens[1].kind, TokenKind.PUNCTUATION)

    def test_misspelling_corrected_before_stemming(self):
        req = preprocess("Grippres with strke 5 mm", self.ontology)
        self.assertEqual(req.match_words, ["gripper", "stroke"])

    def test_numbers_and_units_untouched(self):
        req = preprocess("100 kg", self.ontology)
        self.assertEqual([t.normalized for t in req.tokens], ["100", "kg"])
        self.assertEqual(req.match_words, [])

    def test_synonym_canonicalised(self):
        req = preprocess("actuator", self.ontology)
        self.assertEqual(req.match_words, [get_text_pipeline().normalize_name("Drives", self.ontology)])

    def test_deterministic(self):
        self.assertEqual(preprocess(STROKE_REQUEST, self.ontology), preprocess(STROKE_REQUEST, self.ontology))

    def test_multi_word_synonym(self):
        """A phrase synonym becomes one match word spanning its surface"""
        ontology = Ontology(
            classes=(OntologyClass("1", "Suction grippers"),),
            synonyms={"Vacuum  cup": "1"},
        )
        text = "Two vacuum   cup heads"
        req = preprocess(text, ontology)
        phrase = [t for t in req.tokens if t.position == text.index("vacuum")]
        self.assertEqual(len(phrase), 1)
        self.assertEqual(phrase[0].surface, "vacuum   cup")
        self.assertEqual(phrase[0].kind, TokenKind.WORD)
        self.assertEqual(phrase[0].normalized, stem("suction") + " " + stem("grippers"))

    def test_phrase_synonym_needs_adjacent_words(self):
        ontology = Ontology(
            classes=(OntologyClass("1", "Suction grippers"),),
            synonyms={"vacuum cup": "1"},
        )
        req = preprocess("vacuum, cup", ontology)
        self.assertEqual(req.match_words, [stem("vacuum"), stem("cup")])


class PipelineFactoryTests(SimpleTestCase):
    def test_cached_per_language(self):
        self.assertIs(get_text_pipeline("en"), get_text_pipeline("en"))
        self.assertEqual(get_text_pipeline("de").language, "de")

    def test_unsupported_language(self):
        with self.assertRaises(ImproperlyConfigured):
            get_text_pipeline("xx")

    def test_missing_lexicon(self):
        with self.assertRaises(ImproperlyConfigured):
            read_lexicon(Path(settings.TEXT_LEXICON_DIR) / "missing.txt")

    def test_units_lexicon(self):
        units = read_lexicon(Path(settings.TEXT_LEXICON_DIR) / "units.txt")
        self.assertTrue({"kg", "mm", "bar"} <= units)

    def test_fingerprint_tracks_settings(self):
        base = get_text_pipeline("en")
        same = TextPipeline("en", base.stopwords, base.units, base.max_distance, base.min_length)
        looser = TextPipeline("en", base.stopwords, base.units, base.max_distance + 1, base.min_length)
        self.assertEqual(base.fingerprint, same.fingerprint)
        self.assertNotEqual(base.fingerprint, looser.fingerprint)
        self.assertNotEqual(base.fingerprint, get_text_pipeline("de").fingerprint)
