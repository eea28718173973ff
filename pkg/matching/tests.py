# matching/tests.py
import random
import tempfile
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from ontology.loader import load_ontology_file
from ontology.models import OntologyAttribute
from textproc.pipeline import preprocess

from .exceptions import ReportFormatError, SimilarityDomainError
from .models import SimilarityReport
from .services.similarity import (
    RequestMatcher,
    calc_similarity,
    class_similarity,
    find_entries,
    fuzzy_string_similarity,
    match_request,
    proper_substrings,
    request_attribute_similarity,
    request_class_similarity,
)
from .services.xml_report import emit_similarity_xml, parse_similarity_xml

EXAMPLES = Path(settings.BASE_DIR) / "docs" / "examples"
STROKE_REQUEST = "Pay load 5 kg, Stroke X 100 mm, Stroke Y 200 mm"


def oracle_similarity(a: str, b: str) -> float:
    """Nested-loop reference: enumerate substrings, test containment by scanning."""
    a, b = a.lower(), b.lower()
    found, total = set(), set()
    for length in range(1, len(a)):
        for start in range(len(a) - length + 1):
            sub = a[start : start + length]
            total.add(sub)
            for j in range(len(b) - length + 1):
                if b[j : j + length] == sub:
                    found.add(sub)
                    break
    if not total:
        return 1.0 if any(ch == a for ch in b) else 0.0
    return len(found) / len(total)


def attribute(name: str) -> OntologyAttribute:
    return OntologyAttribute(id="a", name=name, owner_class="c")


class ProperSubstringTests(SimpleTestCase):
    def test_motor(self):
        self.assertEqual(
            proper_substrings("motor"),
            {"m", "o", "t", "r", "mo", "ot", "to", "or", "mot", "oto", "tor", "moto", "otor"},
        )

    def test_single_char(self):
        self.assertEqual(proper_substrings("a"), frozenset())

    def test_two_chars(self):
        self.assertEqual(proper_substrings("ab"), {"a", "b"})

    def test_empty_rejected(self):
        with self.assertRaises(SimilarityDomainError):
            proper_substrings("")


class FuzzySimilarityTests(SimpleTestCase):
    """Substring-occurrence similarity"""

    def test_motor_mortar(self):
        """m, o, t, r, mo and or occur in 'mortar': 6 of the 13 substrings"""
        self.assertAlmostEqual(fuzzy_string_similarity("motor", "mortar"), 6 / 13, delta=1e-12)

    def test_identity(self):
        rng = random.Random(1)
        for _ in range(200):
            word = "".join(rng.choice("abcdef") for _ in range(rng.randint(1, 12)))
            self.assertEqual(fuzzy_string_similarity(word, word), 1.0)

    def test_directional(self):
        forward = fuzzy_string_similarity("motor", "mortar")
        backward = fuzzy_string_similarity("mortar", "motor")
        self.assertAlmostEqual(backward, oracle_similarity("mortar", "motor"), delta=1e-12)
        self.assertNotEqual(forward, backward)

    def test_case_insensitive(self):
        self.assertEqual(fuzzy_string_similarity("Motor", "MOTOR"), 1.0)

    def test_empty_rejected(self):
        with self.assertRaises(SimilarityDomainError):
            fuzzy_string_similarity("", "motor")

    def test_matches_oracle(self):
        """10,000 random pairs over {a..e}, lengths 1-12"""
        rng = random.Random(20240301)
        mismatches = 0
        for _ in range(10_000):
            a = "".join(rng.choice("abcde") for _ in range(rng.randint(1, 12)))
            b = "".join(rng.choice("abcde") for _ in range(rng.randint(1, 12)))
            if abs(fuzzy_string_similarity(a, b) - oracle_similarity(a, b)) > 1e-12:
                mismatches += 1
        self.assertEqual(mismatches, 0)


class ClassSimilarityTests(SimpleTestCase):
    def setUp(self):
        self.ontology = load_ontology_file(EXAMPLES / "handling_ontology.json")

    def test_exact_class_name(self):
        req = preprocess("Pick & place", self.ontology)
        cls = self.ontology.classes_by_id["3"]
        self.assertEqual(request_class_similarity(req, cls, self.ontology), 1.0)

    def test_no_words(self):
        req = preprocess("5 kg", self.ontology)
        cls = self.ontology.classes_by_id["3"]
        self.assertEqual(request_class_similarity(req, cls, self.ontology), 0.0)

    def test_fuzzy_score_and_clamp(self):
        expected = oracle_similarity("mortar", "motor")
        self.assertAlmostEqual(class_similarity("mortar", ["motor"], 0.3), expected, delta=1e-12)
        self.assertEqual(class_similarity("mortar", ["motor"], 0.5), 0.0)

    def test_ngram_candidates(self):
        """Two-word class names are compared against word pairs"""
        self.assertEqual(class_similarity("linear axi", ["need", "linear", "axi"], 0.3), 1.0)


class AttributeSimilarityTests(SimpleTestCase):
    """Positional attribute word search and CalcSimilarity"""

    def test_full_attribute_found(self):
        self.assertEqual(request_attribute_similarity(STROKE_REQUEST, attribute("Stroke X")), 1.0)

    def test_entries(self):
        entries = find_entries(STROKE_REQUEST, attribute("Stroke X"))
        self.assertEqual([e.text for e in entries], ["Stroke X", "Stroke"])
        self.assertEqual(entries[0].score, 1.0)
        self.assertAlmostEqual(entries[1].score, 3 / 7, delta=1e-12)
        self.assertEqual(STROKE_REQUEST[entries[1].position :].split(",")[0], "Stroke Y 200 mm")

    def test_partial_entry_score(self):
        self.assertAlmostEqual(calc_similarity(["stroke"], ["stroke", "x"]), 3 / 7, delta=1e-12)

    def test_no_attribute_words(self):
        self.assertEqual(request_attribute_similarity("Vacuum gripper", attribute("Stroke X")), 0.0)

    def test_single_word_attribute(self):
        self.assertEqual(request_attribute_similarity("Stroke X 100 mm", attribute("X")), 1.0)

    def test_whole_words_only(self):
        self.assertEqual(request_attribute_similarity("Xylophone", attribute("X")), 0.0)

    def test_out_of_order_is_partial(self):
        score = request_attribute_similarity("X then stroke", attribute("Stroke X"))
        self.assertAlmostEqual(score, 3 / 7, delta=1e-12)

    def test_matching_word_beats_other_word(self):
        full = request_attribute_similarity("Stroke X 100 mm", attribute("Stroke X"))
        other = request_attribute_similarity("Stroke Y 100 mm", attribute("Stroke X"))
        self.assertGreater(full, other)
        self.assertGreater(other, 0)

    def test_long_attribute_almost_present(self):
        """Thirty-word name with its last word missing from the request"""
        words = [f"w{i:02d}" for i in range(30)]
        score = request_attribute_similarity(" ".join(words[:-1]), attribute(" ".join(words)))
        self.assertAlmostEqual(score, (29 / 30) ** 2, delta=1e-12)

    def test_ordering_properties_randomized(self):
        """Full entry > partial entry > single shortest word; adding words never hurts"""
        rng = random.Random(42)
        vocabulary = ["ab", "cde", "fghi", "jklmn", "opqrst", "uvwxyzq"]
        filler = ["kg", "100", "need", "the", "mm", "5"]
        for _ in range(1000):
            words = rng.sample(vocabulary, rng.randint(2, 5))
            attr = attribute(" ".join(words))
            shortest = min(words, key=len)
            partial = [w for w in words if w != shortest]

            def request(chosen):
                parts = []
                for word in chosen:
                    parts.extend(rng.sample(filler, rng.randint(0, 2)))
                    parts.append(word)
                return " ".join(parts)

            full_score = request_attribute_similarity(request(words), attr)
            partial_score = request_attribute_similarity(request(partial), attr)
            single_score = request_attribute_similarity(request([shortest]), attr)
            self.assertEqual(full_score, 1.0)
            self.assertGreater(full_score, partial_score)
            self.assertGreater(partial_score, single_score)
            self.assertGreater(single_score, 0.0)

            # inserting a missing attribute word at its place never lowers the score
            kept = sorted(rng.sample(range(len(words)), rng.randint(1, len(words) - 1)))
            subset = [words[i] for i in kept]
            missing = [i for i in range(len(words)) if i not in kept]
            add = rng.choice(missing)
            superset = [words[i] for i in sorted([*kept, add])]
            self.assertGreaterEqual(
                request_attribute_similarity(" ".join(superset), attr),
                request_attribute_similarity(" ".join(subset), attr),
            )


class MatchRequestTests(SimpleTestCase):
    def setUp(self):
        self.ontology = load_ontology_file(EXAMPLES / "handling_ontology.json")
        self.matcher = RequestMatcher(self.ontology)

    def test_exact_class(self):
        report = self.matcher.match("r1", "Pick & place")
        self.assertIn(("3", 1.0), report.class_scores)

    def test_empty_request(self):
        report = self.matcher.match("r0", "")
        self.assertTrue(report.is_empty)

    def test_attribute_and_owner(self):
        report = match_request("r9", preprocess("Stroke X 100 mm", self.ontology), self.ontology)
        self.assertIn(("a2", 1.0), report.attribute_scores)
        self.assertTrue(all(0 < score <= 1 for _, score in report.class_scores))
        self.assertTrue(all(0 < score <= 1 for _, score in report.attribute_scores))


class XmlReportTests(SimpleTestCase):
    """XML similarity report"""

    def test_class_entry(self):
        xml = emit_similarity_xml(SimilarityReport("r1", class_scores=(("7", 1.0),)))
        self.assertIn("<CID>7</CID><CWeight>1.0000</CWeight>", xml)

    def test_attribute_entry(self):
        xml = emit_similarity_xml(SimilarityReport("r1", attribute_scores=(("3", 3 / 7),)))
        self.assertIn("<AID>3</AID><AWeight>0.4286</AWeight>", xml)

    def test_empty_report(self):
        xml = emit_similarity_xml([])
        self.assertEqual(parse_similarity_xml(xml), [])
        self.assertNotIn("<Request", xml)

    def test_round_trip(self):
        reports = [
            SimilarityReport("r1", (("3", 1.0), ("2", 0.4286)), (("a1", 0.25),)),
            SimilarityReport("r2"),
        ]
        xml = emit_similarity_xml(reports)
        parsed = parse_similarity_xml(xml)
        self.assertEqual(parsed, reports)
        self.assertEqual(emit_similarity_xml(parsed), xml)

    def test_broken_xml(self):
        with self.assertRaises(ReportFormatError):
            parse_similarity_xml("<SimilarityReports><Request>")


class MatchCommandTests(SimpleTestCase):
    """manage.py match"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.ontology = str(EXAMPLES / "handling_ontology.json")
        self.requests = str(EXAMPLES / "handling_requests.jsonl")

    def test_writes_xml(self):
        out = Path(self.tmp.name) / "report.xml"
        stdout = StringIO()
        call_command("match", self.ontology, self.requests, "-o", str(out), stdout=stdout)
        reports = parse_similarity_xml(out.read_text(encoding="utf-8"))
        self.assertEqual([r.request_id for r in reports], ["r1", "r2", "r3", "r4", "r5"])
        self.assertIn("<CID>3</CID><CWeight>1.0000</CWeight>", out.read_text(encoding="utf-8"))
        self.assertIn("Matched 5 requests", stdout.getvalue())

    def test_identical_runs_identical_output(self):
        first, second = StringIO(), StringIO()
        call_command("match", self.ontology, self.requests, stdout=first)
        call_command("match", self.ontology, self.requests, stdout=second)
        self.assertEqual(first.getvalue(), second.getvalue())

    def test_empty_request_file(self):
        empty = Path(self.tmp.name) / "empty.jsonl"
        empty.write_text("", encoding="utf-8")
        stdout = StringIO()
        call_command("match", self.ontology, str(empty), stdout=stdout)
        self.assertEqual(parse_similarity_xml(stdout.getvalue()), [])

    def test_missing_ontology(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("match", "/nonexistent/ontology.json", self.requests)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("ontology not found", str(ctx.exception))

    def test_bad_record_names_file_and_line(self):
        bad = Path(self.tmp.name) / "bad.jsonl"
        bad.write_text(
            '{"request_id": "r1", "user_id": "u1", "timestamp": "2024-03-01T09:00:00+00:00", '
            '"language": "en", "text": "Motor"}\n'
            '{"request_id": "r2", "user_id": "u1", "timestamp": "yesterday", '
            '"language": "en", "text": "Motor"}\n',
            encoding="utf-8",
        )
        with self.assertRaises(CommandError) as ctx:
            call_command("match", self.ontology, str(bad))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn(str(bad), str(ctx.exception))
        self.assertIn("line 2", str(ctx.exception))

    def test_entries_listed(self):
        stdout = StringIO()
        call_command(
            "match", self.ontology, self.requests, "-o", str(Path(self.tmp.name) / "r.xml"),
            "--entries", stdout=stdout,
        )
        self.assertIn("r5\ta2\t'stroke'", stdout.getvalue())

    def test_class_threshold_applies_to_cached_reports(self):
        fresh_log = Path(self.tmp.name) / "fresh.jsonl"
        cached_log = Path(self.tmp.name) / "cached.jsonl"
        for log in (fresh_log, cached_log):
            log.write_text(Path(self.requests).read_text(encoding="utf-8"), encoding="utf-8")

        expected = StringIO()
        call_command("match", self.ontology, str(fresh_log), "--class-threshold", "0.9", stdout=expected)

        call_command("match", self.ontology, str(cached_log), "--cache", stdout=StringIO())
        self.assertIn('"matching_version"', cached_log.read_text(encoding="utf-8"))
        stricter = StringIO()
        call_command("match", self.ontology, str(cached_log), "--class-threshold", "0.9", stdout=stricter)

        self.assertEqual(stricter.getvalue(), expected.getvalue())
        reports = parse_similarity_xml(stricter.getvalue())
        self.assertTrue(all(score >= 0.9 for r in reports for _, score in r.class_scores))
