# profiles/tests.py
import json
import random
import tempfile
from datetime import UTC, datetime, timedelta
from io import StringIO
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from clustering.services.agglomerative import cluster_users
from graphs.models import GraphParams
from graphs.services.builder import build_user_ontology_graph
from graphs.services.floyd import all_pairs_user_distances
from matching.models import SimilarityReport
from matching.services.similarity import RequestMatcher
from ontology.loader import load_ontology_file, ontology_digest

from .exceptions import DuplicateRequestError, InvalidRecordError, StoreUnreadableError
from .models import RequestRecord
from .store import (
    RequestLog,
    append_request,
    cache_reports,
    load_profiles,
    profiles_as_request_users,
)

EXAMPLES = Path(settings.BASE_DIR) / "docs" / "examples"
START = datetime(2024, 3, 1, 9, 0, tzinfo=UTC)


def record(rid: str, uid: str, text: str = "Motor", minutes: int = 0, **kwargs) -> RequestRecord:
    return RequestRecord(
        request_id=rid,
        user_id=uid,
        timestamp=START + timedelta(minutes=minutes),
        language=kwargs.pop("language", "en"),
        text=text,
        **kwargs,
    )


class StoreTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.store = RequestLog(self.dir / "requests.jsonl")
        self.ontology = load_ontology_file(EXAMPLES / "handling_ontology.json")


class RequestRecordTests(SimpleTestCase):
    """Record validation and the JSON line form"""

    def test_naive_timestamp_is_utc(self):
        rec = RequestRecord("r1", "u1", datetime(2024, 3, 1, 9, 0), "en", "Motor")
        self.assertEqual(rec.timestamp, START)

    def test_empty_text_rejected(self):
        with self.assertRaises(InvalidRecordError) as ctx:
            record("r1", "u1", text="   ")
        self.assertEqual(ctx.exception.field, "text")

    def test_report_needs_version(self):
        with self.assertRaises(InvalidRecordError):
            record("r1", "u1", report=SimilarityReport("r1"))

    def test_missing_field(self):
        with self.assertRaisesMessage(InvalidRecordError, "line 4: user_id: missing"):
            RequestRecord.from_dict({"request_id": "r1"}, line=4)

    def test_bad_timestamp(self):
        data = {"request_id": "r1", "user_id": "u1", "timestamp": "soon", "language": "en", "text": "x"}
        with self.assertRaises(InvalidRecordError) as ctx:
            RequestRecord.from_dict(data, line=2)
        self.assertEqual((ctx.exception.line, ctx.exception.field), (2, "timestamp"))

    def test_cached_report_round_trip(self):
        rec = record("r1", "u1").with_report(
            SimilarityReport("r1", class_scores=(("8", 1.0),), attribute_scores=(("a2", 0.25),)),
            "abc",
        )
        self.assertEqual(RequestRecord.from_dict(rec.to_dict()), rec)

    def test_example_log_round_trips_byte_identical(self):
        path = EXAMPLES / "handling_requests.jsonl"
        records = RequestLog(path).records()
        self.assertEqual("".join(r.to_json_line() for r in records), path.read_text(encoding="utf-8"))


class AppendTests(StoreTestCase):
    """append_request"""

    def test_append_then_load(self):
        rec = record("r1", "u1", text="Vacuum gripper für Kartons", language="de")
        append_request(self.store, rec)
        self.assertEqual(RequestLog(self.store.path).records(), [rec])

    def test_duplicate_rejected(self):
        append_request(self.store, record("r1", "u1"))
        with self.assertRaises(DuplicateRequestError):
            append_request(self.store, record("r1", "u2"))
        with self.assertRaises(DuplicateRequestError):
            RequestLog(self.store.path).append(record("r1", "u3"))
        self.assertEqual(len(self.store.records()), 1)

    def test_thousand_records_in_timestamp_order(self):
        rng = random.Random(1000)
        for i in range(1000):
            self.store.append(record(f"r{i}", f"u{i % 7}", minutes=rng.randint(0, 100_000)))
        records = RequestLog(self.store.path).records()
        self.assertEqual(len(records), 1000)
        keys = [(r.timestamp, r.request_id) for r in records]
        self.assertEqual(keys, sorted(keys))

    def test_partial_last_line_ignored(self):
        self.store.append(record("r1", "u1"))
        with self.store.path.open("a", encoding="utf-8") as fh:
            fh.write('{"request_id": "r2", "user_')
        with self.assertLogs("profiles.store", "WARNING"):
            records = self.store.records()
        self.assertEqual([r.request_id for r in records], ["r1"])

    def test_append_after_unterminated_last_record(self):
        first = record("r1", "u1")
        self.store.path.write_text(first.to_json_line().rstrip("\n"), encoding="utf-8")
        second = record("r2", "u2", minutes=1)
        RequestLog(self.store.path).append(second)
        self.assertEqual(RequestLog(self.store.path).records(), [first, second])
        third = record("r3", "u3", minutes=2)
        RequestLog(self.store.path).append(third)
        self.assertEqual(RequestLog(self.store.path).records(), [first, second, third])

    def test_append_after_partial_tail(self):
        first = record("r1", "u1")
        self.store.path.write_text(first.to_json_line() + '{"request_id": "r9", "us', encoding="utf-8")
        second = record("r2", "u2", minutes=1)
        with self.assertLogs("profiles.store", "WARNING"):
            RequestLog(self.store.path).append(second)
        self.assertEqual(RequestLog(self.store.path).records(), [first, second])
        self.assertTrue(self.store.path.read_text(encoding="utf-8").endswith("\n"))

    def test_broken_line_in_the_middle(self):
        self.store.path.write_text(
            '{"request_id": \n' + record("r1", "u1").to_json_line(), encoding="utf-8"
        )
        with self.assertRaisesMessage(InvalidRecordError, "line 1"):
            self.store.records()

    def test_duplicate_in_file(self):
        line = record("r1", "u1").to_json_line()
        self.store.path.write_text(line + line, encoding="utf-8")
        with self.assertRaisesMessage(InvalidRecordError, "line 2: request_id"):
            self.store.records()

    def test_unreadable(self):
        self.store.path.write_bytes(b"\xff\xfe\x00garbage")
        with self.assertRaises(StoreUnreadableError):
            self.store.records()


class LoadProfilesTests(StoreTestCase):
    """load_profiles"""

    def test_empty_store(self):
        self.assertEqual(load_profiles(self.store, self.ontology), [])
        self.store.path.write_text("", encoding="utf-8")
        self.assertEqual(load_profiles(self.store, self.ontology), [])

    def test_grouped_by_user(self):
        for rec in (
            record("r1", "u2", "Motor", 0),
            record("r2", "u1", "Linear axis", 1),
            record("r3", "u2", "Grippers", 2),
        ):
            self.store.append(rec)
        profiles = load_profiles(self.store, self.ontology)
        self.assertEqual([(p.user_id, len(p.reports)) for p in profiles], [("u1", 1), ("u2", 2)])
        self.assertEqual([r.request_id for r in profiles[1].reports], ["r1", "r3"])

    def test_idempotent_reads(self):
        self.store.append(record("r1", "u1", "Pick & place"))
        self.assertEqual(
            load_profiles(self.store, self.ontology), load_profiles(self.store, self.ontology)
        )

    def test_fresh_cache_reused(self):
        cached = SimilarityReport("r1", class_scores=(("8", 0.5),))
        rec = record("r1", "u1", "Pick & place").with_report(
            cached, ontology_digest(self.ontology), RequestMatcher(self.ontology).version
        )
        self.store.append(rec)
        with self.assertNoLogs("profiles.store", "WARNING"):
            profiles = load_profiles(self.store, self.ontology)
        self.assertEqual(profiles[0].reports, (cached,))

    def test_stale_cache_recomputed(self):
        cached = SimilarityReport("r1", class_scores=(("8", 0.5),))
        self.store.append(record("r1", "u1", "Pick & place").with_report(cached, "old-version"))
        with self.assertLogs("profiles.store", "WARNING") as logs:
            profiles = load_profiles(self.store, self.ontology)
        self.assertIn("stale", logs.output[0])
        self.assertIn(("3", 1.0), profiles[0].reports[0].class_scores)

    def test_cache_keyed_on_matcher_settings(self):
        """A cached report is stale under another class threshold or without a matcher version"""
        cached = SimilarityReport("r1", class_scores=(("8", 0.5),))
        version = ontology_digest(self.ontology)
        matcher = RequestMatcher(self.ontology, class_threshold=0.3)
        self.store.append(record("r1", "u1", "Pick & place").with_report(cached, version, matcher.version))
        self.store.append(record("r2", "u2", "Pick & place", 1).with_report(cached, version))

        profiles = load_profiles(self.store, self.ontology, class_threshold=0.3)
        self.assertEqual(profiles[0].reports[0], cached)
        self.assertNotEqual(profiles[1].reports[0].class_scores, cached.class_scores)

        with self.assertLogs("profiles.store", "WARNING"):
            stricter = load_profiles(self.store, self.ontology, class_threshold=0.9)
        self.assertNotEqual(stricter[0].reports[0].class_scores, cached.class_scores)
        self.assertNotEqual(matcher.version, RequestMatcher(self.ontology, class_threshold=0.9).version)

    def test_cache_reports(self):
        for line in (EXAMPLES / "handling_requests.jsonl").read_text(encoding="utf-8").splitlines():
            self.store.append(RequestRecord.from_dict(json.loads(line)))
        before = load_profiles(self.store, self.ontology)
        self.assertEqual(cache_reports(self.store, self.ontology), 5)
        self.assertEqual(cache_reports(self.store, self.ontology), 0)
        records = self.store.records()
        self.assertTrue(all(r.ontology_version == ontology_digest(self.ontology) for r in records))
        matcher_version = RequestMatcher(self.ontology).version
        self.assertTrue(all(r.matching_version == matcher_version for r in records))
        self.assertEqual(load_profiles(self.store, self.ontology), before)

    def test_filters(self):
        for rec in (
            record("r1", "u1", "Motor", 0),
            record("r2", "u1", "Motor", 10, language="de"),
            record("r3", "u2", "Motor", 20),
        ):
            self.store.append(rec)
        english = load_profiles(self.store, self.ontology, language="en")
        self.assertEqual([r.request_id for p in english for r in p.reports], ["r1", "r3"])
        window = load_profiles(
            self.store,
            self.ontology,
            since=START + timedelta(minutes=5),
            until=START + timedelta(minutes=20),
        )
        self.assertEqual([r.request_id for p in window for r in p.reports], ["r2"])
        one_user = load_profiles(self.store, self.ontology, user_id="u1")
        self.assertEqual([p.user_id for p in one_user], ["u1"])
        self.assertEqual([r.request_id for r in one_user[0].reports], ["r1", "r2"])

    def test_personal_data_attached(self):
        store = RequestLog(EXAMPLES / "handling_requests.jsonl", EXAMPLES / "handling_profiles.json")
        profiles = load_profiles(store, self.ontology)
        self.assertEqual(profiles[0].personal["country"], "DE")

    def test_request_users(self):
        for rec in (record("r2", "u1", "Motor", 0), record("r1", "u1", "Grippers", 1)):
            self.store.append(rec)
        users = profiles_as_request_users(load_profiles(self.store, self.ontology))
        self.assertEqual([u.user_id for u in users], ["r1", "r2"])
        self.assertEqual(users[0].personal, {"user_id": "u1"})
        self.assertEqual(len(users[0].reports), 1)

    def test_clustering_ignores_log_order(self):
        lines = (EXAMPLES / "handling_requests.jsonl").read_text(encoding="utf-8").splitlines()
        shuffled = lines[:]
        random.Random(3).shuffle(shuffled)
        self.store.path.write_text("\n".join(shuffled) + "\n", encoding="utf-8")

        def clusters(store):
            profiles = load_profiles(store, self.ontology)
            g0 = build_user_ontology_graph(profiles, self.ontology, GraphParams())
            return cluster_users(all_pairs_user_distances(g0), 0.6)

        self.assertEqual(clusters(self.store), clusters(RequestLog(EXAMPLES / "handling_requests.jsonl")))


class LogRequestCommandTests(StoreTestCase):
    """manage.py log_request"""

    def test_append_and_duplicate(self):
        stdout = StringIO()
        call_command(
            "log_request",
            str(self.store.path),
            "r1",
            "u1",
            "Stroke X 100 mm",
            "--timestamp",
            "2024-03-01T09:00:00",
            stdout=stdout,
        )
        self.assertIn("Logged r1 for u1", stdout.getvalue())
        self.assertEqual(self.store.records(), [record("r1", "u1", "Stroke X 100 mm")])

        with self.assertRaises(CommandError) as ctx:
            call_command("log_request", str(self.store.path), "r1", "u2", "Motor")
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("already exists", str(ctx.exception))
