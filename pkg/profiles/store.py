# profiles/store.py
"""
Append-only request log (JSON lines) plus an optional personal-data file.

A single writer appends whole lines and syncs them to disk; readers skip an
unterminated last line that does not parse yet, so they always see a
consistent prefix of the log. Before appending, the writer terminates a
complete last line or drops a partial one, so a new record always starts
on its own line.
"""

import json
import logging
import os
from collections import defaultdict
from collections.abc import Sequence
from datetime import datetime
from pathlib import Path
from typing import Any

from graphs.models import UserProfile
from matching.services.similarity import RequestMatcher
from ontology.loader import ontology_digest
from ontology.models import Ontology
from textproc import get_text_pipeline

from .exceptions import DuplicateRequestError, InvalidRecordError, StoreUnreadableError
from .models import RequestRecord

logger = logging.getLogger(__name__)


class RequestLog:
    def __init__(self, path: str | Path, profiles_path: str | Path | None = None):
        self.path = Path(path)
        self.profiles_path = Path(profiles_path) if profiles_path else None
        self._ids: set[str] | None = None

    def __repr__(self) -> str:
        return f"RequestLog({str(self.path)!r})"

    def _read_text(self, path: Path) -> str:
        try:
            return path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise
        except (OSError, UnicodeDecodeError) as exc:
            raise StoreUnreadableError(f"Cannot read {path}: {exc}") from exc

    def records(self) -> list[RequestRecord]:
        """All records in timestamp order; a missing log is an empty store."""
        if not self.path.exists():
            return []
        text = self._read_text(self.path)
        lines = text.split("\n")
        records: list[RequestRecord] = []
        seen: set[str] = set()

        for line_no, raw in enumerate(lines, start=1):
            if not raw.strip():
                continue
            unterminated = line_no == len(lines)
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as exc:
                if unterminated:
                    logger.warning(f"{self.path}: ignoring partial last line {line_no}")
                    continue
                raise InvalidRecordError(f"invalid JSON ({exc.msg})", line=line_no) from exc
            record = RequestRecord.from_dict(data, line=line_no)
            if record.request_id in seen:
                raise InvalidRecordError(
                    f"duplicate request id '{record.request_id}'", line=line_no, field="request_id"
                )
            seen.add(record.request_id)
            records.append(record)

        self._ids = seen
        return sorted(records, key=lambda r: (r.timestamp, r.request_id))

    def request_ids(self) -> set[str]:
        if self._ids is None:
            self.records()
        return set(self._ids or ())

    def append(self, record: RequestRecord) -> None:
        ids = self.request_ids()
        if record.request_id in ids:
            raise DuplicateRequestError(record.request_id)

        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._terminate_tail()
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(record.to_json_line())
            fh.flush()
            os.fsync(fh.fileno())
        ids.add(record.request_id)
        self._ids = ids
        logger.debug(f"Appended request {record.request_id} for user {record.user_id}")

    def _terminate_tail(self) -> None:
        if not self.path.exists() or self.path.stat().st_size == 0:
            return
        with self.path.open("rb") as fh:
            fh.seek(-1, os.SEEK_END)
            if fh.read(1) == b"\n":
                return
        data = self.path.read_bytes()
        cut = data.rfind(b"\n") + 1
        try:
            json.loads(data[cut:].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            logger.warning(f"{self.path}: dropping partial last line before append")
            with self.path.open("r+b") as fh:
                fh.truncate(cut)
            return
        with self.path.open("ab") as fh:
            fh.write(b"\n")

    def rewrite(self, records: Sequence[RequestRecord]) -> None:
        """Replace the log atomically, e.g. after caching similarity reports."""
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            fh.writelines(r.to_json_line() for r in records)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)
        self._ids = {r.request_id for r in records}

    def personal_data(self) -> dict[str, dict[str, Any]]:
        if self.profiles_path is None:
            return {}
        try:
            data = json.loads(self._read_text(self.profiles_path))
        except json.JSONDecodeError as exc:
            raise InvalidRecordError(f"invalid profiles JSON ({exc.msg})", line=exc.lineno) from exc
        if not isinstance(data, dict):
            raise InvalidRecordError("profiles file must map user ids to objects")
        return {str(uid): dict(fields) for uid, fields in data.items()}


def append_request(store: RequestLog, record: RequestRecord) -> RequestLog:
    store.append(record)
    return store


def _select(
    records: list[RequestRecord],
    language: str | None,
    since: datetime | None,
    until: datetime | None,
    user_id: str | None = None,
) -> list[RequestRecord]:
    if user_id is not None:
        records = [r for r in records if r.user_id == user_id]
    if language is not None:
        records = [r for r in records if r.language == language]
    if since is not None:
        records = [r for r in records if r.timestamp >= since]
    if until is not None:
        records = [r for r in records if r.timestamp < until]
    return records


class _Matchers(dict[str, RequestMatcher]):
    """One matcher per record language, built on first use."""

    def __init__(self, ontology: Ontology, class_threshold: float | None):
        super().__init__()
        self.ontology = ontology
        self.class_threshold = class_threshold

    def __missing__(self, language: str) -> RequestMatcher:
        matcher = RequestMatcher(
            self.ontology,
            pipeline=get_text_pipeline(language),
            class_threshold=self.class_threshold,
        )
        self[language] = matcher
        return matcher


def _is_fresh(record: RequestRecord, version: str, matcher: RequestMatcher) -> bool:
    return (
        record.report is not None
        and record.ontology_version == version
        and record.matching_version == matcher.version
    )


def load_profiles(
    store: RequestLog,
    ontology: Ontology,
    language: str | None = None,
    since: datetime | None = None,
    until: datetime | None = None,
    class_threshold: float | None = None,
    user_id: str | None = None,
) -> list[UserProfile]:
    """
    Group the log by user, attaching one similarity report per request.

    Cached reports are reused when they were computed against the current
    ontology digest and the same matcher settings (class threshold,
    spelling limits, lexicons); otherwise they are recomputed with the
    record's own language pipeline. Profiles come back sorted by user id.
    """
    version = ontology_digest(ontology)
    records = _select(store.records(), language, since, until, user_id)
    personal = store.personal_data()

    matchers = _Matchers(ontology, class_threshold)
    by_user = defaultdict(list)
    stale = 0
    for record in records:
        matcher = matchers[record.language]
        if _is_fresh(record, version, matcher):
            report = record.report
        else:
            if record.report is not None:
                stale += 1
            report = matcher.match(record.request_id, record.text)
        by_user[record.user_id].append(report)

    if stale:
        logger.warning(
            f"Recomputed {stale} stale similarity report(s) in {store.path} "
            f"for ontology version {version[:12]}"
        )
    logger.info(f"Loaded {len(records)} requests for {len(by_user)} users from {store.path}")
    return [
        UserProfile(user_id=uid, personal=personal.get(uid, {}), reports=tuple(reports))
        for uid, reports in sorted(by_user.items())
    ]


def cache_reports(
    store: RequestLog, ontology: Ontology, class_threshold: float | None = None
) -> int:
    """Store fresh reports on every record whose cache is missing or stale."""
    version = ontology_digest(ontology)
    records = store.records()
    profiles = load_profiles(store, ontology, class_threshold=class_threshold)
    reports = {rep.request_id: rep for p in profiles for rep in p.reports}
    matchers = _Matchers(ontology, class_threshold)

    updated = 0
    refreshed = []
    for record in records:
        matcher = matchers[record.language]
        if not _is_fresh(record, version, matcher):
            record = record.with_report(reports[record.request_id], version, matcher.version)
            updated += 1
        refreshed.append(record)
    if updated:
        store.rewrite(refreshed)
    logger.info(f"Cached {updated} similarity report(s) in {store.path}")
    return updated


def profiles_as_request_users(profiles: Sequence[UserProfile]) -> list[UserProfile]:
    """One pseudo-user per request, for clustering requests directly."""
    users = [
        UserProfile(user_id=report.request_id, personal={"user_id": p.user_id}, reports=(report,))
        for p in profiles
        for report in p.reports
    ]
    return sorted(users, key=lambda u: u.user_id)
