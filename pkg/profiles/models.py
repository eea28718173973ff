# profiles/models.py

import json
from dataclasses import dataclass, replace
from datetime import UTC, datetime
from typing import Any

from django.utils import timezone
from django.utils.dateparse import parse_datetime

from matching.models import SimilarityReport

from .exceptions import InvalidRecordError


@dataclass(frozen=True)
class RequestRecord:
    """
    One logged customer request.

    report and ontology_version travel together: a cached report is only
    valid for the ontology whose digest it was computed against, and for
    the matcher settings recorded in matching_version.
    """

    request_id: str
    user_id: str
    timestamp: datetime
    language: str
    text: str
    report: SimilarityReport | None = None
    ontology_version: str | None = None
    matching_version: str | None = None

    def __post_init__(self):
        for name in ("request_id", "user_id", "language", "text"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise InvalidRecordError("must be a non-empty string", field=name)
        if timezone.is_naive(self.timestamp):
            object.__setattr__(self, "timestamp", timezone.make_aware(self.timestamp, UTC))
        if (self.report is None) != (self.ontology_version is None):
            raise InvalidRecordError(
                "report and ontology_version must be given together", field="report"
            )

    def with_report(
        self, report: SimilarityReport, ontology_version: str, matching_version: str | None = None
    ) -> "RequestRecord":
        return replace(
            self,
            report=report,
            ontology_version=ontology_version,
            matching_version=matching_version,
        )

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "request_id": self.request_id,
            "user_id": self.user_id,
            "timestamp": self.timestamp.isoformat(),
            "language": self.language,
            "text": self.text,
        }
        if self.report is not None:
            data["ontology_version"] = self.ontology_version
            if self.matching_version is not None:
                data["matching_version"] = self.matching_version
            data["report"] = {
                "classes": [[cid, s] for cid, s in self.report.class_scores],
                "attributes": [[aid, s] for aid, s in self.report.attribute_scores],
            }
        return data

    def to_json_line(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: Any, line: int | None = None) -> "RequestRecord":
        if not isinstance(data, dict):
            raise InvalidRecordError("record must be a JSON object", line=line)

        for name in ("request_id", "user_id", "timestamp", "language", "text"):
            if name not in data:
                raise InvalidRecordError("missing", line=line, field=name)

        raw_ts = data["timestamp"]
        try:
            timestamp = parse_datetime(raw_ts) if isinstance(raw_ts, str) else None
        except ValueError:
            timestamp = None
        if timestamp is None:
            raise InvalidRecordError(
                f"unparseable timestamp {raw_ts!r}", line=line, field="timestamp"
            )

        report = None
        if data.get("report") is not None:
            try:
                report = SimilarityReport.from_dict(
                    {"request_id": data["request_id"], **data["report"]}
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidRecordError(
                    f"bad cached report ({exc})", line=line, field="report"
                ) from exc

        try:
            return cls(
                request_id=data["request_id"],
                user_id=data["user_id"],
                timestamp=timestamp,
                language=data["language"],
                text=data["text"],
                report=report,
                ontology_version=data.get("ontology_version"),
                matching_version=data.get("matching_version"),
            )
        except InvalidRecordError as exc:
            raise InvalidRecordError(exc.detail, line=line, field=exc.field) from exc
