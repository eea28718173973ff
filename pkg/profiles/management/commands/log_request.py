from django.conf import settings
from django.utils import timezone

from config.commands import PipelineCommand
from profiles.models import RequestRecord
from profiles.store import RequestLog, append_request


class Command(PipelineCommand):
    help = "Append one customer request to the request log"

    def add_command_arguments(self, parser):
        parser.add_argument("requests", help="Request log (JSON lines); created if missing")
        parser.add_argument("request_id", help="Unique id of the request")
        parser.add_argument("user_id", help="Id of the user who sent it")
        parser.add_argument("text", help="Raw request text")
        parser.add_argument(
            "--language", help=f"Language tag of the text (default: {settings.TEXT_LANGUAGE})"
        )
        parser.add_argument("--timestamp", help="ISO timestamp (default: now, UTC)")

    def handle(self, *args, **options):
        timestamp = self._timestamp(options, "timestamp") or timezone.now()
        record = RequestRecord(
            request_id=options["request_id"],
            user_id=options["user_id"],
            timestamp=timestamp,
            language=self.option(options, "language", settings.TEXT_LANGUAGE),
            text=options["text"],
        )
        store = append_request(RequestLog(options["requests"]), record)
        self.stdout.write(
            self.style.SUCCESS(f"Logged {record.request_id} for {record.user_id} in {store.path}")
        )
