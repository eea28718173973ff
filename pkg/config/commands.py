# config/commands.py
"""
Shared plumbing for the pipeline management commands.

Every command accepts --config PATH (KEY=VALUE lines read with python-dotenv);
values resolve as command-line flag > config file > settings. Failures are
turned into CommandError with the exit code the command line promises:
2 for usage and validation problems, 1 for anything else.
"""

import logging
from collections.abc import Callable
from datetime import UTC, datetime
from pathlib import Path
from typing import Any

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from django.core.management.base import BaseCommand, CommandError
from django.utils import timezone
from django.utils.dateparse import parse_datetime
from dotenv import dotenv_values

from graphs.models import UserProfile
from ontology.exceptions import OntologyError
from ontology.loader import load_ontology_file
from ontology.models import Ontology
from profiles.exceptions import InvalidRecordError
from profiles.store import RequestLog, load_profiles, profiles_as_request_users

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
RUNTIME_ERROR = 1

MODES = ("users", "requests")


def parse_float_list(value: str, epsilon: float | None = None) -> list[float]:
    """Comma-separated floats; "eps" stands for epsilon (default: CLUSTERING_EPSILON)."""
    if epsilon is None:
        epsilon = settings.CLUSTERING_EPSILON
    items = []
    for raw in value.split(","):
        raw = raw.strip()
        if not raw:
            continue
        items.append(epsilon if raw.lower() in ("eps", "epsilon") else float(raw))
    return items


class PipelineCommand(BaseCommand):
    def add_arguments(self, parser):
        parser.add_argument(
            "--config",
            help="KEY=VALUE file with defaults for this command's options",
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def execute(self, *args, **options):
        self._config: dict[str, str | None] = {}
        try:
            if options.get("config"):
                self._config = self.read_config(options["config"])
            return super().execute(*args, **options)
        except CommandError:
            raise
        except FileNotFoundError as exc:
            raise CommandError(f"file not found: {exc.filename}", returncode=USAGE_ERROR) from exc
        except (ValueError, OntologyError, ImproperlyConfigured) as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR) from exc
        except Exception as exc:
            logger.exception(f"{self.__module__.rsplit('.', 1)[-1]} failed")
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=RUNTIME_ERROR) from exc

    # --- option resolution -------------------------------------------------

    def read_config(self, path: str) -> dict[str, str | None]:
        self.require_file(path, "config")
        return {key.upper(): value for key, value in dotenv_values(path).items()}

    def option(
        self,
        options: dict[str, Any],
        name: str,
        default: Any,
        cast: Callable[[str], Any] = str,
    ) -> Any:
        """Flag if given, else the config file's NAME entry, else default."""
        if options.get(name) is not None:
            return options[name]
        raw = self._config.get(name.upper())
        if raw is None:
            return default
        try:
            return cast(raw)
        except ValueError as exc:
            raise CommandError(
                f"config: bad value for {name.upper()}: {raw!r}", returncode=USAGE_ERROR
            ) from exc

    # --- inputs and outputs ------------------------------------------------

    def require_file(self, path: str | Path, kind: str) -> Path:
        path = Path(path)
        if not path.is_file():
            raise CommandError(f"{kind} not found: {path}", returncode=USAGE_ERROR)
        return path

    def load_ontology(self, path: str) -> Ontology:
        self.require_file(path, "ontology")
        try:
            return load_ontology_file(path)
        except OntologyError as exc:
            raise CommandError(f"{path}: {exc}", returncode=USAGE_ERROR) from exc

    def open_requests(self, path: str, profiles_path: str | None = None) -> RequestLog:
        self.require_file(path, "requests")
        if profiles_path:
            self.require_file(profiles_path, "profiles")
        return RequestLog(path, profiles_path)

    def write_output(self, path: str | None, text: str) -> None:
        if path in (None, "-"):
            self.stdout.write(text, ending="")
            return
        Path(path).write_text(text, encoding="utf-8")

    def load_profiles(self, store: RequestLog, ontology: Ontology, **filters) -> list[UserProfile]:
        try:
            return load_profiles(store, ontology, **filters)
        except InvalidRecordError as exc:
            raise CommandError(f"{store.path}: {exc}", returncode=USAGE_ERROR) from exc

    # --- shared by the graph commands ----------------------------------------

    def add_profile_arguments(self, parser):
        parser.add_argument("ontology", help="Ontology JSON document")
        parser.add_argument("requests", help="Request log (JSON lines)")
        parser.add_argument("--profiles", help="Personal data JSON keyed by user id")
        parser.add_argument(
            "--mode",
            choices=MODES,
            help="Cluster users, or every request as its own pseudo-user (default: users)",
        )
        parser.add_argument("--user", help="Only use this user's requests")
        parser.add_argument("--language", help="Only use requests in this language")
        parser.add_argument("--since", help="Only use requests at or after this ISO timestamp")
        parser.add_argument("--until", help="Only use requests before this ISO timestamp")
        parser.add_argument(
            "--epsilon",
            type=float,
            help=f"Floor for arc weights (default: {settings.CLUSTERING_EPSILON})",
        )
        parser.add_argument(
            "--ca-weight",
            type=float,
            help=f"Weight of class-attribute arcs (default: {settings.CLUSTERING_CA_WEIGHT})",
        )

    def _timestamp(self, options: dict[str, Any], name: str) -> datetime | None:
        raw = self.option(options, name, None)
        if raw is None:
            return None
        try:
            value = parse_datetime(raw)
        except ValueError:
            value = None
        if value is None:
            raise CommandError(f"--{name}: not an ISO timestamp: {raw!r}", returncode=USAGE_ERROR)
        return value if timezone.is_aware(value) else timezone.make_aware(value, UTC)

    def read_profiles(
        self, options: dict[str, Any], ontology: Ontology
    ) -> tuple[list[UserProfile], str]:
        """Profiles for the graph commands, expanded per request in request mode."""
        mode = self.option(options, "mode", "users")
        if mode not in MODES:
            raise CommandError(
                f"mode must be one of {', '.join(MODES)}, got {mode!r}", returncode=USAGE_ERROR
            )

        store = self.open_requests(options["requests"], self.option(options, "profiles", None))
        profiles = self.load_profiles(
            store,
            ontology,
            user_id=self.option(options, "user", None),
            language=self.option(options, "language", None),
            since=self._timestamp(options, "since"),
            until=self._timestamp(options, "until"),
        )
        if mode == "requests":
            profiles = profiles_as_request_users(profiles)
        return profiles, mode
