from django.conf import settings

from config.commands import PipelineCommand
from matching.services.similarity import find_entries
from matching.services.xml_report import emit_similarity_xml
from profiles.store import cache_reports
from textproc import get_text_pipeline


class Command(PipelineCommand):
    help = "Match logged requests against an ontology and write the XML similarity report"

    def add_command_arguments(self, parser):
        parser.add_argument("ontology", help="Ontology JSON document")
        parser.add_argument("requests", help="Request log (JSON lines)")
        parser.add_argument("-o", "--output", help="XML output path (default: stdout)")
        parser.add_argument(
            "--language",
            help="Only match requests in this language (default: all languages in the log)",
        )
        parser.add_argument(
            "--class-threshold",
            type=float,
            help=f"Class similarity cut-off (default: {settings.MATCHING_CLASS_THRESHOLD})",
        )
        parser.add_argument(
            "--entries",
            action="store_true",
            help="Also print the attribute name fragments found in each request",
        )
        parser.add_argument(
            "--cache",
            action="store_true",
            help="Store the computed reports back into the request log",
        )

    def handle(self, *args, **options):
        ontology = self.load_ontology(options["ontology"])
        store = self.open_requests(options["requests"])
        language = self.option(options, "language", None)
        threshold = self.option(
            options, "class_threshold", settings.MATCHING_CLASS_THRESHOLD, float
        )

        profiles = self.load_profiles(
            store, ontology, language=language, class_threshold=threshold
        )
        by_id = {report.request_id: report for p in profiles for report in p.reports}
        records = [r for r in store.records() if r.request_id in by_id]
        reports = [by_id[r.request_id] for r in records]

        self.write_output(options["output"], emit_similarity_xml(reports))

        if options["entries"]:
            for record in records:
                pipeline = get_text_pipeline(record.language)
                for attr in ontology.attributes:
                    for entry in find_entries(record.text, attr, pipeline):
                        self.stdout.write(
                            f"{record.request_id}\t{attr.id}\t{entry.text!r}\t{entry.score:.4f}"
                        )

        if options["cache"]:
            updated = cache_reports(store, ontology, class_threshold=threshold)
            self.stdout.write(f"Cached reports: {updated}")

        if options["output"] not in (None, "-"):
            with_hits = sum(1 for r in reports if not r.is_empty)
            self.stdout.write(self.style.SUCCESS(f"Matched {len(reports)} requests"))
            self.stdout.write(f"With at least one hit: {with_hits}")
            self.stdout.write(f"Report written to {options['output']}")
