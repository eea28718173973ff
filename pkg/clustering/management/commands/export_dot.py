import json
from pathlib import Path

from django.core.management.base import CommandError

from clustering.serializers import ARTIFACT as CLUSTERING_ARTIFACT
from clustering.serializers import load_clustering
from config.commands import USAGE_ERROR, PipelineCommand
from graphs.exceptions import ArtifactFormatError
from graphs.models import WeightedGraph
from graphs.services.dot import clusters_to_dot, distances_to_dot, graph_to_dot
from graphs.services.floyd import DistanceTable

GRAPH_ARTIFACT = "user_ontology_graph"


class Command(PipelineCommand):
    help = "Render a graph JSON, distance CSV or clustering JSON artifact as Graphviz DOT"

    def add_command_arguments(self, parser):
        parser.add_argument("artifact", help="Artifact written by the cluster command")
        parser.add_argument("-o", "--output", help="DOT output path (default: stdout)")

    def handle(self, *args, **options):
        path = self.require_file(options["artifact"], "artifact")
        text = path.read_text(encoding="utf-8")
        try:
            dot = self.render(path, text)
        except ArtifactFormatError as exc:
            raise CommandError(f"{path}: {exc}", returncode=USAGE_ERROR) from exc
        self.write_output(options["output"], dot)

    def render(self, path: Path, text: str) -> str:
        if path.suffix.lower() == ".csv":
            return distances_to_dot(DistanceTable.from_csv(text))

        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CommandError(f"{path}: unknown artifact", returncode=USAGE_ERROR) from exc
        kind = data.get("artifact") if isinstance(data, dict) else None

        if kind == GRAPH_ARTIFACT:
            return graph_to_dot(WeightedGraph.from_dict(data))
        if kind == CLUSTERING_ARTIFACT:
            document = load_clustering(text)
            boxes = [c.sorted_members() for c in document.clustering.clusters]
            if document.graph is None:
                return clusters_to_dot(boxes)
            return graph_to_dot(document.graph, boxes)
        raise CommandError(f"{path}: unknown artifact {kind!r}", returncode=USAGE_ERROR)
