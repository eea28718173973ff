# clustering/serializers.py

import json
from dataclasses import dataclass, field
from typing import Any

from graphs.exceptions import ArtifactFormatError
from graphs.models import WeightedGraph

from .services.agglomerative import Cluster, Clustering, MergeStep

ARTIFACT = "clustering"


@dataclass
class ClusteringDocument:
    """A clustering plus the parameters it was produced with and, optionally, G_0."""

    clustering: Clustering
    params: dict[str, Any] = field(default_factory=dict)
    graph: WeightedGraph | None = None


def clustering_to_dict(document: ClusteringDocument) -> dict[str, Any]:
    clustering = document.clustering
    data: dict[str, Any] = {
        "artifact": ARTIFACT,
        "params": {"d_max": clustering.d_max, **document.params},
        "clusters": [
            {"members": c.sorted_members(), "mass": c.mass} for c in clustering.clusters
        ],
        "merge_log": [
            {"left": s.left, "right": s.right, "arc_weight": s.arc_weight, "mass": s.mass}
            for s in clustering.merge_log
        ],
    }
    if document.graph is not None:
        data["graph"] = document.graph.to_dict()
    return data


def dump_clustering(document: ClusteringDocument) -> str:
    return json.dumps(clustering_to_dict(document), indent=2, ensure_ascii=False) + "\n"


def load_clustering(text: str) -> ClusteringDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactFormatError(f"Invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict) or data.get("artifact") != ARTIFACT:
        raise ArtifactFormatError("Not a clustering document")

    try:
        params = dict(data["params"])
        d_max = float(params.pop("d_max"))
        clusters = tuple(
            Cluster(frozenset(str(m) for m in raw["members"]), float(raw["mass"]))
            for raw in data["clusters"]
        )
        merge_log = tuple(
            MergeStep(str(s["left"]), str(s["right"]), float(s["arc_weight"]), float(s["mass"]))
            for s in data["merge_log"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactFormatError(f"Malformed clustering document: {exc}") from exc

    graph = WeightedGraph.from_dict(data["graph"]) if "graph" in data else None
    return ClusteringDocument(
        clustering=Clustering(clusters=clusters, merge_log=merge_log, d_max=d_max),
        params=params,
        graph=graph,
    )
