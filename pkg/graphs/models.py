# graphs/models.py

import json
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any

import networkx as nx
from django.conf import settings

from matching.models import SimilarityReport

from .exceptions import ArtifactFormatError, GraphError, InvalidGraphParamsError


class NodeKind(StrEnum):
    CLASS = "Class"
    ATTRIBUTE = "Attribute"
    USER = "User"


class ArcType(StrEnum):
    CC = "CC"
    CA = "CA"
    CU = "CU"
    AU = "AU"


@dataclass(frozen=True, order=True)
class GraphNode:
    kind: NodeKind
    id: str

    def __str__(self) -> str:
        return f"{self.kind}:{self.id}"


@dataclass(frozen=True)
class GraphParams:
    """
    Administrator-chosen weights of the ontology arcs plus the epsilon floor.

    cc_weight and ca_weight may equal epsilon (the low end of a sweep) but
    must stay below 1.
    """

    cc_weight: float = 0.2
    ca_weight: float = 0.2
    epsilon: float = 0.001

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise InvalidGraphParamsError("0 < epsilon < 1", epsilon=self.epsilon)
        if not self.epsilon <= self.cc_weight < 1:
            raise InvalidGraphParamsError(
                "epsilon <= cc_weight < 1", cc_weight=self.cc_weight, epsilon=self.epsilon
            )
        if not self.epsilon <= self.ca_weight < 1:
            raise InvalidGraphParamsError(
                "epsilon <= ca_weight < 1", ca_weight=self.ca_weight, epsilon=self.epsilon
            )

    @classmethod
    def from_settings(cls, **overrides: float) -> "GraphParams":
        values = {
            "cc_weight": getattr(settings, "CLUSTERING_CC_WEIGHT", 0.2),
            "ca_weight": getattr(settings, "CLUSTERING_CA_WEIGHT", 0.2),
            "epsilon": getattr(settings, "CLUSTERING_EPSILON", 0.001),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class UserProfile:
    """A user (or a single request in request mode) with one report per request."""

    user_id: str
    personal: dict[str, Any] = field(default_factory=dict)
    reports: tuple[SimilarityReport, ...] = ()


class WeightedGraph:
    """
    Undirected typed-node graph with weight-matrix semantics.

    weight(i, i) is 0, weight of a missing arc is infinity, every stored
    arc has a finite positive weight. Storage is sparse.
    """

    def __init__(self) -> None:
        self._graph = nx.Graph()

    def add_node(self, node: GraphNode, label: str | None = None) -> None:
        self._graph.add_node(node, label=label or node.id)

    def label(self, node: GraphNode) -> str:
        return self._graph.nodes[node]["label"]

    def add_arc(self, a: GraphNode, b: GraphNode, weight: float, arc_type: ArcType) -> None:
        if a == b:
            raise GraphError(f"Self-loop on {a} is not allowed")
        if not (0 < weight < math.inf):
            raise GraphError(f"Arc {a} - {b} needs a finite positive weight, got {weight}")
        existing = self._graph.get_edge_data(a, b)
        if existing is not None and existing["weight"] <= weight:
            return
        self._graph.add_edge(a, b, weight=weight, arc_type=arc_type)

    def weight(self, a: GraphNode, b: GraphNode) -> float:
        if a == b:
            return 0.0
        data = self._graph.get_edge_data(a, b)
        return math.inf if data is None else data["weight"]

    @property
    def nodes(self) -> list[GraphNode]:
        return sorted(self._graph.nodes)

    @property
    def users(self) -> list[GraphNode]:
        return [n for n in self.nodes if n.kind == NodeKind.USER]

    def arcs(self) -> Iterator[tuple[GraphNode, GraphNode, float, ArcType]]:
        """Arcs in a stable order, each pair once with the smaller node first."""
        ordered = sorted(tuple(sorted((a, b))) for a, b in self._graph.edges)
        for a, b in ordered:
            data = self._graph.edges[a, b]
            yield a, b, data["weight"], data["arc_type"]

    def number_of_nodes(self) -> int:
        return self._graph.number_of_nodes()

    def number_of_arcs(self) -> int:
        return self._graph.number_of_edges()

    def to_networkx(self) -> nx.Graph:
        return self._graph.copy()

    def reweighted(self, params: GraphParams) -> "WeightedGraph":
        """Copy with CC/CA arcs set to the given ontology weights; user arcs kept."""
        other = WeightedGraph()
        other._graph = self._graph.copy()
        for a, b, data in other._graph.edges(data=True):
            if data["arc_type"] == ArcType.CC:
                data["weight"] = params.cc_weight
            elif data["arc_type"] == ArcType.CA:
                data["weight"] = params.ca_weight
        return other

    def to_dict(self) -> dict[str, Any]:
        return {
            "artifact": "user_ontology_graph",
            "nodes": [
                {"kind": str(n.kind), "id": n.id, "label": self.label(n)} for n in self.nodes
            ],
            "arcs": [
                {"source": str(a), "target": str(b), "type": str(t), "weight": w}
                for a, b, w, t in self.arcs()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "WeightedGraph":
        graph = cls()
        try:
            by_key = {}
            for raw in data["nodes"]:
                node = GraphNode(kind=NodeKind(raw["kind"]), id=str(raw["id"]))
                graph.add_node(node, label=raw.get("label"))
                by_key[str(node)] = node
            for raw in data["arcs"]:
                graph.add_arc(
                    by_key[raw["source"]],
                    by_key[raw["target"]],
                    float(raw["weight"]),
                    ArcType(raw["type"]),
                )
        except (KeyError, TypeError, ValueError) as exc:
            raise ArtifactFormatError(f"Malformed graph document: {exc}") from exc
        return graph
