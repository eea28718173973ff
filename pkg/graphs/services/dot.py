# graphs/services/dot.py
"""
Graphviz DOT rendering of G_0 / G_2, optionally with clusters drawn as
enclosing boxes around their users.

Classes are ovals, attributes dashed ovals, users and requests rectangles.
Arc labels carry the weight with 4 decimals.
"""

from collections.abc import Hashable, Iterable, Sequence

import pydot

from graphs.models import GraphNode, NodeKind, WeightedGraph
from graphs.services.floyd import DistanceTable

NODE_STYLES = {
    NodeKind.CLASS: {"shape": "ellipse"},
    NodeKind.ATTRIBUTE: {"shape": "ellipse", "style": "dashed"},
    NodeKind.USER: {"shape": "box"},
}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _edge_label(weight: float) -> str:
    return _quote(f"{weight:.4f}")


def _render(
    nodes: Sequence[tuple[Hashable, NodeKind, str]],
    edges: Iterable[tuple[Hashable, Hashable, float]],
    clusters: Sequence[Iterable[Hashable]],
    name: str,
) -> str:
    """nodes are (key, kind, label); edges and clusters refer to node keys."""
    dot = pydot.Dot(name, graph_type="graph")

    boxes = []
    owner: dict[Hashable, pydot.Cluster] = {}
    for idx, members in enumerate(clusters):
        box = pydot.Cluster(str(idx), label=_quote(f"Cluster {idx + 1}"))
        boxes.append(box)
        for key in members:
            owner[key] = box

    names: dict[Hashable, str] = {}
    for i, (key, kind, label) in enumerate(nodes):
        names[key] = f"n{i}"
        node = pydot.Node(f"n{i}", label=_quote(label), **NODE_STYLES[kind])
        owner.get(key, dot).add_node(node)

    for box in boxes:
        dot.add_subgraph(box)

    for source, target, weight in edges:
        dot.add_edge(pydot.Edge(names[source], names[target], label=_edge_label(weight)))
    return dot.to_string()


def graph_to_dot(g0: WeightedGraph, clusters: Sequence[Iterable[str]] = ()) -> str:
    nodes = [(n, n.kind, g0.label(n)) for n in g0.nodes]
    edges = ((a, b, w) for a, b, w, _ in g0.arcs())
    boxes = [[GraphNode(NodeKind.USER, u) for u in members] for members in clusters]
    return _render(nodes, edges, boxes, "user_ontology")


def distances_to_dot(g2: DistanceTable, clusters: Sequence[Iterable[str]] = ()) -> str:
    nodes = [(u, NodeKind.USER, u) for u in g2.users]
    return _render(nodes, g2.arcs(), clusters, "user_distances")


def clusters_to_dot(clusters: Sequence[Iterable[str]]) -> str:
    """Cluster boxes only, for clustering documents saved without their graph."""
    boxes = [sorted(members) for members in clusters]
    nodes = [(u, NodeKind.USER, u) for members in boxes for u in members]
    return _render(nodes, [], boxes, "clusters")
