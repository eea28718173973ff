# graphs/services/floyd.py
"""
User-to-user shortest path distances (the user graph G_2).

The pivot loop follows Floyd's recurrence T[j, k] = min(T[j, k], T[j, i] + T[i, k]).
Pivots run in order; each pivot step updates all (j, k) pairs at once with numpy.
"""

import csv
import io
import logging
import math
from collections.abc import Iterable, Iterator, Sequence

import networkx as nx
import numpy as np

from graphs.exceptions import ArtifactFormatError
from graphs.models import NodeKind, WeightedGraph

logger = logging.getLogger(__name__)


def _format_distance(value: float) -> str:
    return "inf" if math.isinf(value) else repr(float(value))


class DistanceTable:
    """Symmetric user x user table; infinity marks disconnected users."""

    def __init__(self, users: Sequence[str], distances: np.ndarray):
        if distances.shape != (len(users), len(users)):
            raise ArtifactFormatError(
                f"Distance matrix shape {distances.shape} does not match {len(users)} users"
            )
        self.users: tuple[str, ...] = tuple(users)
        self.distances = distances
        self._index = {user: i for i, user in enumerate(self.users)}

    def __len__(self) -> int:
        return len(self.users)

    def __contains__(self, user: object) -> bool:
        return user in self._index

    def distance(self, u: str, v: str) -> float:
        return float(self.distances[self._index[u], self._index[v]])

    def arcs(self) -> Iterator[tuple[str, str, float]]:
        """Finite off-diagonal entries, each pair once, in user order."""
        n = len(self.users)
        for i in range(n):
            for j in range(i + 1, n):
                weight = float(self.distances[i, j])
                if not math.isinf(weight):
                    yield self.users[i], self.users[j], weight

    def subtable(self, members: Iterable[str]) -> "DistanceTable":
        wanted = set(members)
        chosen = [u for u in self.users if u in wanted]
        idx = [self._index[u] for u in chosen]
        return DistanceTable(chosen, self.distances[np.ix_(idx, idx)])

    def component_count(self) -> int:
        graph = nx.Graph()
        graph.add_nodes_from(self.users)
        graph.add_edges_from((u, v) for u, v, _ in self.arcs())
        return nx.number_connected_components(graph)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["user_id", *self.users])
        for i, user in enumerate(self.users):
            writer.writerow([user, *(_format_distance(v) for v in self.distances[i])])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DistanceTable":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or not rows[0] or rows[0][0] != "user_id":
            raise ArtifactFormatError("Distance CSV must start with a 'user_id' header")
        users = rows[0][1:]
        if len(rows) - 1 != len(users):
            raise ArtifactFormatError("Distance CSV must have one row per user")
        matrix = np.empty((len(users), len(users)))
        for line_no, row in enumerate(rows[1:], start=2):
            if len(row) != len(users) + 1 or row[0] != users[line_no - 2]:
                raise ArtifactFormatError(f"Distance CSV line {line_no} does not match the header")
            try:
                matrix[line_no - 2] = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise ArtifactFormatError(f"Distance CSV line {line_no}: {exc}") from exc
        return cls(users, matrix)


def weight_matrix(g0: WeightedGraph) -> tuple[list, np.ndarray]:
    """Dense matrix form: 0 on the diagonal, arc weight, or infinity."""
    nodes = g0.nodes
    index = {node: i for i, node in enumerate(nodes)}
    matrix = np.full((len(nodes), len(nodes)), np.inf)
    np.fill_diagonal(matrix, 0.0)
    for a, b, weight, _ in g0.arcs():
        matrix[index[a], index[b]] = weight
        matrix[index[b], index[a]] = weight
    return nodes, matrix


def all_pairs_user_distances(g0: WeightedGraph) -> DistanceTable:
    """
    Shortest path weight between every pair of users of G_0.

    Paths may pass through class, attribute and other user nodes; only the
    user rows and columns are kept.
    """
    nodes, table = weight_matrix(g0)

    for pivot in range(len(nodes)):
        # inf + x stays inf, so absent arcs never produce a path
        np.minimum(table, table[:, pivot, np.newaxis] + table[np.newaxis, pivot, :], out=table)

    user_idx = [i for i, node in enumerate(nodes) if node.kind == NodeKind.USER]
    users = [nodes[i].id for i in user_idx]
    logger.info(f"Computed user distances: {len(nodes)} nodes, {len(users)} users")
    return DistanceTable(users, table[np.ix_(user_idx, user_idx)])
