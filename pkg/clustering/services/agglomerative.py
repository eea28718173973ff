# clustering/services/agglomerative.py
"""
Mass-bounded agglomerative clustering of the user graph G_2.

Every user starts as its own cluster with mass 0. The candidate value of a
pair of clusters is arc + mass_i + mass_j; the smallest candidate is merged
while it does not exceed D_max, and the merged cluster takes that value as
its mass. Arcs from a merged cluster to its neighbours keep the lighter of
the two (single linkage).
"""

import heapq
import logging
import math
from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum

from clustering.exceptions import InvalidThresholdError, ReplayMismatchError
from graphs.services.floyd import DistanceTable

logger = logging.getLogger(__name__)


class MassDefinition(StrEnum):
    RECURRENCE = "recurrence"
    ARC_SUM = "arc_sum"


@dataclass(frozen=True)
class Cluster:
    members: frozenset[str]
    mass: float = 0.0

    @property
    def representative(self) -> str:
        return min(self.members)

    def sorted_members(self) -> list[str]:
        return sorted(self.members)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class MergeStep:
    """One accepted merge: `right` is absorbed into `left` (left < right)."""

    left: str
    right: str
    arc_weight: float
    mass: float


@dataclass(frozen=True)
class Clustering:
    clusters: tuple[Cluster, ...]
    merge_log: tuple[MergeStep, ...]
    d_max: float

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def users(self) -> list[str]:
        return sorted(u for c in self.clusters for u in c.members)

    @property
    def masses(self) -> list[float]:
        return [c.mass for c in self.clusters]

    def cluster_of(self, user_id: str) -> Cluster:
        for cluster in self.clusters:
            if user_id in cluster.members:
                return cluster
        raise KeyError(user_id)

    def replay(self) -> list[Cluster]:
        """Rebuild the clusters from singletons by applying the merge log in order."""
        groups = {u: {u} for u in self.users}
        masses = dict.fromkeys(groups, 0.0)
        for step in self.merge_log:
            if step.left not in groups or step.right not in groups:
                raise ReplayMismatchError(
                    f"Merge {step.left} <- {step.right} refers to a retired cluster"
                )
            groups[step.left] |= groups.pop(step.right)
            masses.pop(step.right)
            masses[step.left] = step.mass
        return sort_clusters(Cluster(frozenset(m), masses[rep]) for rep, m in groups.items())

    def verify_replay(self) -> None:
        if self.replay() != list(self.clusters):
            raise ReplayMismatchError("Merge log does not reproduce the partition")


def sort_clusters(clusters: Iterable[Cluster]) -> list[Cluster]:
    """Largest first, then by smallest member id."""
    return sorted(clusters, key=lambda c: (-len(c), c.representative))


def cluster_users(g2: DistanceTable, d_max: float) -> Clustering:
    if not d_max > 0:
        raise InvalidThresholdError(d_max)

    members: dict[str, set[str]] = {u: {u} for u in g2.users}
    mass: dict[str, float] = dict.fromkeys(g2.users, 0.0)
    version: dict[str, int] = dict.fromkeys(g2.users, 0)
    adjacency: dict[str, dict[str, float]] = {u: {} for u in g2.users}
    for u, v, weight in g2.arcs():
        adjacency[u][v] = weight
        adjacency[v][u] = weight

    heap: list[tuple[float, str, str, int, int]] = []

    def push(a: str, b: str) -> None:
        if b < a:
            a, b = b, a
        value = adjacency[a][b] + mass[a] + mass[b]
        heapq.heappush(heap, (value, a, b, version[a], version[b]))

    for u, v, _ in g2.arcs():
        push(u, v)

    merge_log: list[MergeStep] = []
    while heap:
        value, a, b, ver_a, ver_b = heapq.heappop(heap)
        if a not in members or b not in members or version[a] != ver_a or version[b] != ver_b:
            continue
        if value > d_max:
            break

        arc_weight = adjacency[a].pop(b)
        for neighbour, weight in adjacency.pop(b).items():
            if neighbour == a:
                continue
            del adjacency[neighbour][b]
            merged = min(weight, adjacency[a].get(neighbour, math.inf))
            adjacency[a][neighbour] = merged
            adjacency[neighbour][a] = merged

        members[a] |= members.pop(b)
        del mass[b], version[b]
        mass[a] = value
        version[a] += 1
        merge_log.append(MergeStep(left=a, right=b, arc_weight=arc_weight, mass=value))
        logger.debug(f"Merged {b} into {a}: arc={arc_weight}, mass={value}")

        for neighbour in adjacency[a]:
            push(a, neighbour)

    clusters = sort_clusters(Cluster(frozenset(m), mass[rep]) for rep, m in members.items())
    logger.info(
        f"Clustered {len(g2)} users into {len(clusters)} clusters "
        f"({len(merge_log)} merges, d_max={d_max})"
    )
    return Clustering(clusters=tuple(clusters), merge_log=tuple(merge_log), d_max=d_max)


def cluster_mass(
    cluster: Cluster,
    g2: DistanceTable,
    definition: MassDefinition = MassDefinition.RECURRENCE,
) -> float:
    """
    Mass of a cluster, recomputed from G_2.

    RECURRENCE re-runs the merge loop on the members alone without a bound;
    for a cluster produced by cluster_users this reproduces the mass it
    accumulated, since merges among the members happen in the same order.
    ARC_SUM adds up every finite pairwise distance inside the cluster. It is
    never below the recurrence value and equals it for pairs.
    """
    if len(cluster.members) < 2:
        return 0.0
    sub = g2.subtable(cluster.members)
    if definition == MassDefinition.ARC_SUM:
        return sum(weight for _, _, weight in sub.arcs())
    return sum(cluster_users(sub, math.inf).masses)
