# graphs/services/builder.py

import logging
from collections import defaultdict
from collections.abc import Sequence

from graphs.exceptions import InconsistentReportError
from graphs.models import ArcType, GraphNode, GraphParams, NodeKind, UserProfile, WeightedGraph
from ontology.models import ArcKind, Ontology

from .weights import aggregate_arc_weight

logger = logging.getLogger(__name__)


def ontology_skeleton(ontology: Ontology, params: GraphParams) -> WeightedGraph:
    """Class and attribute nodes joined by CC / CA arcs."""
    graph = WeightedGraph()
    for cls in ontology.classes:
        graph.add_node(GraphNode(NodeKind.CLASS, cls.id), label=cls.name)
    for attr in ontology.attributes:
        graph.add_node(GraphNode(NodeKind.ATTRIBUTE, attr.id), label=attr.name)

    for arc in ontology.arcs:
        if arc.kind == ArcKind.CC:
            graph.add_arc(
                GraphNode(NodeKind.CLASS, arc.source),
                GraphNode(NodeKind.CLASS, arc.target),
                params.cc_weight,
                ArcType.CC,
            )
        else:
            graph.add_arc(
                GraphNode(NodeKind.ATTRIBUTE, arc.source),
                GraphNode(NodeKind.CLASS, arc.target),
                params.ca_weight,
                ArcType.CA,
            )
    return graph


def collect_similarities(
    profiles: Sequence[UserProfile], ontology: Ontology
) -> tuple[dict[tuple[str, str], list[float]], dict[tuple[str, str], list[float]]]:
    """Per (element, user) similarity lists for classes and for attributes."""
    class_sims: dict[tuple[str, str], list[float]] = defaultdict(list)
    attr_sims: dict[tuple[str, str], list[float]] = defaultdict(list)
    unknown: list[str] = []
    seen_users: set[str] = set()
    duplicates: list[str] = []

    for profile in profiles:
        if profile.user_id in seen_users:
            duplicates.append(profile.user_id)
        seen_users.add(profile.user_id)
        for report in profile.reports:
            for class_id, sim in report.class_scores:
                if class_id not in ontology.classes_by_id:
                    unknown.append(class_id)
                    continue
                class_sims[(class_id, profile.user_id)].append(sim)
            for attr_id, sim in report.attribute_scores:
                if attr_id not in ontology.attributes_by_id:
                    unknown.append(attr_id)
                    continue
                attr_sims[(attr_id, profile.user_id)].append(sim)

    if duplicates:
        raise InconsistentReportError("Duplicate user ids", ids=duplicates)
    if unknown:
        raise InconsistentReportError("Reports reference unknown ontology ids", ids=unknown)
    return class_sims, attr_sims


def build_user_ontology_graph(
    profiles: Sequence[UserProfile], ontology: Ontology, params: GraphParams
) -> WeightedGraph:
    """
    Build G_0: the ontology skeleton plus one user node per profile.

    CU / AU arc weights aggregate all of a user's requests hitting the same
    element. N_max is taken over the whole corpus, separately for classes
    and for attributes. Users without matches stay isolated.
    """
    class_sims, attr_sims = collect_similarities(profiles, ontology)
    graph = ontology_skeleton(ontology, params)

    for profile in profiles:
        graph.add_node(GraphNode(NodeKind.USER, profile.user_id))

    for sims_by_pair, kind, arc_type in (
        (class_sims, NodeKind.CLASS, ArcType.CU),
        (attr_sims, NodeKind.ATTRIBUTE, ArcType.AU),
    ):
        n_max = max((len(sims) for sims in sims_by_pair.values()), default=1)
        for (element_id, user_id), sims in sorted(sims_by_pair.items()):
            graph.add_arc(
                GraphNode(NodeKind.USER, user_id),
                GraphNode(kind, element_id),
                aggregate_arc_weight(sims, n_max, params.epsilon),
                arc_type,
            )

    logger.info(
        f"Built user-ontology graph: {graph.number_of_nodes()} nodes, "
        f"{graph.number_of_arcs()} arcs, {len(profiles)} users"
    )
    return graph
