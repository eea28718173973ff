# graphs/tests.py
import json
import math
import random
import time
from pathlib import Path
from unittest import skipUnless

import networkx as nx
import numpy as np
from django.conf import settings
from django.test import SimpleTestCase

from matching.models import SimilarityReport
from ontology.loader import load_ontology_file

from .exceptions import (
    ArtifactFormatError,
    InconsistentReportError,
    InvalidGraphParamsError,
    WeightDomainError,
)
from .models import ArcType, GraphNode, GraphParams, NodeKind, UserProfile, WeightedGraph
from .services.builder import build_user_ontology_graph
from .services.dot import distances_to_dot, graph_to_dot
from .services.floyd import DistanceTable, all_pairs_user_distances
from .services.weights import aggregate_arc_weight, request_arc_weight

EXAMPLE = Path(settings.BASE_DIR) / "docs" / "examples" / "handling_ontology.json"
EPS = 0.001


def user(uid: str) -> GraphNode:
    return GraphNode(NodeKind.USER, uid)


def klass(cid: str) -> GraphNode:
    return GraphNode(NodeKind.CLASS, cid)


def profile(uid: str, *reports: SimilarityReport) -> UserProfile:
    return UserProfile(user_id=uid, reports=reports)


def random_graph(rng: random.Random, n_nodes: int, density: float) -> WeightedGraph:
    graph = WeightedGraph()
    nodes = []
    for i in range(n_nodes):
        kind = rng.choice([NodeKind.USER, NodeKind.USER, NodeKind.CLASS, NodeKind.ATTRIBUTE])
        node = GraphNode(kind, f"n{i}")
        graph.add_node(node)
        nodes.append(node)
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < density:
                graph.add_arc(nodes[i], nodes[j], rng.uniform(EPS, 1.0), ArcType.CU)
    return graph


class ArcWeightTests(SimpleTestCase):
    """Per-request and aggregated CU/AU weights"""

    def test_perfect_match_floors_to_epsilon(self):
        self.assertEqual(request_arc_weight(1.0, EPS), EPS)
        self.assertAlmostEqual(aggregate_arc_weight([1.0], 1, EPS), EPS)

    def test_two_half_matches(self):
        self.assertAlmostEqual(aggregate_arc_weight([0.5, 0.5], 2, EPS), 0.5)

    def test_fewer_matches_weaker_tie(self):
        self.assertAlmostEqual(aggregate_arc_weight([0.5], 2, EPS), 0.75)

    def test_more_requests_lighter_arc(self):
        weights = [aggregate_arc_weight([0.4] * k, 5, EPS) for k in range(1, 6)]
        self.assertEqual(weights, sorted(weights, reverse=True))
        self.assertEqual(len(set(weights)), 5)
        self.assertTrue(all(EPS <= w < 1 for w in weights))

    def test_domain_errors(self):
        with self.assertRaises(WeightDomainError):
            aggregate_arc_weight([0.5, 0.5], 1, EPS)
        with self.assertRaises(WeightDomainError):
            aggregate_arc_weight([0.0], 1, EPS)
        with self.assertRaises(WeightDomainError):
            aggregate_arc_weight([], 1, EPS)


class GraphParamsTests(SimpleTestCase):
    def test_defaults_from_settings(self):
        params = GraphParams.from_settings()
        self.assertEqual(params.cc_weight, settings.CLUSTERING_CC_WEIGHT)
        self.assertEqual(params.epsilon, settings.CLUSTERING_EPSILON)

    def test_override(self):
        self.assertEqual(GraphParams.from_settings(cc_weight=0.5, epsilon=None).cc_weight, 0.5)

    def test_weight_may_equal_epsilon(self):
        GraphParams(cc_weight=EPS, ca_weight=EPS, epsilon=EPS)

    def test_violations_name_constraint(self):
        with self.assertRaisesMessage(InvalidGraphParamsError, "epsilon <= cc_weight < 1"):
            GraphParams(cc_weight=1.0)
        with self.assertRaisesMessage(InvalidGraphParamsError, "epsilon <= ca_weight < 1"):
            GraphParams(ca_weight=0.0001)
        with self.assertRaisesMessage(InvalidGraphParamsError, "0 < epsilon < 1"):
            GraphParams(epsilon=0)


class BuildGraphTests(SimpleTestCase):
    """G_0 construction"""

    def setUp(self):
        self.ontology = load_ontology_file(EXAMPLE)
        self.params = GraphParams(cc_weight=0.2, ca_weight=0.2, epsilon=EPS)

    def test_skeleton_only(self):
        graph = build_user_ontology_graph([], self.ontology, self.params)
        self.assertEqual(graph.users, [])
        self.assertEqual(graph.number_of_nodes(), 13)
        cc = [w for _, _, w, t in graph.arcs() if t == ArcType.CC]
        self.assertEqual(len(cc), 9)
        self.assertTrue(all(w == 0.2 for w in cc))
        self.assertEqual(graph.number_of_arcs(), 12)

    def test_single_exact_match(self):
        profiles = [profile("u1", SimilarityReport("r1", class_scores=(("3", 1.0),)))]
        graph = build_user_ontology_graph(profiles, self.ontology, self.params)
        user_arcs = [(a, b, t) for a, b, _, t in graph.arcs() if t == ArcType.CU]
        self.assertEqual(user_arcs, [(klass("3"), user("u1"), ArcType.CU)])
        self.assertAlmostEqual(graph.weight(user("u1"), klass("3")), EPS)

    def test_n_max_over_corpus(self):
        """A user matching a class once is weaker than one matching it twice"""
        r = lambda rid: SimilarityReport(rid, class_scores=(("8", 0.5),))  # noqa: E731
        profiles = [profile("u1", r("r1"), r("r2")), profile("u2", r("r3"))]
        graph = build_user_ontology_graph(profiles, self.ontology, self.params)
        self.assertAlmostEqual(graph.weight(user("u1"), klass("8")), 0.5)
        self.assertAlmostEqual(graph.weight(user("u2"), klass("8")), 0.75)

    def test_attribute_arcs(self):
        profiles = [profile("u1", SimilarityReport("r1", attribute_scores=(("a2", 1.0),)))]
        graph = build_user_ontology_graph(profiles, self.ontology, self.params)
        node = GraphNode(NodeKind.ATTRIBUTE, "a2")
        self.assertAlmostEqual(graph.weight(user("u1"), node), EPS)

    def test_user_without_matches_isolated(self):
        profiles = [profile("u1", SimilarityReport("r1"))]
        graph = build_user_ontology_graph(profiles, self.ontology, self.params)
        self.assertEqual(graph.users, [user("u1")])
        self.assertFalse(any(user("u1") in (a, b) for a, b, _, _ in graph.arcs()))

    def test_unknown_id(self):
        profiles = [profile("u1", SimilarityReport("r1", class_scores=(("999", 1.0),)))]
        with self.assertRaises(InconsistentReportError) as ctx:
            build_user_ontology_graph(profiles, self.ontology, self.params)
        self.assertEqual(ctx.exception.ids, ["999"])

    def test_reweighted_keeps_user_arcs(self):
        profiles = [profile("u1", SimilarityReport("r1", class_scores=(("3", 0.6),)))]
        graph = build_user_ontology_graph(profiles, self.ontology, self.params)
        other = graph.reweighted(GraphParams(cc_weight=0.5, ca_weight=0.3, epsilon=EPS))
        self.assertEqual(other.weight(klass("3"), klass("2")), 0.5)
        self.assertEqual(other.weight(GraphNode(NodeKind.ATTRIBUTE, "a1"), klass("3")), 0.3)
        self.assertEqual(other.weight(user("u1"), klass("3")), graph.weight(user("u1"), klass("3")))
        self.assertEqual(graph.weight(klass("3"), klass("2")), 0.2)

    def test_json_round_trip(self):
        profiles = [profile("u1", SimilarityReport("r1", class_scores=(("3", 1.0),)))]
        graph = build_user_ontology_graph(profiles, self.ontology, self.params)
        text = graph.to_json()
        again = WeightedGraph.from_dict(json.loads(text))
        self.assertEqual(again.to_json(), text)
        self.assertEqual(again.label(klass("3")), "Pick & place")

    def test_weight_matrix_semantics(self):
        graph = WeightedGraph()
        graph.add_node(user("a"))
        graph.add_node(user("b"))
        self.assertEqual(graph.weight(user("a"), user("a")), 0.0)
        self.assertEqual(graph.weight(user("a"), user("b")), math.inf)
        graph.add_arc(user("a"), user("b"), 0.4, ArcType.CU)
        graph.add_arc(user("b"), user("a"), 0.7, ArcType.CU)
        self.assertEqual(graph.weight(user("b"), user("a")), 0.4)


class DistanceTests(SimpleTestCase):
    """All-pairs user distances (G_2)"""

    def test_line_graph(self):
        graph = WeightedGraph()
        graph.add_arc(user("u1"), klass("c"), 0.2, ArcType.CU)
        graph.add_arc(klass("c"), user("u2"), 0.3, ArcType.CU)
        for node in (user("u1"), user("u2"), klass("c")):
            graph.add_node(node)
        table = all_pairs_user_distances(graph)
        self.assertEqual(table.users, ("u1", "u2"))
        self.assertAlmostEqual(table.distance("u1", "u2"), 0.5)

    def test_single_user(self):
        graph = WeightedGraph()
        graph.add_node(user("u1"))
        table = all_pairs_user_distances(graph)
        self.assertEqual(table.distance("u1", "u1"), 0.0)
        self.assertEqual(list(table.arcs()), [])

    def test_disconnected(self):
        graph = WeightedGraph()
        graph.add_node(user("u1"))
        graph.add_node(user("u2"))
        table = all_pairs_user_distances(graph)
        self.assertEqual(table.distance("u1", "u2"), math.inf)
        self.assertEqual(table.component_count(), 2)

    def test_exhaustive_path_oracle(self):
        """200 random graphs with at most 8 nodes against all simple paths"""
        rng = random.Random(8)
        for _ in range(200):
            graph = random_graph(rng, rng.randint(1, 8), rng.uniform(0.1, 0.8))
            table = all_pairs_user_distances(graph)
            nxg = graph.to_networkx()
            for u in graph.users:
                for v in graph.users:
                    if u == v:
                        expected = 0.0
                    else:
                        lengths = [
                            nx.path_weight(nxg, path, "weight")
                            for path in nx.all_simple_paths(nxg, u, v)
                        ]
                        expected = min(lengths, default=math.inf)
                    got = table.distance(u.id, v.id)
                    if math.isinf(expected):
                        self.assertTrue(math.isinf(got))
                    else:
                        self.assertAlmostEqual(got, expected, delta=1e-9)

    def test_dijkstra_oracle(self):
        """20 random graphs with 100 nodes against single-source Dijkstra"""
        rng = random.Random(100)
        for _ in range(20):
            graph = random_graph(rng, 100, 0.04)
            table = all_pairs_user_distances(graph)
            nxg = graph.to_networkx()
            for u in graph.users:
                lengths = nx.single_source_dijkstra_path_length(nxg, u, weight="weight")
                for v in graph.users:
                    self.assertAlmostEqual(
                        table.distance(u.id, v.id), lengths.get(v, math.inf), delta=1e-9
                    )

    def test_symmetry_and_triangle(self):
        rng = random.Random(3)
        table = all_pairs_user_distances(random_graph(rng, 40, 0.1))
        d = table.distances
        self.assertTrue(np.array_equal(d, d.T))
        n = len(table)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if np.isfinite(d[j, i]) and np.isfinite(d[i, k]):
                        self.assertLessEqual(d[j, k], d[j, i] + d[i, k] + 1e-12)

    def test_csv_round_trip(self):
        graph = random_graph(random.Random(5), 12, 0.2)
        graph.add_node(user("isolated"))
        table = all_pairs_user_distances(graph)
        text = table.to_csv()
        self.assertIn("inf", text)
        again = DistanceTable.from_csv(text)
        self.assertEqual(again.to_csv(), text)
        self.assertTrue(np.array_equal(again.distances, table.distances))

    def test_csv_rejects_garbage(self):
        with self.assertRaises(ArtifactFormatError):
            DistanceTable.from_csv("who,u1\nu1,0\n")
        with self.assertRaises(ArtifactFormatError):
            DistanceTable.from_csv("user_id,u1\nu1,zero\n")


class DotExportTests(SimpleTestCase):
    def test_two_nodes_one_edge(self):
        graph = WeightedGraph()
        graph.add_node(klass("c"), label="Pick & place")
        graph.add_node(user("u1"))
        graph.add_arc(klass("c"), user("u1"), 0.2, ArcType.CU)
        dot = graph_to_dot(graph)
        self.assertEqual(dot.count("shape=ellipse"), 1)
        self.assertEqual(dot.count("shape=box"), 1)
        self.assertEqual(dot.count(" -- "), 1)
        self.assertIn('label="0.2000"', dot)
        self.assertIn('label="Pick & place"', dot)

    def test_clusters_as_boxes(self):
        graph = WeightedGraph()
        graph.add_arc(user("u1"), user("u2"), 0.1, ArcType.CU)
        graph.add_node(user("u3"))
        dot = graph_to_dot(graph, [["u1", "u2"], ["u3"]])
        self.assertIn("cluster_0", dot)
        self.assertIn("cluster_1", dot)

    def test_distance_table(self):
        graph = WeightedGraph()
        graph.add_arc(user("u1"), klass("c"), 0.25, ArcType.CU)
        graph.add_arc(klass("c"), user("u2"), 0.25, ArcType.CU)
        dot = distances_to_dot(all_pairs_user_distances(graph))
        self.assertIn('label="0.5000"', dot)
        self.assertEqual(dot.count(" -- "), 1)

    def test_deterministic(self):
        graph = random_graph(random.Random(9), 10, 0.3)
        self.assertEqual(graph_to_dot(graph), graph_to_dot(graph))


@skipUnless(settings.TIMING_TESTS, "set ONTOCLUST_TIMING_TESTS=1 to run scaling checks")
class ScalingTests(SimpleTestCase):
    """Empirical complexity: construction ~ N*L, distances ~ nodes^3"""

    @staticmethod
    def _best_of(fn, repeats=3) -> float:
        timings = []
        for _ in range(repeats):
            start = time.perf_counter()
            fn()
            timings.append(time.perf_counter() - start)
        return min(timings)

    @staticmethod
    def _slope(sizes, timings) -> float:
        return float(np.polyfit(np.log(sizes), np.log(timings), 1)[0])

    def test_construction_linear(self):
        ontology = load_ontology_file(EXAMPLE)
        params = GraphParams()
        rng = random.Random(1)
        class_ids = [c.id for c in ontology.classes]
        sizes, timings = [], []
        for n_users in (500, 1000, 2000, 4000):
            profiles = [
                profile(
                    f"u{i}",
                    *(
                        SimilarityReport(f"r{i}-{j}", class_scores=((rng.choice(class_ids), 0.8),))
                        for j in range(4)
                    ),
                )
                for i in range(n_users)
            ]
            sizes.append(n_users * 4)
            timings.append(
                self._best_of(lambda p=profiles: build_user_ontology_graph(p, ontology, params))
            )
        self.assertAlmostEqual(self._slope(sizes, timings), 1.0, delta=0.4)

    def test_distances_cubic(self):
        # below ~100 nodes the per-pivot numpy call overhead dominates
        sizes, timings = [], []
        for n in (100, 200, 400, 800):
            graph = random_graph(random.Random(n), n, 0.05)
            sizes.append(n)
            timings.append(self._best_of(lambda g=graph: all_pairs_user_distances(g)))
        self.assertAlmostEqual(self._slope(sizes, timings), 3.0, delta=0.4)
