# clustering/tests.py
import json
import math
import random
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from graphs.models import GraphParams, UserProfile
from graphs.services.builder import build_user_ontology_graph
from graphs.services.floyd import DistanceTable, all_pairs_user_distances
from matching.models import SimilarityReport
from ontology.loader import load_ontology_file
from ontology.models import Ontology, OntologyClass

from .exceptions import InvalidSweepGridError, InvalidThresholdError, ReplayMismatchError
from .serializers import ClusteringDocument, dump_clustering, load_clustering
from .services.agglomerative import (
    Cluster,
    Clustering,
    MassDefinition,
    MergeStep,
    cluster_mass,
    cluster_users,
)
from .services.sweep import SweepGrid, find_plateau, run_sweep

EXAMPLES = Path(settings.BASE_DIR) / "docs" / "examples"
EPS = 0.001


def table(users, matrix) -> DistanceTable:
    return DistanceTable(users, np.array(matrix, dtype=float))


def random_table(rng: random.Random, n: int, density: float) -> DistanceTable:
    users = [f"u{i:02d}" for i in range(n)]
    matrix = np.full((n, n), np.inf)
    np.fill_diagonal(matrix, 0.0)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                matrix[i, j] = matrix[j, i] = rng.uniform(EPS, 1.0)
    return DistanceTable(users, matrix)


def two_class_corpus() -> tuple[Ontology, list[UserProfile]]:
    """Classes A and B joined by one CC arc; two exact users on each."""
    ontology = Ontology(
        classes=(OntologyClass("A", "Alpha"), OntologyClass("B", "Beta", parent="A"))
    )
    profiles = [
        UserProfile(uid, reports=(SimilarityReport(f"r-{uid}", class_scores=((cid, 1.0),)),))
        for uid, cid in (("u1", "A"), ("u2", "A"), ("u3", "B"), ("u4", "B"))
    ]
    return ontology, profiles


class ClusterUsersTests(SimpleTestCase):
    """Mass-bounded merging"""

    def test_hand_trace(self):
        g2 = table(["u1", "u2", "u3"], [[0, 0.1, 0.6], [0.1, 0, 0.5], [0.6, 0.5, 0]])
        result = cluster_users(g2, 0.3)
        self.assertEqual(
            list(result.clusters),
            [Cluster(frozenset({"u1", "u2"}), 0.1), Cluster(frozenset({"u3"}), 0.0)],
        )
        self.assertEqual(result.merge_log, (MergeStep("u1", "u2", 0.1, 0.1),))

    def test_hand_trace_without_third_arc(self):
        inf = math.inf
        g2 = table(["u1", "u2", "u3"], [[0, 0.1, inf], [0.1, 0, 0.5], [inf, 0.5, 0]])
        result = cluster_users(g2, 0.2)
        self.assertEqual([c.sorted_members() for c in result.clusters], [["u1", "u2"], ["u3"]])
        self.assertEqual(result.masses, [0.1, 0.0])

    def test_mass_accumulates(self):
        """A third user joins when arc + both masses still fit"""
        g2 = table(["u1", "u2", "u3"], [[0, 0.1, 0.6], [0.1, 0, 0.5], [0.6, 0.5, 0]])
        result = cluster_users(g2, 0.7)
        self.assertEqual(len(result), 1)
        self.assertAlmostEqual(result.clusters[0].mass, 0.6)

    def test_threshold_must_be_positive(self):
        g2 = table(["u1"], [[0]])
        for bad in (0, -1.0, math.nan):
            with self.assertRaisesMessage(InvalidThresholdError, "d_max > 0"):
                cluster_users(g2, bad)

    def test_below_epsilon_all_singletons(self):
        ontology, profiles = two_class_corpus()
        g2 = all_pairs_user_distances(
            build_user_ontology_graph(profiles, ontology, GraphParams(epsilon=EPS))
        )
        result = cluster_users(g2, EPS / 2)
        self.assertEqual(len(result), 4)
        self.assertEqual(result.merge_log, ())
        self.assertTrue(all(c.mass == 0 for c in result.clusters))

    def test_empty_and_single(self):
        self.assertEqual(len(cluster_users(DistanceTable([], np.zeros((0, 0))), 1.0)), 0)
        result = cluster_users(table(["u1"], [[0]]), 1.0)
        self.assertEqual(list(result.clusters), [Cluster(frozenset({"u1"}), 0.0)])

    def test_disconnected_never_merge(self):
        g2 = table(["u1", "u2"], [[0, math.inf], [math.inf, 0]])
        self.assertEqual(len(cluster_users(g2, 1e9)), 2)

    def test_ties_break_on_ids(self):
        g2 = table(
            ["a", "b", "c", "d"],
            [[0, 0.1, 9, 9], [0.1, 0, 9, 9], [9, 9, 0, 0.1], [9, 9, 0.1, 0]],
        )
        result = cluster_users(g2, 0.1)
        self.assertEqual([(s.left, s.right) for s in result.merge_log], [("a", "b"), ("c", "d")])
        self.assertEqual([c.representative for c in result.clusters], ["a", "c"])

    def test_random_instances(self):
        """10k random tables: masses bounded, clusters partition the users, log replays"""
        rng = random.Random(2024)
        for _ in range(10_000):
            g2 = random_table(rng, rng.randint(1, 30), rng.uniform(0.05, 0.6))
            d_max = rng.uniform(EPS, 2.0)
            result = cluster_users(g2, d_max)

            self.assertTrue(all(c.mass <= d_max for c in result.clusters))
            self.assertEqual(result.users, sorted(g2.users))
            self.assertEqual(sum(len(c) for c in result.clusters), len(g2))
            self.assertEqual(len(result.merge_log), len(g2) - len(result))
            result.verify_replay()

    def test_deterministic_and_order_independent(self):
        rng = random.Random(11)
        for _ in range(50):
            g2 = random_table(rng, 15, 0.3)
            perm = list(range(len(g2)))
            rng.shuffle(perm)
            shuffled = DistanceTable(
                [g2.users[i] for i in perm], g2.distances[np.ix_(perm, perm)]
            )
            first = cluster_users(g2, 0.8)
            self.assertEqual(cluster_users(g2, 0.8), first)
            self.assertEqual(cluster_users(shuffled, 0.8), first)

    def test_larger_threshold_coarsens(self):
        rng = random.Random(5)
        for _ in range(100):
            g2 = random_table(rng, 20, 0.3)
            small, large = sorted(rng.uniform(EPS, 2.0) for _ in range(2))
            fine = cluster_users(g2, small)
            coarse = cluster_users(g2, large)
            self.assertGreaterEqual(len(fine), len(coarse))
            for cluster in fine.clusters:
                self.assertTrue(cluster.members <= coarse.cluster_of(cluster.representative).members)


class ClusterMassTests(SimpleTestCase):
    def test_singleton_and_pair(self):
        g2 = table(["u1", "u2", "u3"], [[0, 0.1, 0.6], [0.1, 0, 0.5], [0.6, 0.5, 0]])
        self.assertEqual(cluster_mass(Cluster(frozenset({"u3"})), g2), 0.0)
        pair = Cluster(frozenset({"u1", "u2"}))
        self.assertAlmostEqual(cluster_mass(pair, g2), 0.1)
        self.assertAlmostEqual(cluster_mass(pair, g2, MassDefinition.ARC_SUM), 0.1)

    def test_triple_via_recurrence(self):
        g2 = table(["u1", "u2", "u3"], [[0, 0.1, 0.3], [0.1, 0, 0.2], [0.3, 0.2, 0]])
        everyone = Cluster(frozenset({"u1", "u2", "u3"}))
        self.assertAlmostEqual(cluster_mass(everyone, g2), 0.3)
        result = cluster_users(g2, 0.35)
        self.assertEqual(len(result), 1)
        self.assertAlmostEqual(result.masses[0], 0.3)

    def test_triple_definitions_differ(self):
        g2 = table(["u1", "u2", "u3"], [[0, 0.1, 0.6], [0.1, 0, 0.5], [0.6, 0.5, 0]])
        everyone = Cluster(frozenset({"u1", "u2", "u3"}))
        self.assertAlmostEqual(cluster_mass(everyone, g2), 0.6)
        self.assertAlmostEqual(cluster_mass(everyone, g2, MassDefinition.ARC_SUM), 1.2)

    def test_recomputed_mass_matches_accumulated(self):
        rng = random.Random(17)
        for _ in range(300):
            g2 = random_table(rng, rng.randint(2, 20), 0.4)
            result = cluster_users(g2, rng.uniform(0.1, 2.0))
            for cluster in result.clusters:
                self.assertAlmostEqual(cluster_mass(cluster, g2), cluster.mass, delta=1e-9)
                self.assertGreaterEqual(
                    cluster_mass(cluster, g2, MassDefinition.ARC_SUM) + 1e-9, cluster.mass
                )


class ReplayTests(SimpleTestCase):
    def test_tampered_log_detected(self):
        g2 = table(["u1", "u2", "u3"], [[0, 0.1, 0.6], [0.1, 0, 0.5], [0.6, 0.5, 0]])
        result = cluster_users(g2, 0.3)
        tampered = Clustering(result.clusters, (MergeStep("u1", "u3", 0.6, 0.6),), result.d_max)
        with self.assertRaises(ReplayMismatchError):
            tampered.verify_replay()

    def test_retired_cluster_detected(self):
        broken = Clustering(
            (Cluster(frozenset({"u1", "u2"}), 0.1),),
            (MergeStep("u1", "u2", 0.1, 0.1), MergeStep("u2", "u1", 0.1, 0.2)),
            0.3,
        )
        with self.assertRaises(ReplayMismatchError):
            broken.replay()


class PlateauTests(SimpleTestCase):
    """find_plateau"""

    def curve(self, counts):
        return [(float(i), c) for i, c in enumerate(counts, start=1)]

    def test_single_plateau(self):
        plateaus = find_plateau(self.curve([5, 5, 2, 2, 2, 1]), n_users=5)
        self.assertEqual(len(plateaus), 1)
        self.assertEqual(
            (plateaus[0].d_max_start, plateaus[0].d_max_end, plateaus[0].cluster_count),
            (3.0, 5.0, 2),
        )
        self.assertEqual(plateaus[0].width, 2.0)

    def test_strictly_decreasing(self):
        self.assertEqual(find_plateau(self.curve([5, 4, 3, 2, 1]), n_users=5), [])

    def test_constant_one(self):
        self.assertEqual(find_plateau(self.curve([1, 1, 1])), [])

    def test_upper_defaults_to_largest_count(self):
        plateaus = find_plateau(self.curve([6, 6, 3, 3, 1]))
        self.assertEqual([p.cluster_count for p in plateaus], [3])

    def test_empty(self):
        self.assertEqual(find_plateau([]), [])


class SweepGridTests(SimpleTestCase):
    def test_invalid_grids(self):
        for kwargs in (
            {"d_max_values": (), "cc_weight_values": (0.2,)},
            {"d_max_values": (0.1, 0.1), "cc_weight_values": (0.2,)},
            {"d_max_values": (0.2, 0.1), "cc_weight_values": (0.2,)},
            {"d_max_values": (0.0, 0.1), "cc_weight_values": (0.2,)},
            {"d_max_values": (0.1,), "cc_weight_values": ()},
            {"d_max_values": (0.1,), "cc_weight_values": (1.0,)},
            {"d_max_values": (0.1,), "cc_weight_values": (0.0001,)},
        ):
            with self.subTest(**kwargs), self.assertRaises(InvalidSweepGridError):
                SweepGrid(**kwargs)

    def test_defaults(self):
        grid = SweepGrid.from_settings()
        self.assertEqual(len(grid.d_max_values), 30)
        self.assertAlmostEqual(grid.d_max_values[0], settings.CLUSTERING_EPSILON / 2)
        self.assertAlmostEqual(grid.d_max_values[-1], 2 * settings.CLUSTERING_D_MAX)
        self.assertEqual(grid.cc_weight_values[0], settings.CLUSTERING_EPSILON)


class SweepTests(SimpleTestCase):
    """Cluster count over D_max and CC_weight"""

    GRID = (0.0005, 0.001, 0.0025, 0.005, 0.01, 0.05, 0.1, 0.3, 0.6)

    def test_lighter_ontology_arcs_shrink_plateau(self):
        ontology, profiles = two_class_corpus()
        grid = SweepGrid(self.GRID, (EPS, 0.2), ca_weight=0.2, epsilon=EPS)
        result = run_sweep(profiles, ontology, grid, workers=2)

        self.assertEqual(
            [c for _, c in result.curve(0.2)], [4, 4, 2, 2, 2, 2, 2, 1, 1]
        )
        self.assertEqual([c for _, c in result.curve(EPS)], [4, 4, 2, 2, 1, 1, 1, 1, 1])
        wide, narrow = result.widest_plateau(0.2), result.widest_plateau(EPS)
        self.assertEqual((wide.d_max_start, wide.d_max_end, wide.cluster_count), (0.0025, 0.1, 2))
        self.assertEqual((narrow.d_max_start, narrow.d_max_end), (0.0025, 0.005))
        self.assertGreater(wide.width, narrow.width)

    def test_random_corpus_curves(self):
        ontology = load_ontology_file(EXAMPLES / "handling_ontology.json")
        class_ids = [c.id for c in ontology.classes]
        rng = random.Random(20)
        profiles = [
            UserProfile(
                f"u{i:02d}",
                reports=tuple(
                    SimilarityReport(
                        f"r{i}-{j}", class_scores=((rng.choice(class_ids), rng.uniform(0.3, 1.0)),)
                    )
                    for j in range(rng.randint(1, 3))
                ),
            )
            for i in range(20)
        ]
        d_max_values = (0.0005, 0.002, 0.005, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 100.0)
        grid = SweepGrid(d_max_values, (EPS, 0.1, 0.2, 0.5), ca_weight=0.2, epsilon=EPS)
        result = run_sweep(profiles, ontology, grid, workers=4)

        for cc_weight in grid.cc_weight_values:
            counts = [c for _, c in result.curve(cc_weight)]
            self.assertEqual(counts[0], 20)
            self.assertEqual(counts[-1], 1)
            self.assertEqual(counts, sorted(counts, reverse=True))
            for plateau in result.plateaus[cc_weight]:
                self.assertTrue(1 < plateau.cluster_count < 20)

            g2 = all_pairs_user_distances(
                build_user_ontology_graph(profiles, ontology, grid.params_for(cc_weight))
            )
            direct = [len(cluster_users(g2, d)) for d in d_max_values]
            self.assertEqual(counts, direct)

    def test_terminal_count_is_component_count(self):
        """Two disjoint subtrees plus users without hits never collapse to one cluster"""
        ontology = Ontology(
            classes=(
                OntologyClass("A", "Alpha"),
                OntologyClass("A1", "Alpha one", parent="A"),
                OntologyClass("A2", "Alpha two", parent="A"),
                OntologyClass("B", "Beta"),
                OntologyClass("B1", "Beta one", parent="B"),
                OntologyClass("B2", "Beta two", parent="B"),
            )
        )
        trees = {"A": ["A", "A1", "A2"], "B": ["B", "B1", "B2"]}
        d_max_values = (0.0005, 0.01, 0.1, 1.0, 10.0, 1e6)
        grid = SweepGrid(d_max_values, (EPS, 0.2, 0.5), ca_weight=0.2, epsilon=EPS)

        for seed in range(10):
            rng = random.Random(seed)
            profiles = []
            for i in range(20):
                tree = "A" if i == 0 else "B" if i == 1 else rng.choice("AB")
                reports = tuple(
                    SimilarityReport(
                        f"r{i}-{j}",
                        class_scores=((rng.choice(trees[tree]), rng.uniform(0.3, 1.0)),),
                    )
                    for j in range(rng.randint(1, 3))
                )
                profiles.append(UserProfile(f"u{i:02d}", reports=reports))
            for i in range(rng.randint(0, 4)):
                profiles.append(UserProfile(f"x{i}"))

            result = run_sweep(profiles, ontology, grid, workers=2)
            for cc_weight in grid.cc_weight_values:
                g2 = all_pairs_user_distances(
                    build_user_ontology_graph(profiles, ontology, grid.params_for(cc_weight))
                )
                components = g2.component_count()
                self.assertEqual(components, 2 + len(profiles) - 20)
                counts = [c for _, c in result.curve(cc_weight)]
                self.assertEqual(counts[-1], components)
                self.assertEqual(counts[0], len(profiles))

    def test_epsilon_plateau_narrower_on_random_corpora(self):
        """Exact single-request users spread over sibling classes"""
        leaves = [OntologyClass(f"L{k}", f"Leaf {k}", parent="R") for k in range(5)]
        ontology = Ontology(classes=(OntologyClass("R", "Root"), *leaves))
        d_max_values = (0.0005, 0.001, 0.003, 0.01, 0.02, 0.05, 0.1, 0.3, 1.0, 1e6)
        grid = SweepGrid(d_max_values, (EPS, 0.2), ca_weight=0.2, epsilon=EPS)

        for seed in range(10):
            rng = random.Random(100 + seed)
            classes = [leaf.id for leaf in leaves[: rng.randint(2, 5)]]
            assigned = classes[:2] + [rng.choice(classes) for _ in range(18)]
            profiles = [
                UserProfile(f"u{i:02d}", reports=(SimilarityReport(f"r{i}", class_scores=((cid, 1.0),)),))
                for i, cid in enumerate(assigned)
            ]
            result = run_sweep(profiles, ontology, grid)

            wide = result.widest_plateau(0.2)
            self.assertIsNotNone(wide)
            self.assertEqual(wide.cluster_count, len(set(assigned)))
            self.assertLessEqual(wide.d_max_start, 0.05)
            self.assertGreaterEqual(wide.d_max_end, 0.3)
            narrow = result.widest_plateau(EPS)
            if narrow is not None:
                self.assertLess(narrow.width, wide.width)

    def test_single_user(self):
        ontology, profiles = two_class_corpus()
        grid = SweepGrid((0.01, 0.1, 1.0), (0.2,))
        result = run_sweep(profiles[:1], ontology, grid)
        self.assertEqual([c for _, c in result.curve(0.2)], [1, 1, 1])
        self.assertIsNone(result.widest_plateau(0.2))
        self.assertIn("# plateau cc_weight=0.2 none\n", result.to_csv())

    def test_csv_layout(self):
        ontology, profiles = two_class_corpus()
        grid = SweepGrid(self.GRID, (0.2,), epsilon=EPS)
        lines = run_sweep(profiles, ontology, grid).to_csv().splitlines()
        self.assertEqual(lines[0], "cc_weight,d_max,cluster_count")
        self.assertEqual(lines[1], "0.2,0.0005,4")
        self.assertEqual(lines[-1], "# plateau cc_weight=0.2 d_max=[0.0025, 0.1] cluster_count=2")


class SerializationTests(SimpleTestCase):
    def test_round_trip_byte_identical(self):
        ontology, profiles = two_class_corpus()
        g0 = build_user_ontology_graph(profiles, ontology, GraphParams(epsilon=EPS))
        clustering = cluster_users(all_pairs_user_distances(g0), 0.1)
        document = ClusteringDocument(clustering, params={"cc_weight": 0.2, "mode": "users"}, graph=g0)
        text = dump_clustering(document)
        again = load_clustering(text)
        self.assertEqual(dump_clustering(again), text)
        self.assertEqual(again.clustering, clustering)
        self.assertEqual(again.params, {"cc_weight": 0.2, "mode": "users"})
        again.clustering.verify_replay()

    def test_without_graph(self):
        clustering = cluster_users(table(["u1"], [[0]]), 0.1)
        text = dump_clustering(ClusteringDocument(clustering))
        self.assertNotIn('"graph"', text)
        self.assertIsNone(load_clustering(text).graph)


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.ontology = str(EXAMPLES / "handling_ontology.json")
        self.requests = str(EXAMPLES / "handling_requests.jsonl")

    def run_command(self, *args) -> str:
        stdout = StringIO()
        call_command(*args, stdout=stdout)
        return stdout.getvalue()


class ClusterCommandTests(CommandTestCase):
    """manage.py cluster"""

    def test_request_mode(self):
        out = self.run_command("cluster", self.ontology, self.requests, "--mode", "requests")
        self.assertIn("Clusters: 2 (5 requests, d_max=0.6)", out)
        self.assertIn("members=r3, r4, r5", out)
        self.assertIn("members=r1, r2", out)

    def test_requests_of_one_user(self):
        """Request mode restricted to a single user's history"""
        lines = Path(self.requests).read_text(encoding="utf-8").splitlines()
        records = [json.loads(line) for line in lines]
        for record in records:
            if record["request_id"] != "r2":
                record["user_id"] = "u9"
        log = self.dir / "history.jsonl"
        log.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")

        out = self.run_command(
            "cluster", self.ontology, str(log), "--mode", "requests", "--user", "u9"
        )
        self.assertIn("Clusters: 2 (4 requests, d_max=0.6)", out)
        self.assertIn("members=r3, r4, r5\n", out)
        self.assertIn("mass=0.0000 members=r1\n", out)
        self.assertNotIn("r2", out)

        out = self.run_command("cluster", self.ontology, str(log), "--user", "u9")
        self.assertIn("Clusters: 1 (1 users", out)

    def test_user_mode_with_personal_data(self):
        out = self.run_command(
            "cluster",
            self.ontology,
            self.requests,
            "--profiles",
            str(EXAMPLES / "handling_profiles.json"),
        )
        self.assertIn("Clusters: 2 (5 users, d_max=0.6)", out)
        self.assertIn("members=u1, u2", out)

    def test_artifacts(self):
        paths = {name: self.dir / name for name in ("c.json", "c.dot", "g.json", "d.csv")}
        self.run_command(
            "cluster",
            self.ontology,
            self.requests,
            "--mode",
            "requests",
            "-o",
            str(paths["c.json"]),
            "--dot",
            str(paths["c.dot"]),
            "--graph-out",
            str(paths["g.json"]),
            "--distances-out",
            str(paths["d.csv"]),
        )
        document = load_clustering(paths["c.json"].read_text(encoding="utf-8"))
        self.assertEqual(document.params["mode"], "requests")
        self.assertEqual(len(document.clustering), 2)
        document.clustering.verify_replay()
        self.assertIn("cluster_1", paths["c.dot"].read_text(encoding="utf-8"))
        graph = json.loads(paths["g.json"].read_text(encoding="utf-8"))
        self.assertEqual(graph["artifact"], "user_ontology_graph")
        distances = DistanceTable.from_csv(paths["d.csv"].read_text(encoding="utf-8"))
        self.assertEqual(distances.users, ("r1", "r2", "r3", "r4", "r5"))

    def test_zero_threshold_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("cluster", self.ontology, self.requests, "--d-max", "0")
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("d_max > 0", str(ctx.exception))

    def test_single_user_log(self):
        log = self.dir / "one.jsonl"
        log.write_text(
            Path(self.requests).read_text(encoding="utf-8").splitlines()[0] + "\n",
            encoding="utf-8",
        )
        out = self.run_command("cluster", self.ontology, str(log))
        self.assertIn("Clusters: 1 (1 users", out)
        self.assertIn("mass=0.0000 members=u1", out)

    def test_config_file_and_flag_precedence(self):
        config = self.dir / "clustering.env"
        config.write_text("D_MAX=0.0015\nMODE=requests\n", encoding="utf-8")
        out = self.run_command("cluster", self.ontology, self.requests, "--config", str(config))
        self.assertIn("Clusters: 5 (5 requests, d_max=0.0015)", out)
        out = self.run_command(
            "cluster", self.ontology, self.requests, "--config", str(config), "--d-max", "0.6"
        )
        self.assertIn("Clusters: 2 (5 requests, d_max=0.6)", out)

    def test_missing_requests(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command("cluster", self.ontology, str(self.dir / "none.jsonl"))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("requests not found", str(ctx.exception))


class SweepCommandTests(CommandTestCase):
    """manage.py sweep"""

    def test_csv_written(self):
        out_path = self.dir / "sweep.csv"
        out = self.run_command(
            "sweep",
            self.ontology,
            self.requests,
            "--mode",
            "requests",
            "--d-max-values",
            "0.0005,0.0025,0.1,0.3,0.9",
            "--cc-weights",
            "eps,0.2",
            "--workers",
            "2",
            "-o",
            str(out_path),
        )
        lines = out_path.read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "cc_weight,d_max,cluster_count")
        self.assertIn("0.001,0.0005,5", lines)
        self.assertIn("0.2,0.0005,5", lines)
        self.assertEqual(len([ln for ln in lines if not ln.startswith("#")]), 11)
        self.assertTrue(any(ln.startswith("# plateau cc_weight=0.2 ") for ln in lines))
        self.assertIn("Swept 5 x 2 grid over 5 requests", out)

    def test_unsorted_grid_is_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_command(
                "sweep", self.ontology, self.requests, "--d-max-values", "0.5,0.1"
            )
        self.assertEqual(ctx.exception.returncode, 2)


class ExportDotCommandTests(CommandTestCase):
    """manage.py export_dot"""

    def cluster_to(self, name: str, *extra) -> Path:
        path = self.dir / name
        self.run_command(
            "cluster", self.ontology, self.requests, "--mode", "requests", "-o", str(path), *extra
        )
        return path

    def test_clustering_with_graph(self):
        dot = self.run_command("export_dot", str(self.cluster_to("c.json")))
        self.assertIn("cluster_0", dot)
        self.assertIn("cluster_1", dot)
        self.assertIn("shape=ellipse", dot)

    def test_clustering_without_graph(self):
        dot = self.run_command("export_dot", str(self.cluster_to("c.json", "--no-graph")))
        self.assertIn("cluster_1", dot)
        self.assertNotIn("ellipse", dot)
        self.assertEqual(dot.count("shape=box"), 5)

    def test_distance_csv(self):
        csv_path = self.dir / "d.csv"
        self.cluster_to("c.json", "--distances-out", str(csv_path))
        out_path = self.dir / "d.dot"
        self.run_command("export_dot", str(csv_path), "-o", str(out_path))
        dot = out_path.read_text(encoding="utf-8")
        self.assertIn("graph user_distances", dot)
        self.assertEqual(dot.count(" -- "), 10)

    def test_unknown_artifact(self):
        path = self.dir / "other.json"
        path.write_text('{"artifact": "something"}', encoding="utf-8")
        with self.assertRaises(CommandError) as ctx:
            self.run_command("export_dot", str(path))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("unknown artifact", str(ctx.exception))
