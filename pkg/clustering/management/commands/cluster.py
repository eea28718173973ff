from django.conf import settings

from clustering.serializers import ClusteringDocument, dump_clustering
from clustering.services.agglomerative import MassDefinition, cluster_mass, cluster_users
from config.commands import PipelineCommand
from graphs.models import GraphParams
from graphs.services.builder import build_user_ontology_graph
from graphs.services.dot import graph_to_dot
from graphs.services.floyd import all_pairs_user_distances


class Command(PipelineCommand):
    help = "Cluster users (or requests) of a request log by their ontology footprint"

    def add_command_arguments(self, parser):
        self.add_profile_arguments(parser)
        parser.add_argument(
            "--d-max",
            type=float,
            help=f"Maximal cluster mass (default: {settings.CLUSTERING_D_MAX})",
        )
        parser.add_argument(
            "--cc-weight",
            type=float,
            help=f"Weight of class-class arcs (default: {settings.CLUSTERING_CC_WEIGHT})",
        )
        parser.add_argument("-o", "--output", help="Clustering JSON output path")
        parser.add_argument("--dot", help="Also write the graph with cluster boxes as DOT")
        parser.add_argument("--graph-out", help="Write the user-ontology graph as JSON")
        parser.add_argument("--distances-out", help="Write the user distance table as CSV")
        parser.add_argument(
            "--no-graph",
            action="store_true",
            help="Do not embed the user-ontology graph in the clustering JSON",
        )

    def handle(self, *args, **options):
        ontology = self.load_ontology(options["ontology"])
        params = GraphParams.from_settings(
            cc_weight=self.option(options, "cc_weight", None, float),
            ca_weight=self.option(options, "ca_weight", None, float),
            epsilon=self.option(options, "epsilon", None, float),
        )
        d_max = self.option(options, "d_max", settings.CLUSTERING_D_MAX, float)
        profiles, mode = self.read_profiles(options, ontology)

        g0 = build_user_ontology_graph(profiles, ontology, params)
        g2 = all_pairs_user_distances(g0)
        clustering = cluster_users(g2, d_max)

        document = ClusteringDocument(
            clustering=clustering,
            params={
                "cc_weight": params.cc_weight,
                "ca_weight": params.ca_weight,
                "epsilon": params.epsilon,
                "mode": mode,
            },
            graph=None if options["no_graph"] else g0,
        )
        if options["output"]:
            self.write_output(options["output"], dump_clustering(document))
        if options["graph_out"]:
            self.write_output(options["graph_out"], g0.to_json())
        if options["distances_out"]:
            self.write_output(options["distances_out"], g2.to_csv())
        if options["dot"]:
            boxes = [c.sorted_members() for c in clustering.clusters]
            self.write_output(options["dot"], graph_to_dot(g0, boxes))

        label = "requests" if mode == "requests" else "users"
        self.stdout.write(
            self.style.SUCCESS(f"Clusters: {len(clustering)} ({len(g2)} {label}, d_max={d_max})")
        )
        for idx, cluster in enumerate(clustering.clusters, start=1):
            self.stdout.write(
                f"  {idx}. mass={cluster.mass:.4f} "
                f"members={', '.join(cluster.sorted_members())}"
            )
            if options["verbosity"] > 1:
                arc_sum = cluster_mass(cluster, g2, MassDefinition.ARC_SUM)
                self.stdout.write(f"     sum of all internal arcs: {arc_sum:.4f}")
