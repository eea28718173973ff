from django.conf import settings

from clustering.services.sweep import SweepGrid, run_sweep
from config.commands import PipelineCommand, parse_float_list


class Command(PipelineCommand):
    help = "Count clusters over a grid of D_max and CC_weight values and report plateaus"

    def add_command_arguments(self, parser):
        self.add_profile_arguments(parser)
        parser.add_argument(
            "--d-max-values",
            help="Comma-separated ascending D_max values (default: log-spaced up to 2 x D_MAX)",
        )
        parser.add_argument(
            "--cc-weights",
            help='Comma-separated CC_weight values, "eps" allowed (default: eps,0.1,0.2,0.5)',
        )
        parser.add_argument(
            "--workers",
            type=int,
            help=f"Threads evaluating grid points (default: {settings.SWEEP_WORKERS})",
        )
        parser.add_argument("-o", "--output", help="CSV output path (default: stdout)")

    def handle(self, *args, **options):
        ontology = self.load_ontology(options["ontology"])
        epsilon = self.option(options, "epsilon", settings.CLUSTERING_EPSILON, float)
        d_max_values = self.option(options, "d_max_values", None)
        cc_weights = self.option(options, "cc_weights", None)

        grid = SweepGrid.from_settings(
            d_max_values=parse_float_list(d_max_values, epsilon) if d_max_values else None,
            cc_weight_values=parse_float_list(cc_weights, epsilon) if cc_weights else None,
            ca_weight=self.option(options, "ca_weight", None, float),
            epsilon=epsilon,
        )
        profiles, mode = self.read_profiles(options, ontology)
        workers = self.option(options, "workers", settings.SWEEP_WORKERS, int)

        result = run_sweep(profiles, ontology, grid, workers=workers)
        self.write_output(options["output"], result.to_csv())

        if options["output"] not in (None, "-"):
            self.stdout.write(
                self.style.SUCCESS(
                    f"Swept {len(grid.d_max_values)} x {len(grid.cc_weight_values)} grid "
                    f"over {len(profiles)} {mode}"
                )
            )
            for cc_weight in grid.cc_weight_values:
                widest = result.widest_plateau(cc_weight)
                if widest is None:
                    self.stdout.write(f"cc_weight={cc_weight:g}: no plateau")
                else:
                    self.stdout.write(
                        f"cc_weight={cc_weight:g}: {widest.cluster_count} clusters for "
                        f"d_max in [{widest.d_max_start:g}, {widest.d_max_end:g}]"
                    )
