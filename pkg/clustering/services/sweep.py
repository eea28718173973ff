# clustering/services/sweep.py
"""
Cluster count as a function of D_max and CC_weight.

The user-ontology graph is built once; each CC_weight only rewrites the
ontology arcs before the distance table is recomputed, and each D_max is a
fresh clustering over that table.
"""

import csv
import io
import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from clustering.exceptions import InvalidSweepGridError
from graphs.exceptions import InvalidGraphParamsError
from graphs.models import GraphParams, UserProfile
from graphs.services.builder import build_user_ontology_graph
from graphs.services.floyd import all_pairs_user_distances
from ontology.models import Ontology

from .agglomerative import cluster_users

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 30


def _fmt(value: float) -> str:
    return format(value, ".6g")


@dataclass(frozen=True)
class SweepGrid:
    d_max_values: tuple[float, ...]
    cc_weight_values: tuple[float, ...]
    ca_weight: float = 0.2
    epsilon: float = 0.001

    def __post_init__(self):
        if not self.d_max_values:
            raise InvalidSweepGridError("At least one d_max value is required")
        if any(not d > 0 for d in self.d_max_values):
            raise InvalidSweepGridError("Every d_max value must be > 0")
        if any(b <= a for a, b in zip(self.d_max_values, self.d_max_values[1:])):
            raise InvalidSweepGridError("d_max values must be strictly ascending")
        if not self.cc_weight_values:
            raise InvalidSweepGridError("At least one cc_weight value is required")
        for cc_weight in self.cc_weight_values:
            try:
                self.params_for(cc_weight)
            except InvalidGraphParamsError as exc:
                raise InvalidSweepGridError(str(exc)) from exc

    def params_for(self, cc_weight: float) -> GraphParams:
        return GraphParams(cc_weight=cc_weight, ca_weight=self.ca_weight, epsilon=self.epsilon)

    @classmethod
    def from_settings(
        cls,
        d_max_values: Sequence[float] | None = None,
        cc_weight_values: Sequence[float] | None = None,
        ca_weight: float | None = None,
        epsilon: float | None = None,
    ) -> "SweepGrid":
        """
        Fill gaps from settings. The default D_max axis is log-spaced from
        epsilon / 2 (every user alone) up to 2 * CLUSTERING_D_MAX.
        """
        eps = epsilon if epsilon is not None else settings.CLUSTERING_EPSILON
        if d_max_values is None:
            d_max_values = np.geomspace(eps / 2, 2 * settings.CLUSTERING_D_MAX, DEFAULT_GRID_POINTS)
        if cc_weight_values is None:
            cc_weight_values = (eps, 0.1, 0.2, 0.5)
        return cls(
            d_max_values=tuple(float(d) for d in d_max_values),
            cc_weight_values=tuple(float(c) for c in cc_weight_values),
            ca_weight=ca_weight if ca_weight is not None else settings.CLUSTERING_CA_WEIGHT,
            epsilon=eps,
        )


@dataclass(frozen=True)
class SweepRow:
    cc_weight: float
    d_max: float
    cluster_count: int


@dataclass(frozen=True)
class Plateau:
    """Maximal d_max interval with a constant multi-cluster count."""

    d_max_start: float
    d_max_end: float
    cluster_count: int

    @property
    def width(self) -> float:
        return self.d_max_end - self.d_max_start


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    plateaus: dict[float, list[Plateau]] = field(default_factory=dict)

    def curve(self, cc_weight: float) -> list[tuple[float, int]]:
        return [(r.d_max, r.cluster_count) for r in self.rows if r.cc_weight == cc_weight]

    def widest_plateau(self, cc_weight: float) -> Plateau | None:
        return max(self.plateaus.get(cc_weight, []), key=lambda p: p.width, default=None)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["cc_weight", "d_max", "cluster_count"])
        for row in self.rows:
            writer.writerow([_fmt(row.cc_weight), _fmt(row.d_max), row.cluster_count])
        for cc_weight, plateaus in self.plateaus.items():
            if not plateaus:
                buffer.write(f"# plateau cc_weight={_fmt(cc_weight)} none\n")
            for p in plateaus:
                buffer.write(
                    f"# plateau cc_weight={_fmt(cc_weight)} "
                    f"d_max=[{_fmt(p.d_max_start)}, {_fmt(p.d_max_end)}] "
                    f"cluster_count={p.cluster_count}\n"
                )
        return buffer.getvalue()


def find_plateau(curve: Sequence[tuple[float, int]], n_users: int | None = None) -> list[Plateau]:
    """
    Runs of at least two consecutive grid points sharing a count with
    1 < count < n_users. Without n_users the largest count on the curve
    stands in for it.
    """
    if not curve:
        return []
    upper = n_users if n_users is not None else max(count for _, count in curve)

    plateaus: list[Plateau] = []
    start = 0
    for i in range(1, len(curve) + 1):
        if i < len(curve) and curve[i][1] == curve[start][1]:
            continue
        count = curve[start][1]
        if i - start >= 2 and 1 < count < upper:
            plateaus.append(Plateau(curve[start][0], curve[i - 1][0], count))
        start = i
    return plateaus


def run_sweep(
    profiles: Sequence[UserProfile],
    ontology: Ontology,
    grid: SweepGrid,
    workers: int | None = None,
) -> SweepResult:
    workers = workers or getattr(settings, "SWEEP_WORKERS", 1)
    base = build_user_ontology_graph(profiles, ontology, grid.params_for(grid.cc_weight_values[0]))
    n_users = len(base.users)
    result = SweepResult()

    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        for cc_weight in grid.cc_weight_values:
            g2 = all_pairs_user_distances(base.reweighted(grid.params_for(cc_weight)))
            counts = list(executor.map(lambda d: len(cluster_users(g2, d)), grid.d_max_values))
            curve = list(zip(grid.d_max_values, counts))
            result.rows.extend(SweepRow(cc_weight, d, c) for d, c in curve)
            result.plateaus[cc_weight] = find_plateau(curve, n_users)
            logger.info(
                f"Sweep cc_weight={cc_weight}: counts {counts[0]}..{counts[-1]}, "
                f"{len(result.plateaus[cc_weight])} plateau(s)"
            )
    return result
