# graphs/services/weights.py

from collections.abc import Sequence

from graphs.exceptions import WeightDomainError


def request_arc_weight(similarity: float, epsilon: float) -> float:
    """Weight of one request's arc: 1 - sim, never below epsilon."""
    return max(epsilon, 1.0 - similarity)


def aggregate_arc_weight(sims: Sequence[float], n_max: int, epsilon: float = 0.001) -> float:
    """
    Combine the similarities of several requests of one user to one node.

    w = 1 - sum(1 - w_i) / n_max with w_i = max(eps, 1 - sim_i), floored at
    eps. More matching requests give a lighter (stronger) arc.
    """
    if n_max < 1:
        raise WeightDomainError(f"n_max must be a positive integer, got {n_max}")
    if len(sims) > n_max:
        raise WeightDomainError(f"{len(sims)} similarities exceed n_max={n_max}")
    if not sims:
        raise WeightDomainError("At least one similarity is required")
    for sim in sims:
        if not 0 < sim <= 1:
            raise WeightDomainError(f"Similarity must be in (0, 1], got {sim}")

    total = sum(1.0 - request_arc_weight(sim, epsilon) for sim in sims)
    return max(epsilon, 1.0 - total / n_max)
