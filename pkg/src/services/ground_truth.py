"""Exact properties of a fully loaded hypergraph and the error metrics against them."""

import logging
from collections.abc import Mapping

import numpy as np

from src.exceptions import ZeroTruth
from src.models.hypergraph import Hypergraph
from src.models.schemas import HypergraphStats

logger = logging.getLogger(__name__)

SCALAR_PROPERTIES = ("avg-degree", "avg-size")
DISTRIBUTION_PROPERTIES = ("degree-pmf", "size-pmf", "degree-ccdf", "size-ccdf")
PROPERTIES = SCALAR_PROPERTIES + DISTRIBUTION_PROPERTIES


def _pmf(values: np.ndarray) -> dict[int, float]:
    support, counts = np.unique(values, return_counts=True)
    return {int(v): float(c) / values.size for v, c in zip(support, counts, strict=True)}


def _ccdf(values: np.ndarray) -> dict[int, float]:
    support = np.unique(values)
    return {int(v): float(np.count_nonzero(values >= v)) / values.size for v in support}


def ground_truth(hypergraph: Hypergraph, prop: str) -> float | dict[int, float]:
    """Exact value of a property by enumeration over every node or hyperedge."""
    if prop not in PROPERTIES:
        raise ValueError(f"Unknown property: {prop}")
    values = hypergraph.degrees if "degree" in prop else hypergraph.sizes
    if prop in SCALAR_PROPERTIES:
        return float(values.mean())
    if prop.endswith("-pmf"):
        return _pmf(values)
    return _ccdf(values)


def error_metric(
    kind: str,
    estimate: float | Mapping[int, float],
    truth: float | Mapping[int, float],
) -> float:
    """
    Relative error |x_hat - x| / x for scalars, L1 distance for distributions.

    Distributions are compared over the union of both supports; a value missing
    on one side counts as probability 0.

    Raises:
        ZeroTruth: relative error against a zero true value.
    """
    if kind == "relative":
        if truth == 0:
            raise ZeroTruth()
        return abs(float(estimate) - float(truth)) / abs(float(truth))
    if kind == "l1":
        support = set(estimate) | set(truth)
        return float(sum(abs(estimate.get(v, 0.0) - truth.get(v, 0.0)) for v in support))
    raise ValueError(f"Unknown error metric: {kind}")


def metric_kind(prop: str) -> str:
    return "relative" if prop in SCALAR_PROPERTIES else "l1"


def describe(hypergraph: Hypergraph) -> HypergraphStats:
    """n, m, mean/max degree, P(d = 1), mean/max size plus D and connectivity."""
    degrees = hypergraph.degrees
    sizes = hypergraph.sizes
    components = len(hypergraph.components())
    return HypergraphStats(
        n=hypergraph.node_count,
        m=hypergraph.hyperedge_count,
        incidences=hypergraph.incidence_count,
        mean_degree=float(degrees.mean()),
        max_degree=int(degrees.max()),
        degree_one_fraction=float(np.count_nonzero(degrees == 1)) / degrees.size,
        mean_size=float(sizes.mean()),
        max_size=int(sizes.max()),
        connected=components == 1,
        components=components,
    )
