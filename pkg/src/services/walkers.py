"""Random walks on hypergraphs driven through a query oracle."""

import logging
from bisect import bisect_right
from collections.abc import Hashable, Sequence
from itertools import accumulate

import numpy as np

from src.exceptions import (
    BudgetExhausted,
    NotIncident,
    SequenceTooShort,
    UnknownNode,
    UnknownSeedNode,
)
from src.models.hypergraph import Hypergraph
from src.models.schemas import WalkConfig, WalkKind
from src.models.sequence import SampleSequence
from src.services.oracle import MemoizingOracle, QueryOracle
from src.services.rng import walk_generator

logger = logging.getLogger(__name__)

# Walks that must read every candidate's size before choosing a hyperedge
SIZE_WEIGHTED = frozenset({WalkKind.P_RW, WalkKind.C_RW})


def size_weight(walk_kind: WalkKind, size: int) -> float:
    """Unnormalized selection weight of a hyperedge of the given size."""
    if walk_kind is WalkKind.P_RW:
        return float(size - 1)
    if walk_kind is WalkKind.C_RW:
        return float((size - 1) ** 2)
    return 1.0


def hyperedge_weight(walk_kind: WalkKind, hypergraph: Hypergraph, i: int, alpha: int) -> float:
    """
    Selection weight of hyperedge alpha at node i.

    P-RW uses s - 1, C-RW uses (s - 1)^2 and the higher-order walks use the
    uniform weight 1 / d_i. Normalizing over the incident hyperedges of i gives
    the selection probability S_{i, alpha}.

    Raises:
        NotIncident: alpha does not contain i.
    """
    incident = hypergraph.incident(i)
    if alpha not in incident:
        raise NotIncident(i, alpha)
    if walk_kind in SIZE_WEIGHTED:
        return size_weight(walk_kind, hypergraph.size(alpha))
    return 1.0 / len(incident)


def selection_probabilities(
    walk_kind: WalkKind, hypergraph: Hypergraph, i: int
) -> dict[int, float]:
    """S_{i, alpha} for every hyperedge alpha incident to i (first step for NB-HO-RW)."""
    weights = {
        alpha: hyperedge_weight(walk_kind, hypergraph, i, alpha)
        for alpha in hypergraph.incident(i)
    }
    total = sum(weights.values())
    return {alpha: w / total for alpha, w in weights.items()}


def _uniform(rng: np.random.Generator, candidates: Sequence):
    if len(candidates) == 1:
        return candidates[0]
    return candidates[int(rng.integers(0, len(candidates)))]


def _weighted_index(rng: np.random.Generator, weights: Sequence[float]) -> int:
    if len(weights) == 1:
        return 0
    cumulative = list(accumulate(weights))
    u = rng.random() * cumulative[-1]
    return min(bisect_right(cumulative, u), len(weights) - 1)


def run_walk(
    oracle: QueryOracle,
    config: WalkConfig,
    rng: np.random.Generator | None = None,
) -> SampleSequence:
    """
    Run a walk of config.length steps from config.seed_node.

    Each step queries the current node, selects an incident hyperedge, queries
    it and moves to a uniformly chosen different member. HO-RW and NB-HO-RW
    query the chosen hyperedge only; P-RW and C-RW query every incident
    hyperedge to read its size. NB-HO-RW never selects the previous hyperedge
    unless the current node has degree 1.

    When the oracle budget runs out the partial step is dropped and the
    sequence is returned with truncated=True.

    Raises:
        UnknownSeedNode: the seed node does not exist.
    """
    rng = rng if rng is not None else walk_generator(config.rng_seed)
    kind = config.walk_kind

    try:
        current: Hashable = oracle.resolve_node(config.seed_node)
    except UnknownNode:
        raise UnknownSeedNode(config.seed_node) from None

    nodes: list[str] = []
    hyperedges: list[str] = []
    degrees: list[int] = []
    sizes: list[int] = []
    previous: Hashable | None = None
    truncated = False

    try:
        for k in range(config.length):
            try:
                incident = oracle.query_node(current)
            except UnknownNode:
                if k == 0:
                    raise UnknownSeedNode(config.seed_node) from None
                raise

            if kind in SIZE_WEIGHTED:
                candidates = [oracle.query_hyperedge(alpha) for alpha in incident]
                index = _weighted_index(rng, [size_weight(kind, len(m)) for m in candidates])
                chosen, members = incident[index], candidates[index]
            else:
                if kind is WalkKind.NB_HO_RW and previous is not None:
                    if len(incident) == 1:
                        chosen = previous
                    else:
                        chosen = _uniform(rng, [alpha for alpha in incident if alpha != previous])
                else:
                    chosen = _uniform(rng, incident)
                members = oracle.query_hyperedge(chosen)

            nodes.append(oracle.node_label(current))
            hyperedges.append(oracle.hyperedge_label(chosen))
            degrees.append(len(incident))
            sizes.append(len(members))
            previous = chosen

            if k + 1 < config.length:
                current = _uniform(rng, [j for j in members if j != current])
    except BudgetExhausted as e:
        truncated = True
        logger.warning(f"Walk truncated after {len(nodes)} of {config.length} steps: {e}")

    unique = oracle.unique_stats() if isinstance(oracle, MemoizingOracle) else None
    logger.debug(f"{kind} walk finished with {len(nodes)} steps")
    return SampleSequence(
        nodes=tuple(nodes),
        hyperedges=tuple(hyperedges),
        degrees=np.asarray(degrees, dtype=np.int64),
        sizes=np.asarray(sizes, dtype=np.int64),
        stats=oracle.snapshot_stats(),
        truncated=truncated,
        config=config,
        unique_stats=unique,
    )


def repetition_rate(seq: SampleSequence) -> float:
    """Fraction of consecutive steps sampling the same hyperedge."""
    return _adjacent_repeats(seq.hyperedges)


def node_repetition_rate(seq: SampleSequence) -> float:
    """Fraction of consecutive steps sampling the same node (zero for every walk here)."""
    return _adjacent_repeats(seq.nodes)


def _adjacent_repeats(labels: Sequence[str]) -> float:
    if len(labels) < 2:
        raise SequenceTooShort(len(labels))
    repeats = sum(1 for a, b in zip(labels, labels[1:], strict=False) if a == b)
    return repeats / (len(labels) - 1)


def random_seed_node(hypergraph: Hypergraph, rng: np.random.Generator) -> str:
    """A node label chosen uniformly at random."""
    return hypergraph.node_label(int(rng.integers(0, hypergraph.node_count)))
