"""Random connected hypergraphs for desk-scale experiments and tests."""

import logging
from bisect import bisect_right
from collections.abc import Mapping, Sequence

import numpy as np

from src.exceptions import InfeasibleParameters
from src.models.hypergraph import Hypergraph
from src.services.rng import walk_generator

logger = logging.getLogger(__name__)

# Node weights below this share of the total are never drawn as extra members
NEGLIGIBLE_WEIGHT = 1e-12


def _size_law(size_law: Sequence[int] | Mapping[int, float]) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(size_law, Mapping):
        sizes = np.array(list(size_law.keys()), dtype=np.int64)
        weights = np.array(list(size_law.values()), dtype=np.float64)
    else:
        sizes = np.array(list(size_law), dtype=np.int64)
        weights = np.ones(sizes.size)
    if sizes.size == 0 or np.any(sizes < 2):
        raise InfeasibleParameters("Hyperedge sizes must be at least 2")
    if np.any(weights < 0) or weights.sum() <= 0:
        raise InfeasibleParameters("Size law weights must be non-negative and not all zero")
    return sizes, weights / weights.sum()


def generate_random_hypergraph(
    n: int,
    m: int,
    size_law: Sequence[int] | Mapping[int, float] = (2, 3),
    degree_skew: float = 0.0,
    rng_seed: int = 0,
) -> Hypergraph:
    """
    Random connected hypergraph with m hyperedges over a pool of n nodes.

    Sizes are drawn from size_law, a list of sizes chosen uniformly or a
    size -> weight mapping. The first hyperedges absorb the node pool: every
    hyperedge after the first contains one already used node and fills the
    other slots with unused nodes while any remain, so the result is connected
    by construction. Remaining slots pick nodes with weight (rank + 1)^-skew;
    a large degree_skew leaves most nodes with degree 1 and concentrates the
    rest on a few hubs. When the drawn sizes cannot cover all n nodes the
    result has fewer nodes.

    Raises:
        InfeasibleParameters: no valid hyperedge can be formed, or the skew
            leaves too few nodes with usable weight to fill one.
    """
    if m < 1:
        raise InfeasibleParameters(f"m must be at least 1, got {m}")
    if degree_skew < 0:
        raise InfeasibleParameters(f"degree_skew must be non-negative, got {degree_skew}")
    sizes, probabilities = _size_law(size_law)
    if n < sizes.min():
        raise InfeasibleParameters(f"n={n} is smaller than every allowed size")
    keep = sizes <= n
    sizes, probabilities = sizes[keep], probabilities[keep] / probabilities[keep].sum()

    rng = walk_generator(rng_seed)
    drawn = rng.choice(sizes, size=m, p=probabilities)
    weights = (np.arange(n, dtype=np.float64) + 1.0) ** -degree_skew
    node_probabilities = weights / weights.sum()
    usable = np.flatnonzero(node_probabilities >= NEGLIGIBLE_WEIGHT)

    unused = [int(v) for v in rng.permutation(n)]
    used: list[int] = []
    used_cumulative: list[float] = []
    hyperedges: list[list[int]] = []
    for size in drawn:
        members: list[int] = []
        if used:
            u = rng.random() * used_cumulative[-1]
            members.append(used[min(bisect_right(used_cumulative, u), len(used) - 1)])
        while len(members) < size and unused:
            node = unused.pop()
            members.append(node)
            used.append(node)
            total = used_cumulative[-1] if used_cumulative else 0.0
            used_cumulative.append(total + weights[node])
        if len(members) < size:
            candidates = np.setdiff1d(usable, members)
            missing = int(size) - len(members)
            if candidates.size < missing:
                raise InfeasibleParameters(
                    f"degree_skew={degree_skew} leaves {usable.size} of {n} nodes with "
                    f"usable weight, too few for a hyperedge of size {size}"
                )
            p = node_probabilities[candidates]
            extra = rng.choice(candidates, size=missing, replace=False, p=p / p.sum())
            members.extend(int(v) for v in extra)
        hyperedges.append(members)

    hypergraph = Hypergraph.build([[str(v) for v in members] for members in hyperedges])
    if hypergraph.node_count < n:
        logger.debug(f"Drawn sizes covered {hypergraph.node_count} of {n} nodes")
    logger.info(f"Generated {hypergraph!r} with seed {rng_seed}")
    return hypergraph
