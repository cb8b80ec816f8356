"""
Exact transition matrices of the walks on small hypergraphs.

The non-backtracking walk is a Markov chain on the incidence pairs (i, alpha)
rather than on nodes; P-RW, C-RW and HO-RW are Markov chains on nodes. This
module builds both kinds of matrices, solves for stationary laws and compares
them with empirical transition counts of simulated walks.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order, connected_components

from src.config import settings
from src.exceptions import InsufficientVisits, NoConvergence, TooLarge
from src.models.hypergraph import Hypergraph
from src.models.schemas import EmpiricalComparison, VerificationReport, WalkConfig, WalkKind
from src.services.oracle import InMemoryOracle
from src.services.rng import run_generator
from src.services.walkers import random_seed_node, run_walk, selection_probabilities

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StateSpace:
    """Incidence pairs (i, alpha) ordered lexicographically."""

    pairs: tuple[tuple[int, int], ...]
    labels: tuple[str, ...]
    index: dict[tuple[int, int], int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True, eq=False)
class ChainMatrix:
    """Row-stochastic sparse transition matrix with labels for its rows/columns."""

    matrix: sp.csr_matrix
    labels: tuple[str, ...]
    states: StateSpace | None = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def column_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=0)).ravel()

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def entry(self, row: str, col: str) -> float:
        """Transition probability between two labelled states."""
        return float(self.matrix[self.labels.index(row), self.labels.index(col)])


def state_label(hypergraph: Hypergraph, i: int, alpha: int) -> str:
    return f"{hypergraph.node_label(i)}:{hypergraph.hyperedge_label(alpha)}"


def build_state_space(hypergraph: Hypergraph, max_states: int | None = None) -> StateSpace:
    """
    Raises:
        TooLarge: D exceeds the analysis limit.
    """
    limit = max_states if max_states is not None else settings.analysis_max_states
    if hypergraph.incidence_count > limit:
        raise TooLarge(hypergraph.incidence_count, limit)
    pairs = tuple(hypergraph.incidence_pairs())
    return StateSpace(
        pairs=pairs,
        labels=tuple(state_label(hypergraph, i, alpha) for i, alpha in pairs),
        index={pair: s for s, pair in enumerate(pairs)},
    )


def build_nb_ho_matrix(hypergraph: Hypergraph, max_states: int | None = None) -> ChainMatrix:
    """
    Transition matrix U of the non-backtracking walk on incidence pairs.

    From (i, alpha) the walk moves to a member j != i of alpha with probability
    1 / (s_alpha - 1), then keeps alpha when d_j = 1 and otherwise picks one of
    the d_j - 1 other hyperedges of j uniformly.
    """
    if not hypergraph.is_connected():
        logger.warning(f"{hypergraph!r} is not connected; the chain is reducible")
    states = build_state_space(hypergraph, max_states)
    rows: list[int] = []
    cols: list[int] = []
    data: list[float] = []

    for s, (i, alpha) in enumerate(states.pairs):
        move = 1.0 / (hypergraph.size(alpha) - 1)
        for j in hypergraph.members(alpha):
            if j == i:
                continue
            d_j = hypergraph.degree(j)
            if d_j == 1:
                rows.append(s)
                cols.append(states.index[(j, alpha)])
                data.append(move)
                continue
            for beta in hypergraph.incident(j):
                if beta != alpha:
                    rows.append(s)
                    cols.append(states.index[(j, beta)])
                    data.append(move / (d_j - 1))

    size = len(states)
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(size, size))
    return ChainMatrix(matrix=matrix, labels=states.labels, states=states)


def build_node_matrix(hypergraph: Hypergraph, walk_kind: WalkKind) -> ChainMatrix:
    """
    Node transition matrix T of P-RW, C-RW or HO-RW.

    T_{i,j} = sum over alpha of S_{i,alpha} * b_{j,alpha} / (s_alpha - 1) for
    j != i, and T_{i,i} = 0.
    """
    if walk_kind is WalkKind.NB_HO_RW:
        raise ValueError("NB-HO-RW is not a Markov chain on nodes; use build_nb_ho_matrix")
    if not hypergraph.is_connected():
        logger.warning(f"{hypergraph!r} is not connected; the chain is reducible")

    n = hypergraph.node_count
    t = sp.lil_matrix((n, n), dtype=np.float64)
    for i in range(n):
        for alpha, s_prob in selection_probabilities(walk_kind, hypergraph, i).items():
            share = s_prob / (hypergraph.size(alpha) - 1)
            for j in hypergraph.members(alpha):
                if j != i:
                    t[i, j] += share
    return ChainMatrix(matrix=t.tocsr(), labels=hypergraph.node_labels)


# Structure of the chain


def is_irreducible(chain: ChainMatrix) -> bool:
    count, _ = connected_components(chain.matrix, directed=True, connection="strong")
    return count == 1


def period(chain: ChainMatrix) -> int:
    """
    Period of an irreducible chain.

    BFS levels from state 0 give every edge u -> v a shift level[u] + 1 - level[v];
    the period is the gcd of all shifts.
    """
    support = chain.matrix.copy()
    support.eliminate_zeros()
    order, predecessors = breadth_first_order(support, 0, directed=True)
    level = np.full(chain.size, -1, dtype=np.int64)
    level[0] = 0
    for v in order[1:]:
        level[v] = level[predecessors[v]] + 1
    if np.any(level < 0):
        raise ValueError("period is only defined for irreducible chains")

    coo = support.tocoo()
    shifts = np.abs(level[coo.row] + 1 - level[coo.col])
    return int(np.gcd.reduce(shifts)) if shifts.size else 0


def stationary_distribution(
    chain: ChainMatrix,
    tol: float = 1e-12,
    max_iters: int = 100_000,
    dense_limit: int | None = None,
) -> np.ndarray:
    """
    pi with ||pi^T - pi^T P||_1 <= tol.

    Iterates the damped operator (I + P) / 2 from the uniform vector. Each
    iterate is an average of consecutive powers of P, so periodic chains
    converge as well; the damped chain has the same stationary laws as P.
    Below dense_limit states a direct least-squares solve is used as fallback.

    Raises:
        NoConvergence: neither the iteration nor the fallback reached tol.
    """
    limit = dense_limit if dense_limit is not None else settings.analysis_dense_limit
    if not is_irreducible(chain):
        logger.warning("Chain is reducible; the stationary law is not unique")

    n = chain.size
    transposed = chain.dense().T if n <= limit else chain.matrix.T.tocsr()
    x = np.full(n, 1.0 / n)
    residual = math.inf
    for iteration in range(max_iters):
        step = transposed @ x
        residual = float(np.abs(x - step).sum())
        if residual <= tol:
            logger.debug(f"Stationary law found after {iteration} damped iterations")
            return x
        x = 0.5 * (x + step)
        x /= x.sum()

    if n <= limit:
        logger.info(f"Damped iteration stalled at residual {residual:.3e}; solving directly")
        system = np.vstack([transposed - np.eye(n), np.ones((1, n))])
        target = np.zeros(n + 1)
        target[-1] = 1.0
        solution, *_ = np.linalg.lstsq(system, target, rcond=None)
        solution = np.clip(solution, 0.0, None)
        solution /= solution.sum()
        residual = float(np.abs(solution - transposed @ solution).sum())
        if residual <= tol:
            return solution

    raise NoConvergence(max_iters, residual)


# Verification


def verify_uniform_stationarity(
    hypergraph: Hypergraph, tol: float = 1e-12, max_states: int | None = None
) -> VerificationReport:
    """
    Check that U is doubly stochastic and that the uniform law 1/D is stationary.

    Periodicity is reported, not treated as a failure: the path hypergraph
    {12, 23} gives a connected hypergraph whose chain is a 4-cycle.
    """
    if not hypergraph.is_connected():
        count = len(hypergraph.components())
        logger.warning(f"{hypergraph!r} has {count} components; chain analysis skipped")
        return VerificationReport(
            connected=False,
            states=hypergraph.incidence_count,
            irreducible=False,
            tolerance=tol,
            passed=False,
            notes=[f"hypergraph has {count} components: the chain is reducible, not evaluated"],
        )

    chain = build_nb_ho_matrix(hypergraph, max_states)
    size = chain.size
    row_dev = float(np.max(np.abs(chain.row_sums() - 1.0)))
    column_dev = float(np.max(np.abs(chain.column_sums() - 1.0)))
    uniform = np.full(size, 1.0 / size)
    residual = float(np.abs(uniform - chain.matrix.T @ uniform).sum())
    irreducible = is_irreducible(chain)
    chain_period = period(chain) if irreducible else None

    notes: list[str] = []
    if chain_period is not None and chain_period > 1:
        notes.append(
            f"chain is periodic with period {chain_period}: the uniform law is stationary "
            "but the walk does not converge in distribution"
        )
        logger.warning(f"{hypergraph!r}: {notes[-1]}")
    if not irreducible:
        notes.append("chain is reducible although the hypergraph is connected")

    passed = row_dev <= tol and column_dev <= tol and residual <= tol and irreducible
    return VerificationReport(
        connected=True,
        states=size,
        row_sum_max_dev=row_dev,
        column_sum_max_dev=column_dev,
        stationarity_residual=residual,
        irreducible=irreducible,
        period=chain_period,
        aperiodic=chain_period == 1 if chain_period is not None else None,
        tolerance=tol,
        passed=passed,
        notes=notes,
    )


def empirical_vs_exact(
    hypergraph: Hypergraph,
    walk_kind: WalkKind,
    length: int,
    runs: int = 1,
    master_seed: int = 0,
) -> EmpiricalComparison:
    """
    Largest gap between empirical transition frequencies and the analytic matrix.

    NB-HO-RW is compared on incidence pairs against U, the other walks on nodes
    against T. Run k starts at a uniformly drawn node and uses substream k.

    Raises:
        InsufficientVisits: some state was never left during the runs.
    """
    if walk_kind is WalkKind.NB_HO_RW:
        chain = build_nb_ho_matrix(hypergraph)
        level = "state"
    else:
        chain = build_node_matrix(hypergraph, walk_kind)
        level = "node"
    size = chain.size
    oracle = InMemoryOracle(hypergraph)

    sources: list[np.ndarray] = []
    targets: list[np.ndarray] = []
    for run in range(runs):
        rng = run_generator(master_seed, run)
        config = WalkConfig(
            walk_kind=walk_kind,
            length=length,
            seed_node=random_seed_node(hypergraph, rng),
            rng_seed=master_seed,
        )
        seq = run_walk(oracle.view(None), config, rng=rng)
        nodes = np.array([hypergraph.node_index(x) for x in seq.nodes], dtype=np.int64)
        if level == "state":
            positions = np.array(
                [
                    chain.states.index[(i, hypergraph.hyperedge_index(y))]
                    for i, y in zip(nodes, seq.hyperedges, strict=True)
                ],
                dtype=np.int64,
            )
        else:
            positions = nodes
        sources.append(positions[:-1])
        targets.append(positions[1:])

    source = np.concatenate(sources)
    target = np.concatenate(targets)
    visits = np.bincount(source, minlength=size)
    unvisited = int(np.count_nonzero(visits == 0))
    if unvisited:
        raise InsufficientVisits(unvisited)

    counts = sp.csr_matrix(
        (np.ones(source.size), (source, target)), shape=(size, size)
    )
    counts.sum_duplicates()
    frequencies = sp.diags(1.0 / visits) @ counts
    deviation = float(abs(frequencies - chain.matrix).max())

    coo = counts.tocoo()
    labels = chain.labels
    return EmpiricalComparison(
        walk_kind=walk_kind,
        level=level,
        max_deviation=deviation,
        transitions=int(source.size),
        visits={labels[s]: int(v) for s, v in enumerate(visits)},
        counts={
            f"{labels[r]}->{labels[c]}": int(v)
            for r, c, v in zip(coo.row, coo.col, coo.data, strict=True)
        },
    )


def write_matrix(chain: ChainMatrix, path: str | Path) -> int:
    """Coordinate list 'row col value', one non-zero per line, row-major. Returns the count."""
    coo = chain.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as handle:
        for k in order:
            handle.write(f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}\n")
    return len(order)
