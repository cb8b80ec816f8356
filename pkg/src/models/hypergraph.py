"""Immutable node/hyperedge incidence structure."""

import hashlib
import json
from collections.abc import Hashable, Iterable, Sequence
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from src.exceptions import (
    DuplicateHyperedgeLabel,
    DuplicateMember,
    EmptyInput,
    HyperedgeTooSmall,
    IndexOutOfRange,
    UnknownHyperedge,
    UnknownNode,
)


class Hypergraph:
    """
    A static hypergraph with dense node indices 0..n-1 and hyperedge indices 0..m-1.

    Nodes and hyperedges keep their external labels (normalized to strings) in
    bidirectional tables. Member lists and incidence lists are sorted tuples.
    Instances are never mutated after construction.
    """

    def __init__(
        self,
        members: Sequence[Sequence[int]],
        node_labels: Sequence[str],
        hyperedge_labels: Sequence[str],
    ):
        self._members: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(m)) for m in members)
        self._node_labels: tuple[str, ...] = tuple(node_labels)
        self._hyperedge_labels: tuple[str, ...] = tuple(hyperedge_labels)

        incident: list[list[int]] = [[] for _ in self._node_labels]
        for alpha, nodes in enumerate(self._members):
            for i in nodes:
                incident[i].append(alpha)
        self._incident: tuple[tuple[int, ...], ...] = tuple(tuple(lst) for lst in incident)

        self._node_index = {label: i for i, label in enumerate(self._node_labels)}
        self._hyperedge_index = {label: a for a, label in enumerate(self._hyperedge_labels)}

    @classmethod
    def build(
        cls,
        hyperedges: Iterable[Sequence[Hashable]],
        hyperedge_labels: Sequence[Hashable] | None = None,
        drop_singletons: bool = False,
    ) -> "Hypergraph":
        """
        Build a hypergraph from lists of node labels.

        Node labels are densified to 0..n-1 in order of first appearance.
        Hyperedge labels default to the 0-based input position.

        Args:
            hyperedges: One list of node labels per hyperedge.
            hyperedge_labels: Optional external label per hyperedge.
            drop_singletons: Silently skip hyperedges with a single member
                instead of rejecting them.

        Raises:
            EmptyInput: No hyperedge survives.
            HyperedgeTooSmall: A hyperedge has fewer than 2 members.
            DuplicateMember: A node is listed twice in one hyperedge.
            DuplicateHyperedgeLabel: Two hyperedges share a label.
        """
        hyperedges = [list(e) for e in hyperedges]
        if hyperedge_labels is None:
            hyperedge_labels = [str(alpha) for alpha in range(len(hyperedges))]
        elif len(hyperedge_labels) != len(hyperedges):
            raise ValueError("hyperedge_labels must have one entry per hyperedge")

        node_index: dict[str, int] = {}
        members: list[list[int]] = []
        kept_labels: list[str] = []
        seen_labels: set[str] = set()

        for alpha, (raw, raw_label) in enumerate(zip(hyperedges, hyperedge_labels, strict=True)):
            labels = [str(x) for x in raw]
            if len(set(labels)) < len(labels):
                duplicate = next(x for x in labels if labels.count(x) > 1)
                raise DuplicateMember(alpha, duplicate)
            if len(labels) < 2:
                if drop_singletons:
                    continue
                raise HyperedgeTooSmall(alpha, len(labels))

            label = str(raw_label)
            if label in seen_labels:
                raise DuplicateHyperedgeLabel(label)
            seen_labels.add(label)

            for x in labels:
                if x not in node_index:
                    node_index[x] = len(node_index)
            members.append([node_index[x] for x in labels])
            kept_labels.append(label)

        if not members:
            raise EmptyInput()

        return cls(members, list(node_index), kept_labels)

    # Sizes

    @property
    def node_count(self) -> int:
        return len(self._node_labels)

    @property
    def hyperedge_count(self) -> int:
        return len(self._members)

    @cached_property
    def incidence_count(self) -> int:
        """D = |E| = sum of degrees = sum of sizes."""
        return sum(len(m) for m in self._members)

    # Incidence lookups

    def members(self, alpha: int) -> tuple[int, ...]:
        self._check_hyperedge(alpha)
        return self._members[alpha]

    def incident(self, i: int) -> tuple[int, ...]:
        self._check_node(i)
        return self._incident[i]

    def degree(self, i: int) -> int:
        self._check_node(i)
        return len(self._incident[i])

    def size(self, alpha: int) -> int:
        self._check_hyperedge(alpha)
        return len(self._members[alpha])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(x) for x in self._incident), dtype=np.int64, count=self.node_count)

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.fromiter(
            (len(x) for x in self._members), dtype=np.int64, count=self.hyperedge_count
        )

    def incidence_pairs(self) -> list[tuple[int, int]]:
        """All (node, hyperedge) pairs with the node inside the hyperedge, lexicographic."""
        return [(i, alpha) for i, alphas in enumerate(self._incident) for alpha in alphas]

    def incidence_matrix(self) -> sp.csr_matrix:
        """The n x m 0/1 incidence matrix B."""
        rows, cols = zip(*self.incidence_pairs(), strict=True)
        data = np.ones(len(rows), dtype=np.float64)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.node_count, self.hyperedge_count))

    # Labels

    @property
    def node_labels(self) -> tuple[str, ...]:
        return self._node_labels

    @property
    def hyperedge_labels(self) -> tuple[str, ...]:
        return self._hyperedge_labels

    def node_label(self, i: int) -> str:
        self._check_node(i)
        return self._node_labels[i]

    def hyperedge_label(self, alpha: int) -> str:
        self._check_hyperedge(alpha)
        return self._hyperedge_labels[alpha]

    def node_index(self, label: Hashable) -> int:
        try:
            return self._node_index[str(label)]
        except KeyError:
            raise UnknownNode(label) from None

    def hyperedge_index(self, label: Hashable) -> int:
        try:
            return self._hyperedge_index[str(label)]
        except KeyError:
            raise UnknownHyperedge(label) from None

    # Connectivity

    def _component_labels(self) -> tuple[int, np.ndarray]:
        """Components of the bipartite incidence graph, restricted to node rows."""
        b = self.incidence_matrix()
        adjacency = sp.bmat([[None, b], [b.T, None]], format="csr")
        count, labels = connected_components(adjacency, directed=False)
        return count, labels[: self.node_count]

    def is_connected(self) -> bool:
        """True iff every node is reachable from node 0 through hyperedges."""
        count, _ = self._component_labels()
        return count == 1

    def components(self) -> list[list[int]]:
        """Node index sets of the connected components, ordered by smallest member."""
        _, labels = self._component_labels()
        groups: dict[int, list[int]] = {}
        for i, label in enumerate(labels):
            groups.setdefault(int(label), []).append(i)
        return sorted(groups.values(), key=lambda nodes: nodes[0])

    def largest_connected_component(self) -> "Hypergraph":
        """
        Sub-hypergraph induced by the largest component, re-densified.

        Ties are broken in favor of the component holding the smallest node index.
        """
        components = self.components()
        if len(components) == 1:
            return self
        largest = max(components, key=lambda nodes: (len(nodes), -nodes[0]))
        keep = set(largest)
        kept = [alpha for alpha, nodes in enumerate(self._members) if nodes[0] in keep]
        return Hypergraph.build(
            [[self._node_labels[i] for i in self._members[alpha]] for alpha in kept],
            hyperedge_labels=[self._hyperedge_labels[alpha] for alpha in kept],
        )

    # Canonical form

    def export(self) -> list[list[str]]:
        """Member labels per hyperedge in index order; build(export()) reproduces self."""
        return [[self._node_labels[i] for i in nodes] for nodes in self._members]

    def fingerprint(self) -> str:
        """Content hash of labels and memberships, stable across processes."""
        payload = json.dumps([self._hyperedge_labels, self.export()], separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self._members == other._members
            and self._node_labels == other._node_labels
            and self._hyperedge_labels == other._hyperedge_labels
        )

    def __hash__(self) -> int:
        return hash((self._members, self._node_labels, self._hyperedge_labels))

    def __repr__(self) -> str:
        n, m, d = self.node_count, self.hyperedge_count, self.incidence_count
        return f"Hypergraph(n={n}, m={m}, D={d})"

    def _check_node(self, i: int) -> None:
        if not 0 <= i < self.node_count:
            raise IndexOutOfRange("node", i, self.node_count)

    def _check_hyperedge(self, alpha: int) -> None:
        if not 0 <= alpha < self.hyperedge_count:
            raise IndexOutOfRange("hyperedge", alpha, self.hyperedge_count)
