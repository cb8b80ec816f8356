"""Neighborhood query oracles: the only access path walkers have to a hypergraph."""

import json
import logging
import threading
from abc import ABC, abstractmethod
from collections.abc import Hashable

import redis

from src.config import settings
from src.exceptions import BudgetExhausted, UnknownHyperedge, UnknownNode
from src.models.hypergraph import Hypergraph
from src.models.schemas import QueryBudget, QueryStats

logger = logging.getLogger(__name__)


class QueryOracle(ABC):
    """
    Answers node and hyperedge neighborhood queries, counting every query.

    Node and hyperedge keys are backend specific (dense indices in memory,
    labels for remote backends); walkers treat them as opaque and only turn
    them into labels through node_label / hyperedge_label.
    """

    def __init__(self, budget: QueryBudget | None = None):
        self.budget = budget or QueryBudget()
        self._node_queries = 0
        self._hyperedge_queries = 0
        self._lock = threading.Lock()

    @abstractmethod
    def _fetch_node(self, node: Hashable) -> list:
        """Return the keys of the hyperedges incident to node."""

    @abstractmethod
    def _fetch_hyperedge(self, hyperedge: Hashable) -> list:
        """Return the keys of the nodes inside hyperedge."""

    def resolve_node(self, label: str) -> Hashable:
        """Map an external node label to a backend key."""
        return label

    def resolve_hyperedge(self, label: str) -> Hashable:
        """Map an external hyperedge label to a backend key."""
        return label

    def node_label(self, node: Hashable) -> str:
        return str(node)

    def hyperedge_label(self, hyperedge: Hashable) -> str:
        return str(hyperedge)

    def query_node(self, node: Hashable) -> list:
        """Incident hyperedges of node; one node query is charged."""
        with self._lock:
            limit = self.budget.max_node_queries
            if limit is not None and self._node_queries >= limit:
                raise BudgetExhausted("node", limit)
            self._node_queries += 1
        return self._fetch_node(node)

    def query_hyperedge(self, hyperedge: Hashable) -> list:
        """Member nodes of hyperedge; one hyperedge query is charged."""
        with self._lock:
            limit = self.budget.max_hyperedge_queries
            if limit is not None and self._hyperedge_queries >= limit:
                raise BudgetExhausted("hyperedge", limit)
            self._hyperedge_queries += 1
        return self._fetch_hyperedge(hyperedge)

    def snapshot_stats(self) -> QueryStats:
        """Current counter values; counters are not reset."""
        with self._lock:
            return QueryStats(
                node_queries=self._node_queries,
                hyperedge_queries=self._hyperedge_queries,
            )

    def view(self, budget: QueryBudget | None = None) -> "CountingOracle":
        """A private counting wrapper sharing this oracle's backend."""
        return CountingOracle(self, budget)


class InMemoryOracle(QueryOracle):
    """Answers queries from a Hypergraph held in memory; keys are dense indices."""

    def __init__(self, hypergraph: Hypergraph, budget: QueryBudget | None = None):
        super().__init__(budget)
        self.hypergraph = hypergraph

    def _fetch_node(self, node: Hashable) -> list:
        if not isinstance(node, int) or not 0 <= node < self.hypergraph.node_count:
            raise UnknownNode(node)
        return list(self.hypergraph.incident(node))

    def _fetch_hyperedge(self, hyperedge: Hashable) -> list:
        if not isinstance(hyperedge, int) or not 0 <= hyperedge < self.hypergraph.hyperedge_count:
            raise UnknownHyperedge(hyperedge)
        return list(self.hypergraph.members(hyperedge))

    def resolve_node(self, label: str) -> int:
        return self.hypergraph.node_index(label)

    def resolve_hyperedge(self, label: str) -> int:
        return self.hypergraph.hyperedge_index(label)

    def node_label(self, node: Hashable) -> str:
        return self.hypergraph.node_label(node)

    def hyperedge_label(self, hyperedge: Hashable) -> str:
        return self.hypergraph.hyperedge_label(hyperedge)


class CountingOracle(QueryOracle):
    """Own counters and budget in front of a shared backend; the backend is not charged."""

    def __init__(self, backend: QueryOracle, budget: QueryBudget | None = None):
        super().__init__(budget)
        self.backend = backend

    def _fetch_node(self, node: Hashable) -> list:
        return self.backend._fetch_node(node)

    def _fetch_hyperedge(self, hyperedge: Hashable) -> list:
        return self.backend._fetch_hyperedge(hyperedge)

    def resolve_node(self, label: str) -> Hashable:
        return self.backend.resolve_node(label)

    def resolve_hyperedge(self, label: str) -> Hashable:
        return self.backend.resolve_hyperedge(label)

    def node_label(self, node: Hashable) -> str:
        return self.backend.node_label(node)

    def hyperedge_label(self, hyperedge: Hashable) -> str:
        return self.backend.hyperedge_label(hyperedge)


class NeighborhoodCache:
    """Redis cache of neighborhood answers; keys and stored answers are labels."""

    def __init__(self, enabled: bool | None = None):
        self.redis = None
        self.enabled = False
        if not (settings.cache_enabled if enabled is None else enabled):
            return
        try:
            self.redis = redis.Redis(
                host=settings.redis_host,
                port=settings.redis_port,
                db=settings.redis_db,
                decode_responses=True,
                socket_connect_timeout=2,
            )
            # Connectivity check
            self.redis.ping()
            self.enabled = True
            logger.info("Neighborhood cache (Redis) initialized.")
        except Exception as e:
            logger.warning(f"Redis not available, neighborhood caching disabled: {e}")
            self.redis = None
            self.enabled = False

    def get(self, key: str) -> list | None:
        if not self.enabled:
            return None
        try:
            data = self.redis.get(f"neighborhood:{key}")
            if data:
                logger.debug(f"Cache hit for {key}")
                return json.loads(data)
        except Exception as e:
            logger.error(f"Error reading from cache: {e}")
        return None

    def set(self, key: str, answer: list) -> None:
        if not self.enabled:
            return
        try:
            self.redis.setex(
                f"neighborhood:{key}",
                settings.cache_expire_seconds,
                json.dumps(answer),
            )
        except Exception as e:
            logger.error(f"Error writing to cache: {e}")


neighborhood_cache = NeighborhoodCache()


class MemoizingOracle(QueryOracle):
    """
    Caches answers of an inner oracle.

    Its own counters keep counting every query (raw view); unique_stats()
    reports how many answers actually had to be fetched from the inner oracle,
    which is the only one charged for them.
    """

    def __init__(
        self,
        inner: QueryOracle,
        budget: QueryBudget | None = None,
        cache: NeighborhoodCache | None = None,
        namespace: str = "default",
    ):
        super().__init__(budget)
        self.inner = inner
        self.cache = cache if cache is not None else neighborhood_cache
        self.namespace = namespace
        self._nodes: dict[Hashable, list] = {}
        self._hyperedges: dict[Hashable, list] = {}
        self._unique_nodes = 0
        self._unique_hyperedges = 0

    def _cached(self, key: str, resolve) -> list | None:
        """Backend keys of a cached answer; None on a miss or a stale entry."""
        labels = self.cache.get(key)
        if labels is None:
            return None
        try:
            return [resolve(label) for label in labels]
        except (UnknownNode, UnknownHyperedge) as e:
            logger.warning(f"Stale cache entry {key} ({e}), fetching again")
            return None

    def _fetch_node(self, node: Hashable) -> list:
        if node in self._nodes:
            return self._nodes[node]
        key = f"{self.namespace}:node:{self.inner.node_label(node)}"
        answer = self._cached(key, self.inner.resolve_hyperedge)
        if answer is None:
            answer = self.inner.query_node(node)
            with self._lock:
                self._unique_nodes += 1
            self.cache.set(key, [self.inner.hyperedge_label(h) for h in answer])
        self._nodes[node] = answer
        return answer

    def _fetch_hyperedge(self, hyperedge: Hashable) -> list:
        if hyperedge in self._hyperedges:
            return self._hyperedges[hyperedge]
        key = f"{self.namespace}:hyperedge:{self.inner.hyperedge_label(hyperedge)}"
        answer = self._cached(key, self.inner.resolve_node)
        if answer is None:
            answer = self.inner.query_hyperedge(hyperedge)
            with self._lock:
                self._unique_hyperedges += 1
            self.cache.set(key, [self.inner.node_label(i) for i in answer])
        self._hyperedges[hyperedge] = answer
        return answer

    def unique_stats(self) -> QueryStats:
        with self._lock:
            return QueryStats(
                node_queries=self._unique_nodes,
                hyperedge_queries=self._unique_hyperedges,
            )

    def resolve_node(self, label: str) -> Hashable:
        return self.inner.resolve_node(label)

    def resolve_hyperedge(self, label: str) -> Hashable:
        return self.inner.resolve_hyperedge(label)

    def node_label(self, node: Hashable) -> str:
        return self.inner.node_label(node)

    def hyperedge_label(self, hyperedge: Hashable) -> str:
        return self.inner.hyperedge_label(hyperedge)
