"""Tests for query counting, budgets, views and memoization."""

from unittest.mock import MagicMock, patch

import fakeredis
import pytest

from src.exceptions import BudgetExhausted, UnknownHyperedge, UnknownNode
from src.models.schemas import QueryBudget, QueryStats, WalkConfig, WalkKind
from src.services.loaders import load_hypergraph
from src.services.oracle import InMemoryOracle, MemoizingOracle, NeighborhoodCache
from src.services.walkers import run_walk


class TestInMemoryOracle:
    def test_answers_sorted_neighborhoods(self, h_tri):
        oracle = InMemoryOracle(h_tri)
        two = oracle.resolve_node("2")
        assert oracle.query_node(two) == [0, 1]
        assert oracle.query_hyperedge(0) == [0, 1, 2]
        assert oracle.snapshot_stats() == QueryStats(node_queries=1, hyperedge_queries=1)

    def test_counts_duplicates(self, h_tri):
        oracle = InMemoryOracle(h_tri)
        for _ in range(3):
            oracle.query_node(0)
        assert oracle.snapshot_stats().node_queries == 3

    def test_unknown_keys(self, h_tri):
        oracle = InMemoryOracle(h_tri)
        with pytest.raises(UnknownNode):
            oracle.query_node(7)
        with pytest.raises(UnknownHyperedge):
            oracle.query_hyperedge("0")
        with pytest.raises(UnknownNode):
            oracle.resolve_node("missing")

    def test_labels(self, h_tri):
        oracle = InMemoryOracle(h_tri)
        assert oracle.node_label(0) == "1"
        assert oracle.hyperedge_label(1) == "1"

    def test_budget_checked_before_counting(self, h_tri):
        oracle = InMemoryOracle(h_tri, QueryBudget(max_node_queries=2))
        oracle.query_node(0)
        oracle.query_node(1)
        with pytest.raises(BudgetExhausted) as exc:
            oracle.query_node(2)
        assert exc.value.kind == "node"
        assert oracle.snapshot_stats().node_queries == 2

    def test_zero_hyperedge_budget(self, h_tri):
        oracle = InMemoryOracle(h_tri, QueryBudget(max_hyperedge_queries=0))
        with pytest.raises(BudgetExhausted):
            oracle.query_hyperedge(0)
        assert oracle.query_node(0) == [0]


class TestViews:
    def test_views_count_independently(self, h_tri):
        backend = InMemoryOracle(h_tri)
        first, second = backend.view(), backend.view()
        first.query_node(0)
        first.query_hyperedge(0)
        second.query_node(1)

        assert first.snapshot_stats() == QueryStats(node_queries=1, hyperedge_queries=1)
        assert second.snapshot_stats() == QueryStats(node_queries=1, hyperedge_queries=0)
        assert backend.snapshot_stats() == QueryStats()

    def test_view_budget(self, h_tri):
        view = InMemoryOracle(h_tri).view(QueryBudget(max_node_queries=0))
        with pytest.raises(BudgetExhausted):
            view.query_node(0)

    def test_view_delegates_labels(self, h_tri):
        view = InMemoryOracle(h_tri).view()
        assert view.resolve_node("3") == 2
        assert view.node_label(2) == "3"
        assert view.hyperedge_label(0) == "0"


class TestMemoizingOracle:
    def test_raw_and_unique_counts(self, h_tri):
        inner = InMemoryOracle(h_tri)
        memo = MemoizingOracle(inner)
        for _ in range(3):
            memo.query_node(1)
            memo.query_hyperedge(0)

        assert memo.snapshot_stats() == QueryStats(node_queries=3, hyperedge_queries=3)
        assert memo.unique_stats() == QueryStats(node_queries=1, hyperedge_queries=1)
        assert inner.snapshot_stats() == QueryStats(node_queries=1, hyperedge_queries=1)

    def test_inner_budget_binds_unique_queries(self, h_tri):
        inner = InMemoryOracle(h_tri, QueryBudget(max_node_queries=1))
        memo = MemoizingOracle(inner)
        memo.query_node(0)
        memo.query_node(0)
        with pytest.raises(BudgetExhausted):
            memo.query_node(1)

    def test_uses_shared_cache(self, h_tri, fake_cache):
        MemoizingOracle(InMemoryOracle(h_tri), cache=fake_cache, namespace="tri").query_node(1)
        assert fake_cache.get("tri:node:2") == ["0", "1"]

        second_inner = InMemoryOracle(h_tri)
        second = MemoizingOracle(second_inner, cache=fake_cache, namespace="tri")
        assert second.query_node(1) == [0, 1]
        assert second_inner.snapshot_stats().node_queries == 0
        assert second.unique_stats().node_queries == 0

    def test_cached_labels_follow_the_backend_indexing(self, split_file, fake_cache):
        full = load_hypergraph(split_file, lcc=False)
        reduced = load_hypergraph(split_file)
        config = WalkConfig(walk_kind=WalkKind.HO_RW, length=200, seed_node="3", rng_seed=6)

        run_walk(MemoizingOracle(InMemoryOracle(full), cache=fake_cache, namespace="x"), config)
        cached = run_walk(
            MemoizingOracle(InMemoryOracle(reduced), cache=fake_cache, namespace="x"), config
        )

        assert cached.steps == run_walk(InMemoryOracle(reduced), config).steps

    def test_stale_entry_is_fetched_again(self, h_tri, fake_cache, caplog):
        fake_cache.set("tri:node:2", ["0", "9"])
        inner = InMemoryOracle(h_tri)
        memo = MemoizingOracle(inner, cache=fake_cache, namespace="tri")

        assert memo.query_node(1) == [0, 1]
        assert inner.snapshot_stats().node_queries == 1
        assert fake_cache.get("tri:node:2") == ["0", "1"]
        assert "Stale cache entry" in caplog.text

    def test_defaults_to_module_cache(self, h_tri, mock_neighborhood_cache):
        memo = MemoizingOracle(InMemoryOracle(h_tri))
        memo.query_hyperedge(1)
        mock_neighborhood_cache.get.assert_called_once_with("default:hyperedge:1")
        mock_neighborhood_cache.set.assert_called_once_with("default:hyperedge:1", ["2", "3"])


class TestNeighborhoodCache:
    def test_disabled_by_setting(self):
        cache = NeighborhoodCache(enabled=False)
        assert cache.enabled is False
        assert cache.get("x") is None
        cache.set("x", [1])

    @patch("src.services.oracle.redis.Redis")
    def test_init_success(self, mock_redis):
        mock_redis.return_value = MagicMock()
        cache = NeighborhoodCache(enabled=True)
        assert cache.enabled is True
        mock_redis.return_value.ping.assert_called_once()

    @patch("src.services.oracle.redis.Redis")
    def test_init_failure(self, mock_redis):
        mock_redis.return_value.ping.side_effect = Exception("Connection refused")
        cache = NeighborhoodCache(enabled=True)
        assert cache.enabled is False
        assert cache.redis is None

    def test_get_set_with_fakeredis(self):
        cache = NeighborhoodCache(enabled=False)
        cache.redis = fakeredis.FakeRedis(decode_responses=True)
        cache.enabled = True
        cache.set("k", ["a", "b"])
        assert cache.get("k") == ["a", "b"]
        assert cache.redis.ttl("neighborhood:k") > 0

    def test_errors_are_swallowed(self):
        cache = NeighborhoodCache(enabled=False)
        cache.redis = MagicMock()
        cache.redis.get.side_effect = Exception("boom")
        cache.redis.setex.side_effect = Exception("boom")
        cache.enabled = True
        assert cache.get("k") is None
        cache.set("k", [1])
