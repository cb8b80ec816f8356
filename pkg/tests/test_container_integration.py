"""
Integration tests using a Redis container for the shared neighborhood cache.

These tests:
1. Start a Redis container
2. Point the neighborhood cache at it
3. Run memoized walks and verify that a second crawl is answered from Redis

Requires Docker to be running.
"""

from collections.abc import Generator
from unittest.mock import patch

import pytest
from testcontainers.redis import RedisContainer

from src.config import settings
from src.models.schemas import QueryBudget, WalkConfig, WalkKind
from src.services.oracle import InMemoryOracle, MemoizingOracle, NeighborhoodCache
from src.services.walkers import run_walk


@pytest.fixture(scope="module")
def redis_container() -> Generator[RedisContainer, None, None]:
    """Start a Redis container for the test module."""
    with RedisContainer("redis:7-alpine") as redis:
        yield redis


@pytest.fixture
def cache(redis_container) -> NeighborhoodCache:
    host = redis_container.get_container_host_ip()
    port = int(redis_container.get_exposed_port(6379))
    with patch.object(settings, "redis_host", host), patch.object(settings, "redis_port", port):
        neighborhood_cache = NeighborhoodCache(enabled=True)
    neighborhood_cache.redis.flushdb()
    return neighborhood_cache


@pytest.mark.container
class TestRedisNeighborhoodCache:
    """Memoized crawls backed by a real Redis."""

    def test_cache_connects(self, cache):
        assert cache.enabled is True
        cache.set("sample-key", ["a", "b"])
        assert cache.get("sample-key") == ["a", "b"]
        assert cache.redis.ttl("neighborhood:sample-key") <= settings.cache_expire_seconds

    def test_second_crawl_is_served_from_redis(self, cache, h_tri):
        config = WalkConfig(walk_kind=WalkKind.C_RW, length=300, seed_node="1", rng_seed=8)

        first_inner = InMemoryOracle(h_tri)
        first = run_walk(MemoizingOracle(first_inner, cache=cache, namespace="tri"), config)
        assert first_inner.snapshot_stats().node_queries == 3

        # A budget of zero on the inner oracle proves nothing reaches it
        second_inner = InMemoryOracle(
            h_tri, QueryBudget(max_node_queries=0, max_hyperedge_queries=0)
        )
        second = run_walk(MemoizingOracle(second_inner, cache=cache, namespace="tri"), config)

        assert second.steps == first.steps
        assert second.truncated is False
        assert second.unique_stats.node_queries == 0

    def test_namespaces_are_isolated(self, cache, h_tri, h_path):
        MemoizingOracle(InMemoryOracle(h_tri), cache=cache, namespace="tri").query_node(0)
        path_inner = InMemoryOracle(h_path)
        MemoizingOracle(path_inner, cache=cache, namespace="path").query_node(0)

        assert path_inner.snapshot_stats().node_queries == 1
        assert sorted(cache.redis.keys("neighborhood:*")) == [
            "neighborhood:path:node:1",
            "neighborhood:tri:node:1",
        ]
