from unittest.mock import MagicMock

import fakeredis
import pytest

import src.services.oracle
from src.models.hypergraph import Hypergraph


@pytest.fixture(autouse=True)
def mock_neighborhood_cache(request):
    """Automatically mock the neighborhood cache for all tests except container tests."""
    # Skip mocking for container tests as they need real Redis
    if "container" in request.keywords:
        yield None
        return

    mock = MagicMock()
    mock.enabled = False
    mock.get.return_value = None

    # Store original
    original = src.services.oracle.neighborhood_cache
    src.services.oracle.neighborhood_cache = mock

    yield mock

    # Restore
    src.services.oracle.neighborhood_cache = original


@pytest.fixture
def h_tri() -> Hypergraph:
    """Nodes 1, 2, 3; hyperedge 0 = {1, 2, 3}, hyperedge 1 = {2, 3}."""
    return Hypergraph.build([[1, 2, 3], [2, 3]])


@pytest.fixture
def h_path() -> Hypergraph:
    """Nodes 1, 2, 3; hyperedge 0 = {1, 2}, hyperedge 1 = {2, 3}."""
    return Hypergraph.build([[1, 2], [2, 3]])


@pytest.fixture
def tri_file(tmp_path):
    path = tmp_path / "tri.txt"
    path.write_text("1 2 3\n2 3\n", encoding="utf-8")
    return path


@pytest.fixture
def path_file(tmp_path):
    path = tmp_path / "path.txt"
    path.write_text("1 2\n2 3\n", encoding="utf-8")
    return path


@pytest.fixture
def disconnected_file(tmp_path):
    path = tmp_path / "disconnected.txt"
    path.write_text("1 2\n3 4 5\n", encoding="utf-8")
    return path


@pytest.fixture
def fake_cache():
    """A NeighborhoodCache backed by fakeredis."""
    cache = src.services.oracle.NeighborhoodCache(enabled=False)
    cache.redis = fakeredis.FakeRedis(decode_responses=True)
    cache.enabled = True
    return cache


@pytest.fixture
def split_file(tmp_path):
    """Two components: {1, 2} and the larger {3, 4, 5, 6} holding hyperedges 1 and 2."""
    path = tmp_path / "split.txt"
    path.write_text("1 2\n3 4 5\n3 6\n", encoding="utf-8")
    return path
