"""Tests for exact properties and error metrics."""

import pytest

from src.exceptions import ZeroTruth
from src.models.hypergraph import Hypergraph
from src.services.ground_truth import describe, error_metric, ground_truth, metric_kind


class TestGroundTruth:
    def test_scalars(self, h_tri):
        assert ground_truth(h_tri, "avg-degree") == pytest.approx(5 / 3)
        assert ground_truth(h_tri, "avg-size") == pytest.approx(5 / 2)

    def test_distributions(self, h_tri):
        assert ground_truth(h_tri, "degree-pmf") == pytest.approx({1: 1 / 3, 2: 2 / 3})
        assert ground_truth(h_tri, "size-pmf") == pytest.approx({2: 0.5, 3: 0.5})
        assert ground_truth(h_tri, "degree-ccdf") == pytest.approx({1: 1.0, 2: 2 / 3})
        assert ground_truth(h_tri, "size-ccdf") == pytest.approx({2: 1.0, 3: 0.5})

    def test_unknown_property(self, h_tri):
        with pytest.raises(ValueError):
            ground_truth(h_tri, "median-degree")


class TestErrorMetric:
    def test_relative(self):
        assert error_metric("relative", 1.8, 2.0) == pytest.approx(0.1)

    def test_relative_zero_truth(self):
        with pytest.raises(ZeroTruth):
            error_metric("relative", 1.0, 0.0)

    def test_l1_over_union_of_supports(self):
        estimate = {1: 0.5, 2: 0.5}
        truth = {1: 0.25, 3: 0.75}
        assert error_metric("l1", estimate, truth) == pytest.approx(0.25 + 0.5 + 0.75)

    def test_unknown_metric(self):
        with pytest.raises(ValueError):
            error_metric("l2", 1.0, 1.0)

    def test_metric_kind(self):
        assert metric_kind("avg-size") == "relative"
        assert metric_kind("degree-ccdf") == "l1"


class TestDescribe:
    def test_triangle(self, h_tri):
        stats = describe(h_tri)
        assert (stats.n, stats.m, stats.incidences) == (3, 2, 5)
        assert stats.mean_degree == pytest.approx(5 / 3)
        assert stats.max_degree == 2
        assert stats.degree_one_fraction == pytest.approx(1 / 3)
        assert stats.mean_size == pytest.approx(2.5)
        assert stats.max_size == 3
        assert stats.connected is True
        assert stats.components == 1

    def test_disconnected(self):
        stats = describe(Hypergraph.build([[1, 2], [3, 4, 5]]))
        assert stats.connected is False
        assert stats.components == 2
