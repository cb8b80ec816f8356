"""Tests for the re-weighted ratio estimators."""

import numpy as np
import pytest

from src.exceptions import EmptySample, MissingCategory, ZeroDenominator
from src.models.hypergraph import Hypergraph
from src.models.schemas import EntityKind, WalkConfig, WalkKind
from src.models.sequence import SampleSequence
from src.services.estimators import (
    FeatureFunction,
    SubsetPredicate,
    estimate,
    estimate_composition,
    estimate_distribution,
    estimate_hyperedge,
    estimate_hyperedge_subset,
    estimate_node,
    estimate_node_subset,
    estimate_trajectory,
)
from src.services.generator import generate_random_hypergraph
from src.services.oracle import InMemoryOracle
from src.services.walkers import run_walk

NODE = EntityKind.NODE
HYPEREDGE = EntityKind.HYPEREDGE


@pytest.fixture
def handmade() -> SampleSequence:
    """Four steps with node degrees 1, 2, 2, 3 and hyperedge sizes 2, 3, 2, 4."""
    return SampleSequence(
        nodes=("a", "b", "c", "d"),
        hyperedges=("w", "x", "y", "z"),
        degrees=np.array([1, 2, 2, 3], dtype=np.int64),
        sizes=np.array([2, 3, 2, 4], dtype=np.int64),
    )


@pytest.fixture(scope="module")
def long_tri_walk() -> SampleSequence:
    h = Hypergraph.build([[1, 2, 3], [2, 3]])
    config = WalkConfig(walk_kind=WalkKind.HO_RW, length=100_000, seed_node="1", rng_seed=11)
    return run_walk(InMemoryOracle(h), config)


class TestEstimate:
    def test_harmonic_mean_of_degrees(self, handmade):
        report = estimate_node(handmade, FeatureFunction.degree())
        assert report.estimate == pytest.approx(4 / (1 + 1 / 2 + 1 / 2 + 1 / 3))
        assert report.samples == 4
        assert report.kind is NODE
        assert report.property == "degree"

    def test_constant_feature_is_exact(self, handmade):
        report = estimate_hyperedge(handmade, FeatureFunction.constant(HYPEREDGE, 7.5))
        assert report.estimate == pytest.approx(7.5, rel=1e-12)

    def test_subset_of_degree_two(self, handmade):
        report = estimate_node_subset(
            handmade, FeatureFunction.degree(), SubsetPredicate.equals(NODE, 2)
        )
        assert report.estimate == pytest.approx(2.0, rel=1e-12)
        assert report.subset == "eq(2)"

    def test_label_subset(self, handmade):
        pred = SubsetPredicate.members(HYPEREDGE, {"x", "z"}, name="big")
        report = estimate_hyperedge_subset(handmade, FeatureFunction.size(), pred)
        assert report.estimate == pytest.approx(2 / (1 / 3 + 1 / 4))

    def test_full_subset_matches_plain_estimate(self, handmade):
        plain = estimate(handmade, FeatureFunction.degree())
        full = estimate(handmade, FeatureFunction.degree(), SubsetPredicate.everything(NODE))
        assert full.estimate == pytest.approx(plain.estimate)

    def test_burn_in_equals_tail(self, handmade):
        f = FeatureFunction.degree()
        assert estimate(handmade, f, burn_in=2).estimate == pytest.approx(
            estimate(handmade.tail(2), f).estimate
        )

    def test_empty_after_burn_in(self, handmade):
        with pytest.raises(EmptySample):
            estimate(handmade, FeatureFunction.degree(), burn_in=4)

    def test_empty_subset(self, handmade):
        with pytest.raises(ZeroDenominator):
            estimate(handmade, FeatureFunction.degree(), SubsetPredicate.equals(NODE, 9))

    def test_kind_mismatch(self, handmade):
        with pytest.raises(ValueError):
            estimate_node(handmade, FeatureFunction.size())
        with pytest.raises(ValueError):
            estimate(handmade, FeatureFunction.degree(), SubsetPredicate.everything(HYPEREDGE))

    def test_attribute_feature(self, handmade):
        f = FeatureFunction.attribute(NODE, {"a": 1, "b": 0, "c": 0, "d": 1}, name="flag")
        assert estimate(handmade, f).estimate == pytest.approx((1 + 1 / 3) / (7 / 3))

    def test_attribute_missing_label(self, handmade):
        f = FeatureFunction.attribute(NODE, {"a": 1})
        with pytest.raises(MissingCategory):
            estimate(handmade, f)

    def test_non_finite_feature_rejected(self, handmade):
        f = FeatureFunction(NODE, "bad", lambda labels, d: np.full(len(labels), np.inf))
        with pytest.raises(ValueError):
            estimate(handmade, f)


class TestDistribution:
    def test_pmf(self, handmade):
        report = estimate_distribution(handmade, NODE, "pmf")
        assert report.values == pytest.approx({1: 3 / 7, 2: 3 / 7, 3: 1 / 7})
        assert sum(report.values.values()) == pytest.approx(1.0)
        assert report.property == "degree-pmf"

    def test_ccdf(self, handmade):
        report = estimate_distribution(handmade, NODE, "ccdf")
        assert report.values[1] == 1.0
        assert report.values == pytest.approx({1: 1.0, 2: 4 / 7, 3: 1 / 7})

    def test_size_distribution(self, handmade):
        report = estimate_distribution(handmade, HYPEREDGE, "pmf")
        assert sorted(report.values) == [2, 3, 4]
        assert report.property == "size-pmf"

    def test_unknown_mode(self, handmade):
        with pytest.raises(ValueError):
            estimate_distribution(handmade, NODE, "cdf")


class TestComposition:
    def test_proportions(self, handmade):
        report = estimate_composition(
            handmade, NODE, {"a": "red", "b": "blue", "c": "red", "d": "blue"}
        )
        assert list(report.proportions) == ["blue", "red"]
        assert report.proportions["red"] == pytest.approx((1 + 1 / 2) / (7 / 3))
        assert sum(report.proportions.values()) == pytest.approx(1.0)

    def test_missing_category(self, handmade):
        with pytest.raises(MissingCategory) as exc:
            estimate_composition(handmade, NODE, {"a": "red"})
        assert exc.value.label == "b"

    def test_unselected_labels_need_no_category(self, handmade):
        pred = SubsetPredicate.members(NODE, {"a"})
        report = estimate_composition(handmade, NODE, {"a": "red"}, pred=pred)
        assert report.proportions == {"red": pytest.approx(1.0)}


class TestTrajectory:
    def test_checkpoints(self, handmade):
        points = estimate_trajectory(handmade, FeatureFunction.degree(), [1, 2, 4, 10])
        assert [p.length for p in points] == [1, 2, 4]
        assert points[0].estimate == pytest.approx(1.0)
        assert points[1].estimate == pytest.approx(2 / 1.5)
        assert points[2].estimate == pytest.approx(12 / 7)

    def test_last_point_matches_estimate(self, handmade):
        f = FeatureFunction.degree()
        points = estimate_trajectory(handmade, f, [4])
        assert points[-1].estimate == pytest.approx(estimate(handmade, f).estimate)

    def test_burn_in_skips_early_checkpoints(self, handmade):
        points = estimate_trajectory(handmade, FeatureFunction.degree(), [1, 2], burn_in=1)
        assert [p.length for p in points] == [2]
        assert points[0].estimate == pytest.approx(2.0)

    def test_empty_subset_prefix_is_none(self, handmade):
        points = estimate_trajectory(
            handmade, FeatureFunction.degree(), [1, 4], pred=SubsetPredicate.equals(NODE, 3)
        )
        assert points[0].estimate is None
        assert points[1].estimate == pytest.approx(3.0)


class TestConsistency:
    def test_average_degree(self, long_tri_walk):
        report = estimate_node(long_tri_walk, FeatureFunction.degree(), burn_in=100)
        assert report.estimate == pytest.approx(5 / 3, rel=0.02)

    def test_average_size(self, long_tri_walk):
        report = estimate_hyperedge(long_tri_walk, FeatureFunction.size(), burn_in=100)
        assert report.estimate == pytest.approx(5 / 2, rel=0.02)

    def test_degree_pmf(self, long_tri_walk):
        report = estimate_distribution(long_tri_walk, NODE, "pmf")
        assert report.values == pytest.approx({1: 1 / 3, 2: 2 / 3}, abs=0.02)


class TestRelabeling:
    @pytest.mark.parametrize("walk", [WalkKind.C_RW, WalkKind.NB_HO_RW])
    def test_estimates_do_not_depend_on_labels(self, walk):
        h = generate_random_hypergraph(n=12, m=15, size_law=(2, 3, 4), rng_seed=3)
        names = np.random.default_rng(1).permutation(h.node_count)
        mapping = {label: f"v{name}" for label, name in zip(h.node_labels, names, strict=True)}
        edge_names = [f"e{h.hyperedge_count - alpha}" for alpha in range(h.hyperedge_count)]
        relabeled = Hypergraph.build(
            [[mapping[x] for x in members] for members in h.export()], hyperedge_labels=edge_names
        )
        seed = h.node_label(0)
        config = WalkConfig(walk_kind=walk, length=5000, seed_node=seed, rng_seed=11)
        mapped = config.model_copy(update={"seed_node": mapping[seed]})

        original = run_walk(InMemoryOracle(h), config)
        renamed = run_walk(InMemoryOracle(relabeled), mapped)

        assert [mapping[x] for x in original.nodes] == list(renamed.nodes)
        for estimator, feature in (
            (estimate_node, FeatureFunction.degree()),
            (estimate_hyperedge, FeatureFunction.size()),
        ):
            assert estimator(original, feature).estimate == estimator(renamed, feature).estimate
        for kind in (NODE, HYPEREDGE):
            assert (
                estimate_distribution(original, kind, "pmf").values
                == estimate_distribution(renamed, kind, "pmf").values
            )
