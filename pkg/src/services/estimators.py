"""
Re-weighted ratio estimators over a sample sequence.

A node property mu_v = sum_i f_v(i) / n is estimated by Phi / Psi with
Phi = mean of f_v(X_k) / d_{X_k} and Psi = mean of 1 / d_{X_k}; hyperedge
properties use f_e(Y_k) / s_{Y_k} and 1 / s_{Y_k}. Restricting to a subset
multiplies both terms by the subset indicator. Degrees and sizes come from the
sequence itself, so estimation issues no further queries.
"""

import logging
from collections.abc import Callable, Collection, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from src.exceptions import EmptySample, MissingCategory, ZeroDenominator
from src.models.schemas import (
    CompositionReport,
    DistributionReport,
    EntityKind,
    EstimateReport,
    TrajectoryPoint,
)
from src.models.sequence import SampleSequence

logger = logging.getLogger(__name__)

# labels, observed degrees (nodes) or sizes (hyperedges) -> values
Evaluator = Callable[[Sequence[str], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FeatureFunction:
    """f_v or f_e evaluated on a batch of sampled labels and their degrees/sizes."""

    kind: EntityKind
    name: str
    evaluator: Evaluator

    def __call__(self, labels: Sequence[str], observed: np.ndarray) -> np.ndarray:
        values = np.asarray(self.evaluator(labels, observed), dtype=np.float64)
        if values.shape != (len(labels),):
            raise ValueError(f"Feature {self.name} returned shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Feature {self.name} returned non-finite values")
        return values

    @classmethod
    def degree(cls) -> "FeatureFunction":
        return cls(EntityKind.NODE, "degree", lambda labels, d: d.astype(np.float64))

    @classmethod
    def size(cls) -> "FeatureFunction":
        return cls(EntityKind.HYPEREDGE, "size", lambda labels, s: s.astype(np.float64))

    @classmethod
    def constant(cls, kind: EntityKind, value: float) -> "FeatureFunction":
        return cls(kind, f"constant({value})", lambda labels, x: np.full(len(labels), value))

    @classmethod
    def equals(cls, kind: EntityKind, value: int) -> "FeatureFunction":
        """1 when the degree (or size) equals value."""
        return cls(kind, f"eq({value})", lambda labels, x: (x == value).astype(np.float64))

    @classmethod
    def at_least(cls, kind: EntityKind, value: int) -> "FeatureFunction":
        """1 when the degree (or size) is at least value."""
        return cls(kind, f"ge({value})", lambda labels, x: (x >= value).astype(np.float64))

    @classmethod
    def attribute(
        cls, kind: EntityKind, table: Mapping[str, float], name: str = "attribute"
    ) -> "FeatureFunction":
        """Values read from a label -> value side table."""

        def evaluate(labels: Sequence[str], observed: np.ndarray) -> np.ndarray:
            try:
                return np.array([float(table[label]) for label in labels])
            except KeyError as e:
                raise MissingCategory(str(e.args[0])) from None

        return cls(kind, name, evaluate)


@dataclass(frozen=True)
class SubsetPredicate:
    """Membership test for V' or E' evaluated on a batch of sampled labels."""

    kind: EntityKind
    name: str
    test: Evaluator

    def __call__(self, labels: Sequence[str], observed: np.ndarray) -> np.ndarray:
        mask = np.asarray(self.test(labels, observed), dtype=bool)
        if mask.shape != (len(labels),):
            raise ValueError(f"Predicate {self.name} returned shape {mask.shape}")
        return mask

    @classmethod
    def members(
        cls, kind: EntityKind, labels: Collection[str], name: str = "subset"
    ) -> "SubsetPredicate":
        keep = frozenset(labels)

        def test(sampled: Sequence[str], observed: np.ndarray) -> np.ndarray:
            return np.array([y in keep for y in sampled], dtype=bool)

        return cls(kind, name, test)

    @classmethod
    def equals(cls, kind: EntityKind, value: int) -> "SubsetPredicate":
        return cls(kind, f"eq({value})", lambda sampled, x: x == value)

    @classmethod
    def everything(cls, kind: EntityKind) -> "SubsetPredicate":
        return cls(kind, "all", lambda sampled, x: np.ones(len(sampled), dtype=bool))


def _side(seq: SampleSequence, kind: EntityKind) -> tuple[Sequence[str], np.ndarray]:
    if kind is EntityKind.NODE:
        return seq.nodes, seq.degrees
    return seq.hyperedges, seq.sizes


def _prepare(
    seq: SampleSequence,
    kind: EntityKind,
    burn_in: int,
    pred: SubsetPredicate | None,
) -> tuple[Sequence[str], np.ndarray, np.ndarray]:
    """Labels, observed weights and subset mask of the steps after burn-in."""
    if pred is not None and pred.kind is not kind:
        raise ValueError(f"Predicate on {pred.kind} used for a {kind} estimate")
    tail = seq.tail(burn_in)
    if len(tail) == 0:
        raise EmptySample()
    labels, observed = _side(tail, kind)
    mask = pred(labels, observed) if pred is not None else np.ones(len(labels), dtype=bool)
    return labels, observed, mask


def estimate(
    seq: SampleSequence,
    f: FeatureFunction,
    pred: SubsetPredicate | None = None,
    burn_in: int = 0,
) -> EstimateReport:
    """
    Ratio estimate of the mean of f over all nodes (or hyperedges), or over a subset.

    Raises:
        EmptySample: no steps remain after burn-in.
        ZeroDenominator: no sampled element belongs to the subset.
    """
    labels, observed, mask = _prepare(seq, f.kind, burn_in, pred)
    r = len(labels)
    values = f(labels, observed)
    phi = float(np.sum(np.where(mask, values / observed, 0.0)) / r)
    psi = float(np.sum(np.where(mask, 1.0 / observed, 0.0)) / r)
    if psi == 0.0:
        raise ZeroDenominator()
    return EstimateReport(
        property=f.name,
        kind=f.kind,
        estimate=phi / psi,
        phi=phi,
        psi=psi,
        samples=r,
        burn_in=burn_in,
        subset=pred.name if pred is not None else None,
        config=seq.config,
    )


def estimate_node(seq: SampleSequence, f: FeatureFunction, burn_in: int = 0) -> EstimateReport:
    _expect(f.kind, EntityKind.NODE)
    return estimate(seq, f, burn_in=burn_in)


def estimate_node_subset(
    seq: SampleSequence, f: FeatureFunction, pred: SubsetPredicate, burn_in: int = 0
) -> EstimateReport:
    _expect(f.kind, EntityKind.NODE)
    return estimate(seq, f, pred=pred, burn_in=burn_in)


def estimate_hyperedge(
    seq: SampleSequence, f: FeatureFunction, burn_in: int = 0
) -> EstimateReport:
    _expect(f.kind, EntityKind.HYPEREDGE)
    return estimate(seq, f, burn_in=burn_in)


def estimate_hyperedge_subset(
    seq: SampleSequence, f: FeatureFunction, pred: SubsetPredicate, burn_in: int = 0
) -> EstimateReport:
    _expect(f.kind, EntityKind.HYPEREDGE)
    return estimate(seq, f, pred=pred, burn_in=burn_in)


def _expect(actual: EntityKind, expected: EntityKind) -> None:
    if actual is not expected:
        raise ValueError(f"Expected a {expected} feature, got a {actual} feature")


def estimate_distribution(
    seq: SampleSequence,
    kind: EntityKind,
    mode: str = "pmf",
    burn_in: int = 0,
    pred: SubsetPredicate | None = None,
) -> DistributionReport:
    """
    Degree (kind=node) or size (kind=hyperedge) distribution over the observed support.

    pmf entries are indicator estimators sharing one denominator, so they sum
    to 1 up to rounding. The ccdf at t is the estimate of P(value >= t) and is
    exactly 1 at the smallest observed value.
    """
    if mode not in ("pmf", "ccdf"):
        raise ValueError(f"Unknown distribution mode: {mode}")
    labels, observed, mask = _prepare(seq, kind, burn_in, pred)
    r = len(labels)
    weights = 1.0 / observed
    psi_sum = np.sum(np.where(mask, weights, 0.0))
    if psi_sum == 0.0:
        raise ZeroDenominator()

    support = np.unique(observed[mask])
    values: dict[int, float] = {}
    for v in support:
        selected = mask & (observed == v) if mode == "pmf" else mask & (observed >= v)
        values[int(v)] = float(np.sum(np.where(selected, weights, 0.0)) / psi_sum)

    return DistributionReport(
        property=f"{'degree' if kind is EntityKind.NODE else 'size'}-{mode}",
        kind=kind,
        mode=mode,
        values=values,
        psi=float(psi_sum / r),
        samples=r,
        burn_in=burn_in,
        subset=pred.name if pred is not None else None,
        config=seq.config,
    )


def estimate_composition(
    seq: SampleSequence,
    kind: EntityKind,
    category_map: Mapping[str, str],
    pred: SubsetPredicate | None = None,
    burn_in: int = 0,
) -> CompositionReport:
    """
    Proportion of each category, one indicator estimator per category.

    Raises:
        MissingCategory: a sampled (and selected) label has no category.
    """
    labels, observed, mask = _prepare(seq, kind, burn_in, pred)
    r = len(labels)
    weights = np.where(mask, 1.0 / observed, 0.0)
    psi_sum = float(np.sum(weights))
    if psi_sum == 0.0:
        raise ZeroDenominator()

    totals: dict[str, float] = {}
    for label, weight, selected in zip(labels, weights, mask, strict=True):
        if not selected:
            continue
        try:
            category = category_map[label]
        except KeyError:
            raise MissingCategory(label) from None
        totals[category] = totals.get(category, 0.0) + float(weight)

    return CompositionReport(
        property="composition",
        kind=kind,
        proportions={c: total / psi_sum for c, total in sorted(totals.items())},
        psi=psi_sum / r,
        samples=r,
        burn_in=burn_in,
        subset=pred.name if pred is not None else None,
        config=seq.config,
    )


def estimate_trajectory(
    seq: SampleSequence,
    f: FeatureFunction,
    checkpoints: Sequence[int],
    pred: SubsetPredicate | None = None,
    burn_in: int = 0,
) -> list[TrajectoryPoint]:
    """
    Estimates over the steps (burn_in, r'] for every checkpoint r'.

    Checkpoints beyond the sequence length are clipped; a checkpoint at which
    no sampled element is in the subset yields estimate None.
    """
    labels, observed, mask = _prepare(seq, f.kind, burn_in, pred)
    values = f(labels, observed)
    phi = np.cumsum(np.where(mask, values / observed, 0.0))
    psi = np.cumsum(np.where(mask, 1.0 / observed, 0.0))

    points: list[TrajectoryPoint] = []
    for checkpoint in sorted({min(c, len(seq)) for c in checkpoints if c > burn_in}):
        used = checkpoint - burn_in
        denominator = psi[used - 1]
        points.append(
            TrajectoryPoint(
                length=checkpoint,
                estimate=float(phi[used - 1] / denominator) if denominator > 0 else None,
            )
        )
    return points
