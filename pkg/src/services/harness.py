"""
Repeated independent walks against exact ground truth.

For every (walk, r) pair the harness runs spec.runs walks, each from a fresh
uniformly drawn seed node, and reports the NRMSE sqrt(mean of squared errors)
of every metric, per-value NRMSE of the pmf estimators, and mean query counts
and repetition rates. Run k always draws from substream k of the master seed,
so the outcome does not depend on how runs are scheduled across workers.
"""

import asyncio
import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.exceptions import FormatError, InfeasibleParameters
from src.models.hypergraph import Hypergraph
from src.models.schemas import (
    EntityKind,
    ExperimentResult,
    ExperimentSpec,
    NrmseResult,
    PointwiseNrmse,
    QueryComparison,
    WalkConfig,
    WalkKind,
)
from src.models.sequence import SampleSequence
from src.services.estimators import (
    FeatureFunction,
    estimate_distribution,
    estimate_hyperedge,
    estimate_node,
)
from src.services.generator import generate_random_hypergraph
from src.services.ground_truth import PROPERTIES, error_metric, ground_truth, metric_kind
from src.services.loaders import load_hypergraph
from src.services.oracle import InMemoryOracle
from src.services.rng import run_generator
from src.services.walkers import node_repetition_rate, random_seed_node, repetition_rate, run_walk

logger = logging.getLogger(__name__)

SYNTHETIC_PREFIX = "synthetic:"


@dataclass
class RunOutcome:
    """Everything measured on one walk."""

    seed_node: str
    errors: dict[str, float] = field(default_factory=dict)
    pmfs: dict[str, dict[int, float]] = field(default_factory=dict)
    node_queries: int = 0
    hyperedge_queries: int = 0
    hyperedge_repetition: float = math.nan
    node_repetition: float = math.nan


def nrmse(errors: list[float] | np.ndarray) -> float:
    """sqrt(mean(e^2)) over per-run errors."""
    values = np.asarray(errors, dtype=np.float64)
    if values.size == 0:
        raise ValueError("NRMSE of an empty error list")
    return float(np.sqrt(np.mean(values**2)))


def evaluate(seq: SampleSequence, prop: str, burn_in: int = 0) -> float | dict[int, float]:
    """Estimate one harness property from a sample sequence."""
    if prop == "avg-degree":
        return estimate_node(seq, FeatureFunction.degree(), burn_in).estimate
    if prop == "avg-size":
        return estimate_hyperedge(seq, FeatureFunction.size(), burn_in).estimate
    if prop not in PROPERTIES:
        raise ValueError(f"Unknown property: {prop}")
    kind = EntityKind.NODE if prop.startswith("degree") else EntityKind.HYPEREDGE
    mode = prop.rsplit("-", 1)[1]
    return estimate_distribution(seq, kind, mode=mode, burn_in=burn_in).values


# Datasets


def resolve_dataset(reference: str) -> Hypergraph:
    """
    Load a dataset file, or generate one from 'synthetic:key=value,...'.

    Synthetic keys: n, m, sizes (sizes joined by '|'), skew, seed.
    """
    if not reference.startswith(SYNTHETIC_PREFIX):
        return load_hypergraph(reference)
    params: dict[str, str] = {}
    for item in reference[len(SYNTHETIC_PREFIX) :].split(","):
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise FormatError(f"Expected key=value in synthetic dataset, got {item!r}")
        params[key.strip()] = value.strip()
    unknown = set(params) - {"n", "m", "sizes", "skew", "seed"}
    if unknown:
        raise FormatError(f"Unknown synthetic dataset parameters: {sorted(unknown)}")
    try:
        return generate_random_hypergraph(
            n=int(params.get("n", "100")),
            m=int(params.get("m", "100")),
            size_law=[int(s) for s in params.get("sizes", "2|3").split("|")],
            degree_skew=float(params.get("skew", "0")),
            rng_seed=int(params.get("seed", "0")),
        )
    except ValueError as e:
        raise FormatError(f"Invalid synthetic dataset parameters: {e}") from e


# One run


def simulate_run(
    hypergraph: Hypergraph,
    backend: InMemoryOracle,
    spec: ExperimentSpec,
    walk: WalkKind,
    length: int,
    run: int,
    truths: dict[str, float | dict[int, float]],
) -> RunOutcome:
    rng = run_generator(spec.master_seed, run)
    seed_node = random_seed_node(hypergraph, rng)
    config = WalkConfig(
        walk_kind=walk,
        length=length,
        seed_node=seed_node,
        rng_seed=spec.master_seed,
        burn_in=spec.burn_in,
    )
    seq = run_walk(backend.view(), config, rng=rng)

    outcome = RunOutcome(
        seed_node=seed_node,
        node_queries=seq.stats.node_queries,
        hyperedge_queries=seq.stats.hyperedge_queries,
    )
    if len(seq) >= 2:
        outcome.hyperedge_repetition = repetition_rate(seq)
        outcome.node_repetition = node_repetition_rate(seq)
    for prop in spec.metrics:
        estimate = evaluate(seq, prop, spec.burn_in)
        outcome.errors[prop] = error_metric(metric_kind(prop), estimate, truths[prop])
        if prop.endswith("-pmf"):
            outcome.pmfs[prop] = estimate
    return outcome


# Experiment


async def run_experiment_async(
    spec: ExperimentSpec, hypergraph: Hypergraph | None = None
) -> ExperimentResult:
    """
    Run every (walk, r, run) combination, spec.workers at a time.

    Results are folded in run order, so any worker count gives the same output.
    """
    unknown = [p for p in spec.metrics if p not in PROPERTIES]
    if unknown:
        raise InfeasibleParameters(f"Unknown metrics: {unknown}")
    hypergraph = hypergraph if hypergraph is not None else resolve_dataset(spec.dataset)
    if not hypergraph.is_connected():
        logger.warning(f"{hypergraph!r} is not connected; estimates are biased")
    truths = {prop: ground_truth(hypergraph, prop) for prop in spec.metrics}
    backend = InMemoryOracle(hypergraph)
    limit = asyncio.Semaphore(spec.workers)

    async def run_single(walk: WalkKind, length: int, run: int) -> RunOutcome:
        async with limit:
            return await asyncio.to_thread(
                simulate_run, hypergraph, backend, spec, walk, length, run, truths
            )

    result = ExperimentResult(spec=spec)
    for walk in spec.walks:
        for length in spec.lengths:
            logger.info(f"{spec.dataset}: {spec.runs} runs of {walk} with r={length}")
            tasks = [run_single(walk, length, run) for run in range(spec.runs)]
            outcomes: list[RunOutcome] = await asyncio.gather(*tasks)
            _fold(result, spec, walk, length, outcomes, truths)
    return result


def run_experiment(spec: ExperimentSpec, hypergraph: Hypergraph | None = None) -> ExperimentResult:
    return asyncio.run(run_experiment_async(spec, hypergraph))


def run_nrmse_experiment(
    spec: ExperimentSpec, hypergraph: Hypergraph | None = None
) -> list[NrmseResult]:
    return run_experiment(spec, hypergraph).nrmse


def compare_queries_and_repetition(
    spec: ExperimentSpec, hypergraph: Hypergraph | None = None
) -> list[QueryComparison]:
    """Mean query counts and repetition rates per (walk, r)."""
    return run_experiment(spec, hypergraph).queries


def _fold(
    result: ExperimentResult,
    spec: ExperimentSpec,
    walk: WalkKind,
    length: int,
    outcomes: list[RunOutcome],
    truths: dict[str, float | dict[int, float]],
) -> None:
    result.seed_nodes[f"{walk}:{length}"] = [o.seed_node for o in outcomes]

    for prop in spec.metrics:
        errors = [o.errors[prop] for o in outcomes]
        result.nrmse.append(
            NrmseResult(
                dataset=spec.dataset,
                walk=walk,
                length=length,
                metric=prop,
                nrmse=nrmse(errors),
                runs=len(outcomes),
                errors=errors if spec.keep_errors else None,
            )
        )
        if not prop.endswith("-pmf"):
            continue
        for value, probability in sorted(truths[prop].items()):
            pointwise = [
                (o.pmfs[prop].get(value, 0.0) - probability) / probability for o in outcomes
            ]
            result.pointwise.append(
                PointwiseNrmse(
                    dataset=spec.dataset,
                    metric=prop,
                    value=value,
                    walk=walk,
                    length=length,
                    nrmse=nrmse(pointwise),
                )
            )

    repetitions = [o.hyperedge_repetition for o in outcomes]
    node_repetitions = [o.node_repetition for o in outcomes]
    result.queries.append(
        QueryComparison(
            dataset=spec.dataset,
            walk=walk,
            length=length,
            runs=len(outcomes),
            mean_node_queries=float(np.mean([o.node_queries for o in outcomes])),
            mean_hyperedge_queries=float(np.mean([o.hyperedge_queries for o in outcomes])),
            mean_hyperedge_repetition=float(np.mean(repetitions)),
            mean_node_repetition=float(np.mean(node_repetitions)),
        )
    )


def pointwise_ratios(
    pointwise: list[PointwiseNrmse],
    numerator: WalkKind = WalkKind.NB_HO_RW,
    denominator: WalkKind = WalkKind.HO_RW,
) -> list[tuple[str, str, int, int, float]]:
    """(dataset, metric, value, r, ratio) of per-value NRMSE between two walks."""
    baseline = {
        (p.dataset, p.metric, p.value, p.length): p.nrmse
        for p in pointwise
        if p.walk is denominator
    }
    ratios = []
    for p in pointwise:
        if p.walk is not numerator:
            continue
        base = baseline.get((p.dataset, p.metric, p.value, p.length))
        if base:
            ratios.append((p.dataset, p.metric, p.value, p.length, p.nrmse / base))
    return ratios


# Experiment files


def parse_experiment_spec(text: str) -> ExperimentSpec:
    """
    Parse a 'key=value' experiment description.

    List values (walks, lengths, metrics) are comma separated; '#' starts a
    comment line.
    """
    fields: dict[str, object] = {}
    list_keys = {"walks", "lengths", "metrics"}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in ExperimentSpec.model_fields:
            known = sorted(ExperimentSpec.model_fields)
            raise FormatError(f"line {lineno}: expected key=value with a key in {known}")
        if key in list_keys:
            fields[key] = [v.strip() for v in value.split(",") if v.strip()]
        else:
            fields[key] = value
    try:
        return ExperimentSpec.model_validate(fields)
    except ValidationError as e:
        raise FormatError(f"Invalid experiment description: {e}") from e


def read_experiment_spec(path: str | Path) -> ExperimentSpec:
    with open(path, encoding="utf-8") as handle:
        return parse_experiment_spec(handle.read())


def format_experiment_spec(spec: ExperimentSpec) -> list[str]:
    """The experiment as 'key=value' lines, in field order."""
    lines = []
    for key, value in spec.model_dump(mode="json").items():
        text = ",".join(str(v) for v in value) if isinstance(value, list) else str(value)
        lines.append(f"{key}={text}")
    return lines


def _write_csv(path: str | Path, spec: ExperimentSpec, header: list[str], rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for line in format_experiment_spec(spec):
            handle.write(f"# {line}\n")
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def write_nrmse_csv(result: ExperimentResult, path: str | Path) -> None:
    rows = [(r.dataset, r.walk, r.length, r.metric, repr(r.nrmse), r.runs) for r in result.nrmse]
    _write_csv(path, result.spec, ["dataset", "walk", "r", "metric", "nrmse", "runs"], rows)


def write_pointwise_csv(result: ExperimentResult, path: str | Path) -> None:
    rows = [
        (p.dataset, p.metric, p.value, p.walk, p.length, repr(p.nrmse)) for p in result.pointwise
    ]
    _write_csv(path, result.spec, ["dataset", "property", "value", "walk", "r", "nrmse"], rows)


def write_ratio_csv(result: ExperimentResult, path: str | Path) -> None:
    rows = [(d, m, v, r, repr(x)) for d, m, v, r, x in pointwise_ratios(result.pointwise)]
    _write_csv(path, result.spec, ["dataset", "property", "value", "r", "ratio"], rows)


def write_queries_csv(result: ExperimentResult, path: str | Path) -> None:
    rows = [
        (
            q.dataset,
            q.walk,
            q.length,
            q.runs,
            q.mean_node_queries,
            q.mean_hyperedge_queries,
            q.mean_hyperedge_repetition,
            q.mean_node_repetition,
        )
        for q in result.queries
    ]
    header = [
        "dataset",
        "walk",
        "r",
        "runs",
        "node_queries",
        "hyperedge_queries",
        "hyperedge_repetition",
        "node_repetition",
    ]
    _write_csv(path, result.spec, header, rows)
