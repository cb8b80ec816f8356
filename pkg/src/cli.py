"""
Command-line entry point: ``python -m src.cli <command> ...``.

Exit codes: 0 success, 1 failed verification, 2 walk truncated by the query
budget, 3 degenerate estimate, 64 usage error, 65 data error.
"""

import argparse
import asyncio
import csv
import json
import logging
import sys
from pathlib import Path

import uvicorn
from pydantic import BaseModel, ValidationError

from src.config import settings
from src.exceptions import (
    EXIT_DATA,
    EXIT_TRUNCATED,
    EXIT_USAGE,
    HypergraphSamplingError,
)
from src.models.hypergraph import Hypergraph
from src.models.schemas import (
    DistributionReport,
    EntityKind,
    ExperimentSpec,
    QueryBudget,
    WalkConfig,
    WalkKind,
)
from src.models.sequence import read_sequence, write_sequence
from src.services import estimators, harness, markov
from src.services.estimators import FeatureFunction, SubsetPredicate
from src.services.ground_truth import describe
from src.services.loaders import convert, load_hypergraph, read_label_set, read_label_table
from src.services.oracle import InMemoryOracle, MemoizingOracle, QueryOracle
from src.services.remote_oracle import LineOracleServer, connect_remote
from src.services.rng import entropy_seed, run_generator
from src.services.walkers import random_seed_node, run_walk

logger = logging.getLogger(__name__)

PROPERTIES = (
    "avg-degree",
    "avg-size",
    "degree-pmf",
    "size-pmf",
    "degree-ccdf",
    "size-ccdf",
    "composition",
    "attribute-mean",
)

# Burn-in used when sampling a remote bibliographic database
PRESETS = {"openalex": {"burn_in": 5000}}


class UsageParser(argparse.ArgumentParser):
    """ArgumentParser exiting with 64 on usage errors."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _emit(payload: BaseModel | dict | list, output: Path | None) -> None:
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2)
    if output is None:
        print(text)
    else:
        output.write_text(text + "\n", encoding="utf-8")


def _add_input(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("hypergraph input")
    group.add_argument("--dataset", type=Path, help="One hyperedge per line")
    group.add_argument("--sizes", type=Path, help="Sizes file of the two-file format")
    group.add_argument("--members", type=Path, help="Members file of the two-file format")
    group.add_argument(
        "--no-lcc", action="store_true", help="Keep every component instead of the largest"
    )
    group.add_argument(
        "--drop-singletons", action="store_true", help="Skip single-member hyperedges"
    )


def _load(args: argparse.Namespace, lcc: bool | None = None) -> Hypergraph:
    return load_hypergraph(
        path=args.dataset,
        sizes_path=args.sizes,
        members_path=args.members,
        lcc=not args.no_lcc if lcc is None else lcc,
        drop_singletons=args.drop_singletons,
    )


def _check_input(
    parser: argparse.ArgumentParser, args: argparse.Namespace, remote: bool
) -> None:
    """Exactly one input source: a dataset file, a sizes/members pair or an endpoint."""
    sources = [
        args.dataset is not None,
        args.sizes is not None or args.members is not None,
        remote,
    ]
    if sum(sources) != 1:
        parser.error("give exactly one of --dataset, --sizes/--members or --endpoint")
    if (args.sizes is None) != (args.members is None):
        parser.error("--sizes and --members must be given together")


# Commands


def cmd_convert(args: argparse.Namespace) -> int:
    count = convert(args.sizes, args.members, args.output)
    print(f"{count} hyperedges written to {args.output}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    stats = describe(_load(args))
    if args.json:
        _emit(stats, None)
        return 0
    print("n\tm\td_mean\td_max\tP(d=1)\ts_mean\ts_max\tD\tconnected\tcomponents")
    print(
        f"{stats.n}\t{stats.m}\t{stats.mean_degree:.3f}\t{stats.max_degree}\t"
        f"{stats.degree_one_fraction:.3f}\t{stats.mean_size:.3f}\t{stats.max_size}\t"
        f"{stats.incidences}\t{str(stats.connected).lower()}\t{stats.components}"
    )
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    budget = QueryBudget(
        max_node_queries=args.max_node_queries,
        max_hyperedge_queries=args.max_hyperedge_queries,
    )
    rng_seed = args.rng_seed
    if rng_seed is None:
        rng_seed = entropy_seed()
        print(f"rng seed: {rng_seed}", file=sys.stderr)

    remote = None
    if args.endpoint:
        if args.seed_node is None:
            raise argparse.ArgumentTypeError("--seed-node is required with --endpoint")
        remote = connect_remote(args.endpoint, budget=budget)
        oracle: QueryOracle = remote
        seed_node = args.seed_node
        namespace = args.endpoint
    else:
        hypergraph = _load(args)
        oracle = InMemoryOracle(hypergraph).view(budget)
        seed_node = args.seed_node
        if seed_node is None:
            seed_node = random_seed_node(hypergraph, run_generator(rng_seed, 0))
            logger.info(f"Seed node {seed_node} drawn uniformly")
        # Keyed by content so that LCC, --no-lcc and edited loads never share entries
        namespace = f"{args.dataset or args.sizes}:{hypergraph.fingerprint()[:16]}"

    if args.memoize:
        oracle = MemoizingOracle(oracle, namespace=namespace)

    config = WalkConfig(
        walk_kind=args.walk,
        length=args.length,
        seed_node=seed_node,
        rng_seed=rng_seed,
        burn_in=args.burn_in,
    )
    try:
        seq = run_walk(oracle, config)
    finally:
        if remote is not None and hasattr(remote, "close"):
            remote.close()

    write_sequence(seq, args.output)
    header = seq.header().model_dump(mode="json", exclude={"degrees", "sizes"})
    _emit(header, args.stats)
    logger.info(f"{len(seq)} steps written to {args.output}")
    return EXIT_TRUNCATED if seq.truncated else 0


def _feature(args: argparse.Namespace, kind: EntityKind) -> FeatureFunction:
    if args.property == "avg-degree":
        return FeatureFunction.degree()
    if args.property == "avg-size":
        return FeatureFunction.size()
    if args.attributes_file is None:
        raise argparse.ArgumentTypeError(f"{args.property} needs --attributes-file")
    table = read_label_table(args.attributes_file)
    try:
        values = {label: float(value) for label, value in table.items()}
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"non-numeric attribute: {e}") from e
    return FeatureFunction.attribute(kind, values, name=args.attributes_file.stem)


def _kind(args: argparse.Namespace) -> EntityKind:
    if args.property in ("avg-degree", "degree-pmf", "degree-ccdf"):
        return EntityKind.NODE
    if args.property in ("avg-size", "size-pmf", "size-ccdf"):
        return EntityKind.HYPEREDGE
    if args.kind is None:
        raise argparse.ArgumentTypeError(f"{args.property} needs --kind node|hyperedge")
    return EntityKind(args.kind)


def cmd_estimate(args: argparse.Namespace) -> int:
    burn_in = args.burn_in
    if burn_in is None:
        burn_in = PRESETS[args.preset]["burn_in"] if args.preset else 0
    seq = read_sequence(args.sequence)
    kind = _kind(args)
    pred = None
    if args.subset_file is not None:
        pred = SubsetPredicate.members(
            kind, read_label_set(args.subset_file), name=args.subset_file.stem
        )

    if args.trajectory_every:
        if args.property.endswith(("-pmf", "-ccdf")) or args.property == "composition":
            raise argparse.ArgumentTypeError("--trajectory-every needs a scalar property")
        checkpoints = range(burn_in + args.trajectory_every, len(seq) + 1, args.trajectory_every)
        points = estimators.estimate_trajectory(
            seq, _feature(args, kind), list(checkpoints), pred=pred, burn_in=burn_in
        )
        _write_rows(args.output, ["r", "estimate"], [(p.length, p.estimate) for p in points])
        return 0

    if args.property in ("degree-pmf", "size-pmf", "degree-ccdf", "size-ccdf"):
        mode = args.property.rsplit("-", 1)[1]
        report = estimators.estimate_distribution(seq, kind, mode=mode, burn_in=burn_in, pred=pred)
        if args.format == "csv":
            _write_distribution(report, args.output)
        else:
            _emit(report, args.output)
        return 0

    if args.property == "composition":
        if args.attributes_file is None:
            raise argparse.ArgumentTypeError("composition needs --attributes-file")
        report = estimators.estimate_composition(
            seq, kind, read_label_table(args.attributes_file), pred=pred, burn_in=burn_in
        )
        if args.format == "csv":
            _write_rows(args.output, ["category", "proportion"], report.proportions.items())
        else:
            _emit(report, args.output)
        return 0

    report = estimators.estimate(seq, _feature(args, kind), pred=pred, burn_in=burn_in)
    _emit(report, args.output)
    return 0


def _write_rows(output: Path | None, header: list[str], rows) -> None:
    handle = sys.stdout if output is None else open(output, "w", encoding="utf-8", newline="")
    try:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if output is not None:
            handle.close()


def _write_distribution(report: DistributionReport, output: Path | None) -> None:
    _write_rows(output, ["value", report.mode], sorted(report.values.items()))


def cmd_verify(args: argparse.Namespace) -> int:
    # The input is checked as given: a disconnected file is a reducible chain
    hypergraph = _load(args, lcc=False)
    report = markov.verify_uniform_stationarity(hypergraph, tol=args.tol)
    _emit(report, args.output)
    if not report.connected:
        return EXIT_DATA
    if args.dump_matrix is not None:
        count = markov.write_matrix(markov.build_nb_ho_matrix(hypergraph), args.dump_matrix)
        logger.info(f"{count} non-zero entries written to {args.dump_matrix}")
    if args.empirical:
        for walk in WalkKind:
            comparison = markov.empirical_vs_exact(
                hypergraph, walk, args.empirical, runs=args.runs, master_seed=args.rng_seed
            )
            print(
                f"{walk}: max deviation {comparison.max_deviation:.4g} "
                f"over {comparison.transitions} transitions",
                file=sys.stderr,
            )
    return 0 if report.passed else 1


def cmd_nrmse(args: argparse.Namespace) -> int:
    if args.spec is not None:
        spec = harness.read_experiment_spec(args.spec)
    else:
        if args.dataset_ref is None:
            raise argparse.ArgumentTypeError("give --spec or --dataset")
        fields = {
            "dataset": args.dataset_ref,
            "runs": args.runs,
            "master_seed": args.master_seed,
            "burn_in": args.burn_in,
            "workers": args.workers,
            "keep_errors": args.keep_errors,
        }
        if args.walks:
            fields["walks"] = args.walks
        if args.lengths:
            fields["lengths"] = args.lengths
        if args.metrics:
            fields["metrics"] = args.metrics
        spec = ExperimentSpec.model_validate(fields)

    result = harness.run_experiment(spec)
    harness.write_nrmse_csv(result, args.output)
    if args.pointwise is not None:
        harness.write_pointwise_csv(result, args.pointwise)
    if args.ratios is not None:
        harness.write_ratio_csv(result, args.ratios)
    if args.queries is not None:
        harness.write_queries_csv(result, args.queries)
    if args.json is not None:
        _emit(result, args.json)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    hypergraph = _load(args)
    if args.protocol == "line":
        server = LineOracleServer(hypergraph, host=args.host, port=args.port)
        asyncio.run(server.serve_forever())
        return 0

    from src.main import create_app

    uvicorn.run(create_app(hypergraph), host=args.host, port=args.port)
    return 0


# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(
        prog="hypersample",
        description="Random-walk sampling and estimation on hypergraphs.",
    )
    parser.add_argument("--log-level", default=settings.log_level, help="Logging level")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    p = commands.add_parser("convert", help="Rewrite sizes + members files as an edge list")
    p.add_argument("--sizes", type=Path, required=True)
    p.add_argument("--members", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(handler=cmd_convert)

    p = commands.add_parser("stats", help="Basic properties of a hypergraph")
    _add_input(p)
    p.add_argument("--json", action="store_true", help="Print a JSON record")
    p.set_defaults(handler=cmd_stats)

    p = commands.add_parser("sample", help="Run a random walk and write its sample sequence")
    _add_input(p)
    p.add_argument("--endpoint", help="Remote oracle, tcp://host:port or http://host:port")
    p.add_argument("--walk", type=WalkKind, choices=list(WalkKind), required=True)
    p.add_argument("--length", type=positive_int, required=True)
    p.add_argument("--seed-node", help="Label of the starting node (random when omitted)")
    p.add_argument("--rng-seed", type=non_negative_int, help="Drawn from system entropy if absent")
    p.add_argument("--burn-in", type=non_negative_int, default=0)
    p.add_argument("--max-node-queries", type=non_negative_int)
    p.add_argument("--max-hyperedge-queries", type=non_negative_int)
    p.add_argument("--memoize", action="store_true", help="Cache neighborhood answers")
    p.add_argument("--output", type=Path, required=True, help="Sample sequence file")
    p.add_argument("--stats", type=Path, help="Write the run header as JSON here (else stdout)")
    p.set_defaults(handler=cmd_sample)

    p = commands.add_parser("estimate", help="Estimate a property from a sample sequence")
    p.add_argument("--sequence", type=Path, required=True)
    p.add_argument("--property", choices=PROPERTIES, required=True)
    p.add_argument("--kind", choices=[k.value for k in EntityKind])
    p.add_argument("--burn-in", type=non_negative_int)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--subset-file", type=Path, help="Labels of the subset, one per line")
    p.add_argument("--attributes-file", type=Path, help="'label value' lines")
    p.add_argument("--trajectory-every", type=positive_int)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", type=Path)
    p.set_defaults(handler=cmd_estimate)

    p = commands.add_parser("verify", help="Exact check of the non-backtracking chain")
    _add_input(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--dump-matrix", type=Path, help="Write U as 'row col value' lines")
    p.add_argument("--empirical", type=positive_int, help="Also simulate walks of this length")
    p.add_argument("--runs", type=positive_int, default=1)
    p.add_argument("--rng-seed", type=non_negative_int, default=0)
    p.add_argument("--output", type=Path)
    p.set_defaults(handler=cmd_verify)

    p = commands.add_parser("nrmse", help="NRMSE experiment over repeated walks")
    p.add_argument("--spec", type=Path, help="key=value experiment file")
    p.add_argument("--dataset", dest="dataset_ref", help="Dataset file or synthetic:...")
    p.add_argument("--walks", nargs="+", type=WalkKind, choices=list(WalkKind))
    p.add_argument("--lengths", nargs="+", type=positive_int)
    p.add_argument("--metrics", nargs="+", choices=PROPERTIES[:6])
    p.add_argument("--runs", type=positive_int, default=1000)
    p.add_argument("--master-seed", type=non_negative_int, default=0)
    p.add_argument("--burn-in", type=non_negative_int, default=0)
    p.add_argument("--workers", type=positive_int, default=settings.nrmse_workers)
    p.add_argument("--keep-errors", action="store_true")
    p.add_argument("--output", type=Path, required=True, help="NRMSE CSV")
    p.add_argument("--pointwise", type=Path, help="Per-value NRMSE CSV")
    p.add_argument("--ratios", type=Path, help="Per-value NB-HO-RW / HO-RW ratio CSV")
    p.add_argument("--queries", type=Path, help="Query count and repetition CSV")
    p.add_argument("--json", type=Path, help="Full result as JSON")
    p.set_defaults(handler=cmd_nrmse)

    p = commands.add_parser("serve", help="Serve a hypergraph as a query oracle")
    _add_input(p)
    p.add_argument("--protocol", choices=["line", "http"], default="line")
    p.add_argument("--host", default=settings.host)
    p.add_argument("--port", type=int, default=settings.port)
    p.set_defaults(handler=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    logging.getLogger("urllib3").setLevel(logging.WARNING)

    if args.command == "sample" and args.endpoint is None and settings.oracle_endpoint:
        if args.dataset is None and args.sizes is None and args.members is None:
            args.endpoint = settings.oracle_endpoint
    if args.command in ("stats", "sample", "verify", "serve"):
        _check_input(parser, args, remote=bool(getattr(args, "endpoint", None)))

    try:
        return args.handler(args)
    except argparse.ArgumentTypeError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(f"{parser.prog}: invalid parameters: {e}", file=sys.stderr)
        return EXIT_USAGE
    except HypergraphSamplingError as e:
        print(f"{parser.prog}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"{parser.prog}: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
