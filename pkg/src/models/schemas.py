"""Pydantic models for configuration records, reports and HTTP response bodies."""

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        __str__ = str.__str__
        __format__ = str.__format__
from typing import Any

from pydantic import BaseModel, Field, model_validator


class WalkKind(StrEnum):
    """Hyperedge selection rule of a random walk."""

    P_RW = "p-rw"  # weight s - 1
    C_RW = "c-rw"  # weight (s - 1)^2
    HO_RW = "ho-rw"  # uniform
    NB_HO_RW = "nb-ho-rw"  # uniform, never the previous hyperedge unless d = 1


class EntityKind(StrEnum):
    NODE = "node"
    HYPEREDGE = "hyperedge"


class QueryStats(BaseModel):
    """Neighborhood query counters, duplicates included."""

    node_queries: int = Field(0, ge=0, description="Number of node queries issued")
    hyperedge_queries: int = Field(0, ge=0, description="Number of hyperedge queries issued")


class QueryBudget(BaseModel):
    """Hard caps on the number of queries; None means unlimited."""

    max_node_queries: int | None = Field(None, ge=0, description="Node query limit")
    max_hyperedge_queries: int | None = Field(None, ge=0, description="Hyperedge query limit")


class WalkConfig(BaseModel):
    """Parameters of a single random walk."""

    walk_kind: WalkKind = Field(..., description="Hyperedge selection rule")
    length: int = Field(..., ge=1, description="Number of (node, hyperedge) steps r")
    seed_node: str = Field(..., description="Label of the starting node")
    rng_seed: int = Field(..., ge=0, lt=2**64, description="Seed of the walk's PCG64 stream")
    burn_in: int = Field(0, ge=0, description="Steps discarded before estimation")

    @model_validator(mode="after")
    def _burn_in_below_length(self) -> "WalkConfig":
        if self.burn_in >= self.length:
            raise ValueError(
                f"burn_in ({self.burn_in}) must be smaller than length ({self.length})"
            )
        return self


class SequenceHeader(BaseModel):
    """JSON header line of a serialized sample sequence."""

    config: WalkConfig
    stats: QueryStats
    truncated: bool = False
    steps: int = Field(..., ge=0, description="Number of recorded steps")
    unique_stats: QueryStats | None = Field(
        None, description="Deduplicated query counts when memoization was enabled"
    )
    degrees: dict[str, int] = Field(default_factory=dict, description="Observed node degrees")
    sizes: dict[str, int] = Field(default_factory=dict, description="Observed hyperedge sizes")


class EstimateReport(BaseModel):
    """Ratio estimate Phi / Psi with its accumulators and run metadata."""

    property: str = Field(..., description="Name of the estimated property")
    kind: EntityKind
    estimate: float | None = Field(..., description="Phi / Psi, None when Psi is zero")
    phi: float = Field(..., description="Mean of f(x) / w(x) over the used samples")
    psi: float = Field(..., description="Mean of 1 / w(x) over the used samples")
    samples: int = Field(..., ge=0, description="Number of steps used after burn-in")
    burn_in: int = Field(0, ge=0)
    subset: str | None = Field(None, description="Name of the subset predicate, if any")
    config: WalkConfig | None = Field(None, description="Echo of the walk configuration")


class DistributionReport(BaseModel):
    """Estimated pmf or ccdf of degrees or sizes over the observed support."""

    property: str
    kind: EntityKind
    mode: str = Field(..., description="pmf or ccdf")
    values: dict[int, float] = Field(..., description="Support value -> probability")
    psi: float
    samples: int = Field(..., ge=0)
    burn_in: int = Field(0, ge=0)
    subset: str | None = None
    config: WalkConfig | None = None


class CompositionReport(BaseModel):
    """Estimated proportion of each category among nodes or hyperedges."""

    property: str
    kind: EntityKind
    proportions: dict[str, float] = Field(..., description="Category -> proportion")
    psi: float
    samples: int = Field(..., ge=0)
    burn_in: int = Field(0, ge=0)
    subset: str | None = None
    config: WalkConfig | None = None


class TrajectoryPoint(BaseModel):
    length: int = Field(..., description="Prefix length r' of the sequence")
    estimate: float | None


class HypergraphStats(BaseModel):
    """Basic properties of a hypergraph, one row of a dataset summary table."""

    n: int
    m: int
    incidences: int = Field(..., description="D = sum of degrees")
    mean_degree: float
    max_degree: int
    degree_one_fraction: float = Field(..., description="P(d_i = 1)")
    mean_size: float
    max_size: int
    connected: bool
    components: int


class VerificationReport(BaseModel):
    """Exact check of the non-backtracking chain on the incidence state space."""

    connected: bool
    states: int = Field(0, description="D, the number of incidence pairs")
    row_sum_max_dev: float | None = None
    column_sum_max_dev: float | None = None
    stationarity_residual: float | None = Field(
        None, description="L1 norm of u^T - u^T U for the uniform vector u"
    )
    irreducible: bool | None = None
    period: int | None = None
    aperiodic: bool | None = None
    tolerance: float
    passed: bool
    notes: list[str] = Field(default_factory=list)


class EmpiricalComparison(BaseModel):
    """Empirical transition frequencies against an analytic transition matrix."""

    walk_kind: WalkKind
    level: str = Field(..., description="'state' for (node, hyperedge) pairs, 'node' for nodes")
    max_deviation: float
    transitions: int
    visits: dict[str, int] = Field(default_factory=dict, description="Row label -> departures")
    counts: dict[str, int] = Field(default_factory=dict, description="'row->col' -> transitions")


class ExperimentSpec(BaseModel):
    """Declarative description of an NRMSE / query comparison experiment."""

    dataset: str = Field(..., description="Dataset path or name used in result rows")
    walks: list[WalkKind] = Field(default_factory=lambda: [WalkKind.HO_RW, WalkKind.NB_HO_RW])
    lengths: list[int] = Field(default_factory=lambda: [100, 1000, 10000])
    runs: int = Field(1000, ge=1)
    metrics: list[str] = Field(
        default_factory=lambda: ["avg-degree", "degree-pmf", "avg-size", "size-pmf"]
    )
    master_seed: int = Field(0, ge=0)
    burn_in: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    keep_errors: bool = Field(False, description="Keep per-run errors in the results")

    @model_validator(mode="after")
    def _lengths_ascending(self) -> "ExperimentSpec":
        if not self.lengths or any(r < 1 for r in self.lengths):
            raise ValueError("lengths must be a non-empty list of positive integers")
        if self.lengths != sorted(self.lengths):
            raise ValueError("lengths must be ascending")
        if any(self.burn_in >= r for r in self.lengths):
            raise ValueError("burn_in must be smaller than every length")
        return self


class NrmseResult(BaseModel):
    dataset: str
    walk: WalkKind
    length: int
    metric: str
    nrmse: float = Field(..., ge=0)
    runs: int
    errors: list[float] | None = None


class PointwiseNrmse(BaseModel):
    """NRMSE of a single pmf entry, e.g. P(d_i = d) for one d."""

    dataset: str
    metric: str
    value: int
    walk: WalkKind
    length: int
    nrmse: float


class QueryComparison(BaseModel):
    dataset: str
    walk: WalkKind
    length: int
    runs: int
    mean_node_queries: float
    mean_hyperedge_queries: float
    mean_hyperedge_repetition: float
    mean_node_repetition: float


class ExperimentResult(BaseModel):
    spec: ExperimentSpec
    nrmse: list[NrmseResult] = Field(default_factory=list)
    pointwise: list[PointwiseNrmse] = Field(default_factory=list)
    queries: list[QueryComparison] = Field(default_factory=list)
    seed_nodes: dict[str, list[str]] = Field(
        default_factory=dict, description="Seed node used by each run, keyed by 'walk:r'"
    )


# HTTP oracle bodies


class NeighborhoodResponse(BaseModel):
    """Answer to a node or hyperedge query."""

    label: str = Field(..., description="Queried node or hyperedge label")
    neighbors: list[str] = Field(..., description="Incident hyperedges or member nodes")


class HealthResponse(BaseModel):
    status: str = Field(..., description="Service status")
    version: str = Field(..., description="Service version")
    dataset: dict[str, Any] | None = Field(None, description="n, m of the served hypergraph")


class ErrorResponse(BaseModel):
    error: str = Field(..., description="Error message")
    detail: str | None = Field(None, description="Additional error details")
