"""Exception hierarchy shared by the library, the CLI and the HTTP oracle."""

EXIT_TRUNCATED = 2
EXIT_DEGENERATE = 3
EXIT_USAGE = 64
EXIT_DATA = 65


class HypergraphSamplingError(Exception):
    """Base class for every error raised by this package."""

    exit_code: int = EXIT_DATA


# Hypergraph construction and loading


class HypergraphError(HypergraphSamplingError):
    """Invalid hypergraph input."""


class EmptyInput(HypergraphError):
    def __init__(self, message: str = "No hyperedges in input"):
        super().__init__(message)


class HyperedgeTooSmall(HypergraphError):
    def __init__(self, hyperedge: int, size: int):
        self.hyperedge = hyperedge
        self.size = size
        super().__init__(f"Hyperedge {hyperedge} has {size} member(s), at least 2 required")


class DuplicateMember(HypergraphError):
    def __init__(self, hyperedge: int, node: str):
        self.hyperedge = hyperedge
        self.node = node
        super().__init__(f"Node {node} appears more than once in hyperedge {hyperedge}")


class DuplicateHyperedgeLabel(HypergraphError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"Hyperedge label {label} is used more than once")


class IndexOutOfRange(HypergraphError, IndexError):
    def __init__(self, kind: str, index: int, bound: int):
        self.kind = kind
        self.index = index
        super().__init__(f"{kind} index {index} out of range [0, {bound})")


class FormatError(HypergraphError):
    """Malformed dataset, trace or configuration file."""


# Query oracle


class OracleError(HypergraphSamplingError):
    """Failure answering a neighborhood query."""


class UnknownNode(OracleError, KeyError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"Unknown node: {node}")

    def __str__(self) -> str:
        return self.args[0]


class UnknownHyperedge(OracleError, KeyError):
    def __init__(self, hyperedge):
        self.hyperedge = hyperedge
        super().__init__(f"Unknown hyperedge: {hyperedge}")

    def __str__(self) -> str:
        return self.args[0]


class BudgetExhausted(OracleError):
    def __init__(self, kind: str, limit: int):
        self.kind = kind
        self.limit = limit
        super().__init__(f"{kind} query budget of {limit} exhausted")


class RemoteOracleError(OracleError):
    """Transport or protocol failure talking to a remote oracle."""


# Walks


class WalkError(HypergraphSamplingError):
    pass


class UnknownSeedNode(WalkError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"Seed node {label} does not exist")


class NotIncident(WalkError):
    def __init__(self, node, hyperedge):
        self.node = node
        self.hyperedge = hyperedge
        super().__init__(f"Hyperedge {hyperedge} is not incident to node {node}")


class SequenceTooShort(WalkError):
    def __init__(self, length: int, required: int = 2):
        self.length = length
        super().__init__(f"Sequence of length {length} is shorter than {required}")


# Estimation


class EstimationError(HypergraphSamplingError):
    exit_code = EXIT_DEGENERATE


class EmptySample(EstimationError):
    def __init__(self, message: str = "No samples left after burn-in"):
        super().__init__(message)


class ZeroDenominator(EstimationError):
    def __init__(self, message: str = "No sampled element satisfies the subset predicate"):
        super().__init__(message)


class MissingCategory(EstimationError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"No category assigned to sampled element {label}")


# Exact chain analysis


class AnalysisError(HypergraphSamplingError):
    pass


class NoConvergence(AnalysisError):
    def __init__(self, max_iters: int, residual: float):
        self.max_iters = max_iters
        self.residual = residual
        super().__init__(f"No convergence after {max_iters} iterations (residual {residual:.3e})")


class InsufficientVisits(AnalysisError):
    def __init__(self, unvisited: int):
        self.unvisited = unvisited
        super().__init__(f"{unvisited} state(s) were never left by the sampled walks")


class TooLarge(AnalysisError):
    def __init__(self, states: int, limit: int):
        self.states = states
        self.limit = limit
        super().__init__(f"State space of size {states} exceeds the analysis limit {limit}")


# Evaluation harness


class HarnessError(HypergraphSamplingError):
    pass


class ZeroTruth(HarnessError):
    def __init__(self):
        super().__init__("Relative error is undefined for a zero true value")


class InfeasibleParameters(HarnessError):
    exit_code = EXIT_USAGE
