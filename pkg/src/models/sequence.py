"""Sample sequences L = (X_1, Y_1, ..., X_r, Y_r) and their text serialization."""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.exceptions import FormatError
from src.models.schemas import QueryStats, SequenceHeader, WalkConfig


@dataclass(frozen=True, eq=False)
class SampleSequence:
    """
    Ordered trace of a walk.

    nodes[k] / hyperedges[k] are the labels of X_{k+1} / Y_{k+1}; degrees[k] and
    sizes[k] are d_{X_{k+1}} and s_{Y_{k+1}} as observed from the oracle answers.
    """

    nodes: tuple[str, ...]
    hyperedges: tuple[str, ...]
    degrees: np.ndarray
    sizes: np.ndarray
    stats: QueryStats = field(default_factory=QueryStats)
    truncated: bool = False
    config: WalkConfig | None = None
    unique_stats: QueryStats | None = None

    def __post_init__(self):
        n = len(self.nodes)
        if not (len(self.hyperedges) == len(self.degrees) == len(self.sizes) == n):
            raise ValueError("nodes, hyperedges, degrees and sizes must have equal length")

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def steps(self) -> list[tuple[str, str]]:
        return list(zip(self.nodes, self.hyperedges, strict=True))

    def tail(self, burn_in: int) -> "SampleSequence":
        """The steps after the first burn_in ones."""
        if burn_in < 0:
            raise ValueError("burn_in must be non-negative")
        return replace(
            self,
            nodes=self.nodes[burn_in:],
            hyperedges=self.hyperedges[burn_in:],
            degrees=self.degrees[burn_in:],
            sizes=self.sizes[burn_in:],
        )

    def prefix(self, length: int) -> "SampleSequence":
        return replace(
            self,
            nodes=self.nodes[:length],
            hyperedges=self.hyperedges[:length],
            degrees=self.degrees[:length],
            sizes=self.sizes[:length],
        )

    def header(self) -> SequenceHeader:
        if self.config is None:
            raise ValueError("A sequence without its walk configuration cannot be serialized")
        return SequenceHeader(
            config=self.config,
            stats=self.stats,
            truncated=self.truncated,
            steps=len(self),
            unique_stats=self.unique_stats,
            degrees={x: int(d) for x, d in zip(self.nodes, self.degrees, strict=True)},
            sizes={y: int(s) for y, s in zip(self.hyperedges, self.sizes, strict=True)},
        )


def write_sequence(seq: SampleSequence, path: str | Path) -> None:
    """JSON header on the first line, then one 'k X_label Y_label' line per step (k from 1)."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(seq.header().model_dump_json() + "\n")
        for k, (x, y) in enumerate(zip(seq.nodes, seq.hyperedges, strict=True), start=1):
            handle.write(f"{k} {x} {y}\n")


def read_sequence(path: str | Path) -> SampleSequence:
    with open(path, encoding="utf-8") as handle:
        first = handle.readline()
        try:
            header = SequenceHeader.model_validate(json.loads(first))
        except (json.JSONDecodeError, ValidationError) as e:
            raise FormatError(f"{path}: invalid sequence header: {e}") from e

        nodes: list[str] = []
        hyperedges: list[str] = []
        for lineno, line in enumerate(handle, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3 or parts[0] != str(len(nodes) + 1):
                raise FormatError(f"{path}:{lineno}: expected '{len(nodes) + 1} X Y'")
            nodes.append(parts[1])
            hyperedges.append(parts[2])

    if len(nodes) != header.steps:
        raise FormatError(f"{path}: header announces {header.steps} steps, found {len(nodes)}")
    try:
        degrees = np.array([header.degrees[x] for x in nodes], dtype=np.int64)
        sizes = np.array([header.sizes[y] for y in hyperedges], dtype=np.int64)
    except KeyError as e:
        raise FormatError(f"{path}: no observed degree/size recorded for {e}") from None

    return SampleSequence(
        nodes=tuple(nodes),
        hyperedges=tuple(hyperedges),
        degrees=degrees,
        sizes=sizes,
        stats=header.stats,
        truncated=header.truncated,
        config=header.config,
        unique_stats=header.unique_stats,
    )
