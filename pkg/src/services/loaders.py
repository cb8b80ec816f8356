"""Dataset readers and writers for hypergraph corpora and side tables."""

import logging
from pathlib import Path

from src.exceptions import FormatError
from src.models.hypergraph import Hypergraph

logger = logging.getLogger(__name__)


def read_edgelist(path: str | Path) -> list[list[str]]:
    """
    Read one hyperedge per line, node labels separated by whitespace.

    Blank lines and lines starting with '#' are skipped.
    """
    hyperedges: list[list[str]] = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            hyperedges.append(stripped.split())
    return hyperedges


def read_sizes_members(sizes_path: str | Path, members_path: str | Path) -> list[list[str]]:
    """
    Read the two-file corpus convention.

    Line k of the sizes file holds s_k; the members file lists sum(s_k) node
    labels in hyperedge order, separated by whitespace (usually one per line).
    """
    sizes: list[int] = []
    with open(sizes_path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                size = int(stripped)
            except ValueError:
                raise FormatError(f"{sizes_path}:{lineno}: not an integer: {stripped!r}") from None
            if size < 0:
                raise FormatError(f"{sizes_path}:{lineno}: negative size {size}")
            sizes.append(size)

    members = Path(members_path).read_text(encoding="utf-8").split()
    expected = sum(sizes)
    if len(members) != expected:
        raise FormatError(
            f"Members file lists {len(members)} labels but the sizes sum to {expected}"
        )

    hyperedges: list[list[str]] = []
    offset = 0
    for size in sizes:
        hyperedges.append(members[offset : offset + size])
        offset += size
    return hyperedges


def write_edgelist(hypergraph: Hypergraph, path: str | Path) -> None:
    """Write the canonical one-hyperedge-per-line form."""
    with open(path, "w", encoding="utf-8") as handle:
        for members in hypergraph.export():
            handle.write(" ".join(members) + "\n")


def convert(sizes_path: str | Path, members_path: str | Path, output_path: str | Path) -> int:
    """
    Convert a sizes + members corpus to the one-hyperedge-per-line format.

    Hyperedges are written verbatim (no validation, no component extraction),
    one output line per input hyperedge. Returns the number of hyperedges written.
    """
    hyperedges = read_sizes_members(sizes_path, members_path)
    with open(output_path, "w", encoding="utf-8") as handle:
        for members in hyperedges:
            handle.write(" ".join(members) + "\n")
    logger.info(f"Converted {len(hyperedges)} hyperedges to {output_path}")
    return len(hyperedges)


def load_hypergraph(
    path: str | Path | None = None,
    sizes_path: str | Path | None = None,
    members_path: str | Path | None = None,
    lcc: bool = True,
    drop_singletons: bool = False,
) -> Hypergraph:
    """
    Load a hypergraph from either input format.

    Args:
        path: One-hyperedge-per-line file.
        sizes_path: Sizes file of the two-file format.
        members_path: Members file of the two-file format.
        lcc: Restrict to the largest connected component.
        drop_singletons: Skip single-member hyperedges instead of failing.
    """
    if path is not None:
        if sizes_path is not None or members_path is not None:
            raise ValueError("Give either an edge list or a sizes/members pair, not both")
        hyperedges = read_edgelist(path)
        source = str(path)
    elif sizes_path is not None and members_path is not None:
        hyperedges = read_sizes_members(sizes_path, members_path)
        source = f"{sizes_path}+{members_path}"
    else:
        raise ValueError("No hypergraph input given")

    hypergraph = Hypergraph.build(hyperedges, drop_singletons=drop_singletons)
    logger.info(f"Loaded {hypergraph!r} from {source}")

    if lcc:
        component = hypergraph.largest_connected_component()
        if component is not hypergraph:
            logger.warning(
                f"Input is not connected; keeping the largest component "
                f"({component.node_count}/{hypergraph.node_count} nodes)"
            )
        hypergraph = component
    return hypergraph


def read_label_table(path: str | Path) -> dict[str, str]:
    """Read 'label value' pairs, one per line; the value is the rest of the line."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split(maxsplit=1)
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'label value'")
            table[parts[0]] = parts[1]
    return table


def read_label_set(path: str | Path) -> set[str]:
    """Read one label per line."""
    with open(path, encoding="utf-8") as handle:
        return {
            line.strip() for line in handle if line.strip() and not line.strip().startswith("#")
        }
