"""Node paths on 8-connected grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Tuple

from .errors import DataError

Node = Tuple[int, int]


def chebyshev(a: Node, b: Node) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


@dataclass(frozen=True)
class Path:
    """An ordered source-to-target node sequence.

    Consecutive nodes must be 8-adjacent and no node may repeat. Endpoint
    roles (source first, target last) are fixed by construction.
    """

    nodes: Tuple[Node, ...]

    def __post_init__(self) -> None:
        nodes = tuple((int(r), int(c)) for r, c in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if len(nodes) < 2:
            raise DataError("a path needs at least a source and a target node")
        if len(set(nodes)) != len(nodes):
            raise DataError("path revisits a node")
        for a, b in zip(nodes, nodes[1:]):
            if chebyshev(a, b) != 1:
                raise DataError(f"path step {a} -> {b} is not 8-adjacent")

    @property
    def source(self) -> Node:
        return self.nodes[0]

    @property
    def target(self) -> Node:
        return self.nodes[-1]

    def __len__(self) -> int:
        return len(self.nodes)

    def __iter__(self) -> Iterator[Node]:
        return iter(self.nodes)

    def node_set(self) -> frozenset:
        return frozenset(self.nodes)

    def as_lists(self) -> list:
        return [[r, c] for r, c in self.nodes]


def degree_constraint_ok(path: Path) -> bool:
    """Check the path-labelling degree rule.

    Endpoints must have exactly one grid-adjacent node on the path and every
    interior node exactly two. Violations mean the path doubles back next to
    itself, which a cost-minimal path never does.
    """
    members = path.node_set()
    for idx, node in enumerate(path.nodes):
        adjacent = sum(
            1
            for other in members
            if other != node and chebyshev(node, other) == 1
        )
        expected = 1 if idx in (0, len(path.nodes) - 1) else 2
        if adjacent != expected:
            return False
    return True


def path_from_pairs(pairs: Iterable) -> Path:
    return Path(tuple((int(r), int(c)) for r, c in pairs))
