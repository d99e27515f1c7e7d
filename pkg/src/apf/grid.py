"""Grid maps, file parsers, problem instances, and maze generation.

A map is an H x W field of per-cell traversal costs plus a passability mask.
Connectivity is 8-way with unit move cost in all eight directions, so path
length in node count doubles as accumulated cost on uniform maps.
"""

from __future__ import annotations

import json
import math
import random
from collections import deque
from dataclasses import dataclass, replace
from pathlib import Path as FsPath
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import DataError
from .paths import Node, Path, chebyshev, path_from_pairs

# Row-major scan of the 3x3 window, center excluded. Fixed so neighbor order
# (and therefore tie-breaking everywhere downstream) is reproducible.
NEIGHBOR_OFFSETS = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)

PASSABLE_CHARS = frozenset(".G")
IMPASSABLE_CHARS = frozenset("@OTW")


class GridMap:
    """Immutable occupancy/cost field over an H x W grid."""

    __slots__ = ("passable", "costs", "_nbr_table", "_cost_rows")

    def __init__(self, passable, costs) -> None:
        passable = np.ascontiguousarray(passable, dtype=bool)
        costs = np.ascontiguousarray(costs, dtype=float)
        if passable.ndim != 2:
            raise DataError(f"passable mask must be 2-D, got shape {passable.shape}")
        if costs.shape != passable.shape:
            raise DataError(
                f"costs shape {costs.shape} does not match mask shape {passable.shape}"
            )
        h, w = passable.shape
        if h < 2 or w < 2:
            raise DataError(f"grid must be at least 2x2, got {h}x{w}")
        masked = costs[passable]
        if masked.size and not np.all(np.isfinite(masked)):
            raise DataError("passable cells must have finite costs")
        if masked.size and np.any(masked < 0):
            raise DataError("cell costs must be non-negative")
        passable.setflags(write=False)
        costs.setflags(write=False)
        self.passable = passable
        self.costs = costs
        self._nbr_table: Optional[Dict[Node, Tuple[Node, ...]]] = None
        self._cost_rows: Optional[List[List[float]]] = None

    @property
    def height(self) -> int:
        return self.passable.shape[0]

    @property
    def width(self) -> int:
        return self.passable.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.passable.shape

    def in_bounds(self, node: Node) -> bool:
        r, c = node
        return 0 <= r < self.height and 0 <= c < self.width

    def is_passable(self, node: Node) -> bool:
        return self.in_bounds(node) and bool(self.passable[node[0], node[1]])

    def flat_index(self, node: Node) -> int:
        return node[0] * self.width + node[1]

    def cost(self, node: Node) -> float:
        return float(self.costs[node[0], node[1]])

    def cost_rows(self) -> List[List[float]]:
        if self._cost_rows is None:
            self._cost_rows = self.costs.tolist()
        return self._cost_rows

    def neighbors(self, node: Node) -> Tuple[Node, ...]:
        """Passable 8-neighbors of a node in fixed row-major window order."""
        if not self.in_bounds(node):
            raise DataError(f"node {node} outside {self.height}x{self.width} grid")
        return self.neighbor_table()[node]

    def neighbor_table(self) -> Dict[Node, Tuple[Node, ...]]:
        if self._nbr_table is None:
            h, w = self.shape
            passable = self.passable
            table: Dict[Node, Tuple[Node, ...]] = {}
            for r in range(h):
                for c in range(w):
                    acc = []
                    for dr, dc in NEIGHBOR_OFFSETS:
                        nr, nc = r + dr, c + dc
                        if 0 <= nr < h and 0 <= nc < w and passable[nr, nc]:
                            acc.append((nr, nc))
                    table[(r, c)] = tuple(acc)
            self._nbr_table = table
        return self._nbr_table

    def passable_nodes(self) -> List[Node]:
        rs, cs = np.nonzero(self.passable)
        return [(int(r), int(c)) for r, c in zip(rs, cs)]

    def count_passable(self) -> int:
        return int(self.passable.sum())

    def is_uniform_cost(self) -> bool:
        """True when every passable cell shares one cost value (binary map)."""
        vals = self.costs[self.passable]
        return bool(vals.size) and bool(np.all(vals == vals.flat[0]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridMap):
            return NotImplemented
        return np.array_equal(self.passable, other.passable) and np.array_equal(
            self.costs, other.costs
        )

    def __repr__(self) -> str:
        return f"GridMap({self.height}x{self.width}, passable={self.count_passable()})"


def neighbors(grid: GridMap, node: Node) -> Tuple[Node, ...]:
    return grid.neighbors(node)


@dataclass(frozen=True)
class ProblemInstance:
    """A map with endpoints and an optional reference demonstration path."""

    grid: GridMap
    source: Node
    target: Node
    reference: Optional[Path] = None

    def __post_init__(self) -> None:
        source = (int(self.source[0]), int(self.source[1]))
        target = (int(self.target[0]), int(self.target[1]))
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        if source == target:
            raise DataError("source and target must differ")
        for name, node in (("source", source), ("target", target)):
            if not self.grid.is_passable(node):
                raise DataError(f"{name} {node} is not a passable cell")
        if self.reference is not None:
            if self.reference.source != source or self.reference.target != target:
                raise DataError("reference path endpoints do not match the instance")


def parse_movingai(text) -> GridMap:
    """Parse the MovingAI benchmark ``.map`` text format.

    Header is four lines: ``type octile``, ``height N``, ``width M``, ``map``,
    followed by N rows of M cell characters. ``.`` and ``G`` are passable with
    cost 1.0; ``@``, ``O``, ``T``, ``W`` are impassable.
    """
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise DataError(f"map file is not ASCII text: {exc}") from exc
    lines = text.splitlines()
    if len(lines) < 4:
        raise DataError("line 1: truncated header, expected 4 header lines")
    if lines[0].strip() != "type octile":
        raise DataError(f"line 1: expected 'type octile', got {lines[0]!r}")
    height = _parse_header_int(lines[1], "height", 2)
    width = _parse_header_int(lines[2], "width", 3)
    if lines[3].strip() != "map":
        raise DataError(f"line 4: expected 'map', got {lines[3]!r}")
    body = lines[4:]
    if len(body) < height:
        raise DataError(
            f"line {4 + len(body)}: expected {height} map rows, found {len(body)}"
        )
    extra = [i for i, row in enumerate(body[height:]) if row.strip()]
    if extra:
        raise DataError(f"line {5 + height + extra[0]}: unexpected content after map rows")
    passable = np.zeros((height, width), dtype=bool)
    for r in range(height):
        row = body[r]
        lineno = 5 + r
        if len(row) != width:
            raise DataError(
                f"line {lineno}: row has {len(row)} cells, expected {width}"
            )
        for c, ch in enumerate(row):
            if ch in PASSABLE_CHARS:
                passable[r, c] = True
            elif ch in IMPASSABLE_CHARS:
                passable[r, c] = False
            else:
                raise DataError(f"line {lineno}: unknown cell character {ch!r}")
    return GridMap(passable, np.ones((height, width), dtype=float))


def _parse_header_int(line: str, key: str, lineno: int) -> int:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise DataError(f"line {lineno}: expected '{key} <int>', got {line!r}")
    try:
        value = int(parts[1])
    except ValueError:
        raise DataError(f"line {lineno}: {key} is not an integer: {parts[1]!r}")
    if value < 2:
        raise DataError(f"line {lineno}: {key} must be >= 2, got {value}")
    return value


def write_movingai(grid: GridMap) -> str:
    """Serialize to canonical MovingAI text ('.'/'@' alphabet, LF endings)."""
    rows = [
        "".join("." if grid.passable[r, c] else "@" for c in range(grid.width))
        for r in range(grid.height)
    ]
    return (
        f"type octile\nheight {grid.height}\nwidth {grid.width}\nmap\n"
        + "\n".join(rows)
        + "\n"
    )


def parse_costmap(text: str) -> np.ndarray:
    """Parse a cost-map grid file.

    Plain-text form: first line ``H W``, then H whitespace-separated rows of W
    reals. CSV form (detected by commas): H rows of W comma-separated reals
    with no header line.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError("line 1: empty cost-map file")
    if "," in lines[0]:
        rows = []
        width = None
        for i, ln in enumerate(lines):
            vals = _parse_real_row(ln.split(","), i + 1)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise DataError(f"line {i + 1}: row has {len(vals)} values, expected {width}")
            rows.append(vals)
        return np.array(rows, dtype=float)
    head = lines[0].split()
    if len(head) != 2:
        raise DataError(f"line 1: expected 'H W' header, got {lines[0]!r}")
    try:
        h, w = int(head[0]), int(head[1])
    except ValueError:
        raise DataError(f"line 1: non-integer dimensions in {lines[0]!r}")
    if len(lines) - 1 != h:
        raise DataError(f"line {len(lines)}: expected {h} data rows, found {len(lines) - 1}")
    rows = []
    for i, ln in enumerate(lines[1:]):
        vals = _parse_real_row(ln.split(), i + 2)
        if len(vals) != w:
            raise DataError(f"line {i + 2}: row has {len(vals)} values, expected {w}")
        rows.append(vals)
    return np.array(rows, dtype=float)


def _parse_real_row(tokens, lineno: int) -> List[float]:
    vals = []
    for tok in tokens:
        tok = tok.strip()
        if not tok:
            continue
        try:
            vals.append(float(tok))
        except ValueError:
            raise DataError(f"line {lineno}: not a real number: {tok!r}")
    return vals


def write_costmap(values: np.ndarray) -> str:
    values = np.asarray(values, dtype=float)
    h, w = values.shape
    lines = [f"{h} {w}"]
    for r in range(h):
        lines.append(" ".join(repr(float(v)) for v in values[r]))
    return "\n".join(lines) + "\n"


def load_costmap(values, passable_threshold: float = math.inf) -> GridMap:
    """Build a map from a grid of per-cell costs.

    Every value must be finite and non-negative. Cells whose cost exceeds the
    threshold are masked impassable; with the default infinite threshold every
    cell is passable. Stored values are not rescaled.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
        raise DataError(f"cost map must be at least 2x2, got shape {arr.shape}")
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        r, c = bad[0]
        raise DataError(f"non-finite cost at ({r}, {c})")
    neg = np.argwhere(arr < 0)
    if neg.size:
        r, c = neg[0]
        raise DataError(f"negative cost at ({r}, {c})")
    passable = arr <= passable_threshold
    return GridMap(passable, arr)


def load_map_file(path) -> GridMap:
    """Load a map file, picking the parser from the file suffix."""
    path = FsPath(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read map file {path}: {exc}") from exc
    if path.suffix == ".map":
        return parse_movingai(text)
    return load_costmap(parse_costmap(text))


def load_instance(json_path, passable_threshold: float = math.inf) -> ProblemInstance:
    """Load a problem instance from its JSON descriptor.

    The descriptor holds ``map_path`` (resolved relative to the JSON file),
    ``source``, ``target``, and an optional ``reference`` node list.
    """
    json_path = FsPath(json_path)
    try:
        data = json.loads(json_path.read_text())
    except OSError as exc:
        raise DataError(f"cannot read instance file {json_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{json_path}: invalid JSON: {exc}") from exc
    for key in ("map_path", "source", "target"):
        if key not in data:
            raise DataError(f"{json_path}: missing required key {key!r}")
    map_path = FsPath(data["map_path"])
    if not map_path.is_absolute():
        map_path = json_path.parent / map_path
    grid = load_map_file(map_path)
    if not str(map_path).endswith(".map") and math.isfinite(passable_threshold):
        grid = load_costmap(grid.costs, passable_threshold)
    reference = None
    if data.get("reference") is not None:
        reference = path_from_pairs(data["reference"])
    return ProblemInstance(
        grid=grid,
        source=(int(data["source"][0]), int(data["source"][1])),
        target=(int(data["target"][0]), int(data["target"][1])),
        reference=reference,
    )


def save_instance(instance: ProblemInstance, json_path, map_filename: Optional[str] = None) -> None:
    """Write an instance as a JSON descriptor plus a sibling map file.

    Binary (uniform cost 1.0) maps are written as MovingAI ``.map``; other
    all-passable maps as cost-map text. Masked non-uniform maps cannot be
    represented by these formats.
    """
    json_path = FsPath(json_path)
    if map_filename is None:
        map_filename = json_path.stem + (".map" if _binary_like(instance.grid) else ".grid")
    map_path = json_path.parent / map_filename
    if str(map_path).endswith(".map"):
        if not _binary_like(instance.grid):
            raise DataError("MovingAI format only represents uniform cost-1 maps")
        map_path.write_text(write_movingai(instance.grid))
    else:
        if not bool(instance.grid.passable.all()):
            raise DataError("cost-map text format cannot represent impassable cells")
        map_path.write_text(write_costmap(instance.grid.costs))
    payload = {
        "map_path": map_filename,
        "source": list(instance.source),
        "target": list(instance.target),
        "reference": instance.reference.as_lists() if instance.reference else None,
    }
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _binary_like(grid: GridMap) -> bool:
    vals = grid.costs[grid.passable]
    return bool(vals.size) and bool(np.all(vals == 1.0))


def connected(grid: GridMap, source: Node, target: Node) -> bool:
    """Breadth-first reachability check over passable 8-neighbors."""
    if not grid.is_passable(source) or not grid.is_passable(target):
        return False
    table = grid.neighbor_table()
    seen = {source}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        if node == target:
            return True
        for nxt in table[node]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def generate_maze(
    height: int,
    width: int,
    obstacle_density: float,
    seed: int,
    max_retries: int = 200,
) -> ProblemInstance:
    """Generate a random connected binary maze instance.

    Obstacles are drawn cell-wise at the requested density; the draw is
    rejected and redone until source and target (uniform over passable cells,
    Chebyshev-separated by at least max(H, W)/2) are connected. The attached
    reference path is the Dijkstra solution. Deterministic for a fixed seed.
    """
    if height < 4 or width < 4:
        raise DataError(f"maze dimensions must be >= 4, got {height}x{width}")
    if not 0.0 <= obstacle_density < 1.0:
        raise DataError(f"obstacle density must be in [0, 1), got {obstacle_density}")
    from .search import dijkstra  # deferred: search depends on this module

    rng = random.Random(seed)
    min_separation = max(height, width) / 2
    for _ in range(max_retries):
        mask = [
            [rng.random() >= obstacle_density for _ in range(width)]
            for _ in range(height)
        ]
        cells = [(r, c) for r in range(height) for c in range(width) if mask[r][c]]
        if len(cells) < 2:
            continue
        source = rng.choice(cells)
        candidates = [n for n in cells if chebyshev(n, source) >= min_separation]
        if not candidates:
            continue
        target = rng.choice(candidates)
        grid = GridMap(mask, np.ones((height, width), dtype=float))
        if not connected(grid, source, target):
            continue
        instance = ProblemInstance(grid=grid, source=source, target=target)
        outcome = dijkstra(instance)
        return replace(instance, reference=outcome.path)
    raise DataError(
        f"maze generation exhausted {max_retries} retries "
        f"(density {obstacle_density} too high for {height}x{width})"
    )
