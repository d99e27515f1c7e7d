"""Pure numeric kernel: distances, turn angles, angular-freedom blend, line of sight."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import DataError
from .paths import Node

# Default weight on the Euclidean tie-break term of the heuristic.
DEFAULT_SIGMA = 0.001


def heuristic(node: Node, target: Node, sigma: float) -> float:
    """Chebyshev distance plus a small Euclidean tie-break term."""
    dr = node[0] - target[0]
    dc = node[1] - target[1]
    return float(max(abs(dr), abs(dc)) + sigma * math.hypot(dr, dc))


@dataclass(frozen=True)
class HeuristicField:
    """Heuristic distance to one fixed target, precomputed for every cell."""

    values: np.ndarray  # H x W, non-negative, zero at the target
    sigma: float

    @classmethod
    def compute(cls, height: int, width: int, target: Node, sigma: float) -> "HeuristicField":
        tr, tc = target
        if not (0 <= tr < height and 0 <= tc < width):
            raise DataError(f"target {target} outside {height}x{width} grid")
        drows = np.abs(np.arange(height) - tr)[:, None]
        dcols = np.abs(np.arange(width) - tc)[None, :]
        che = np.maximum(drows, dcols)
        euc = np.hypot(drows, dcols)
        values = (che + sigma * euc).astype(float)
        values.setflags(write=False)
        return cls(values=values, sigma=float(sigma))

    def __getitem__(self, node: Node) -> float:
        return float(self.values[node[0], node[1]])

    def rows(self) -> List[List[float]]:
        # Plain nested lists: much faster than ndarray scalar indexing in search loops.
        return self.values.tolist()


@dataclass(frozen=True)
class PafParams:
    """Scalar search weights: angle trade-off, prior/message blend, angle weight."""

    alpha: float = 0.5
    lam: float = 0.5
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise DataError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.lam <= 1.0:
            raise DataError(f"lambda must be in [0, 1], got {self.lam}")
        if not self.kappa >= 0.0:
            raise DataError(f"kappa must be >= 0, got {self.kappa}")

    @property
    def beta(self) -> float:
        # Effective weight on the angular term once the blend is applied.
        return (1.0 - self.lam) * self.kappa

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "lambda": self.lam, "kappa": self.kappa}


def turn_angle(j: Node, i: Node, k: Node) -> Optional[float]:
    """Angle in radians between segments j->i and i->k; None if either is zero."""
    ar, ac = i[0] - j[0], i[1] - j[1]
    br, bc = k[0] - i[0], k[1] - i[1]
    if (ar == 0 and ac == 0) or (br == 0 and bc == 0):
        return None
    dot = ar * br + ac * bc
    cos = dot / (math.hypot(ar, ac) * math.hypot(br, bc))
    # Clamp against floating-point drift so collinear vectors never NaN.
    cos = max(-1.0, min(1.0, cos))
    return math.acos(cos)


def paf(angle: float, alpha: float) -> float:
    """Angular-freedom blend of a turn angle and its supplement.

    alpha=1 rewards straight motion (returns the angle itself), alpha=0
    rewards curved motion (returns pi - angle), alpha=0.5 is the constant
    pi/2. Expects angle in [0, pi].
    """
    return alpha * angle + (1.0 - alpha) * (math.pi - angle)


def _unit_turn_angles() -> dict:
    table = {}
    dirs = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    for a in dirs:
        for b in dirs:
            ang = turn_angle((0, 0), a, (a[0] + b[0], a[1] + b[1]))
            assert ang is not None  # unit steps are never zero vectors
            table[(a[0], a[1], b[0], b[1])] = ang
    return table


# Turn angles for all pairs of unit 8-neighbor steps, keyed by
# (in_dr, in_dc, out_dr, out_dc). Search loops use this instead of acos calls.
UNIT_TURN_ANGLES = _unit_turn_angles()


def bresenham_line(a: Node, b: Node) -> List[Node]:
    """Integer raster of the segment a->b, endpoints inclusive."""
    r, c = a
    r1, c1 = b
    dc = abs(c1 - c)
    dr = -abs(r1 - r)
    sc = 1 if c < c1 else -1
    sr = 1 if r < r1 else -1
    err = dc + dr
    cells = [(r, c)]
    while (r, c) != (r1, c1):
        e2 = 2 * err
        if e2 >= dr:
            err += dr
            c += sc
        if e2 <= dc:
            err += dc
            r += sr
        cells.append((r, c))
    return cells


def sight_line_cells(a: Node, b: Node) -> List[Node]:
    """Bresenham cells of a->b, made direction-symmetric.

    The raster is always computed from the lexicographically smaller endpoint
    so that querying (a, b) and (b, a) traverses the same cell set.
    """
    if b < a:
        cells = bresenham_line(b, a)
        cells.reverse()
        return cells
    return bresenham_line(a, b)


def line_of_sight(grid, a: Node, b: Node) -> Tuple[bool, List[Node]]:
    """Whether every rasterized cell between a and b is passable.

    Returns the traversed cells in a->b order along with the verdict.
    """
    if not grid.in_bounds(a) or not grid.in_bounds(b):
        raise DataError(f"line_of_sight endpoints {a}, {b} must be in bounds")
    cells = sight_line_cells(a, b)
    visible = all(grid.is_passable(cell) for cell in cells)
    return visible, cells


def polyline_length(nodes) -> float:
    """Euclidean length of the polyline through the given nodes."""
    total = 0.0
    it = iter(nodes)
    try:
        prev = next(it)
    except StopIteration:
        return 0.0
    for cur in it:
        total += math.hypot(cur[0] - prev[0], cur[1] - prev[1])
        prev = cur
    return total
