"""Path-imitation and search-efficiency metrics.

Similarity metrics compare predicted paths against reference paths: SPR (was
the prediction at most as long), PSIM (node-mask overlap), ASIM (enclosed
area, normalized over a method set), and Chamfer distance. Efficiency is Hist
(fraction of cells expanded) and Ep (expansion reduction versus classic A*).
The path loss is the L1 distance between the closed-list mask and the
reference-path mask.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Set, Tuple

import numpy as np

from .errors import DataError
from .grid import GridMap
from .paths import Node, Path
from .search import SearchTrace


def _nodes(path_like) -> Tuple[Node, ...]:
    if isinstance(path_like, Path):
        return path_like.nodes
    return tuple((int(r), int(c)) for r, c in path_like)


def _check_paired(pred: Sequence, ref: Sequence) -> None:
    if len(pred) != len(ref):
        raise DataError(f"length mismatch: {len(pred)} predictions vs {len(ref)} references")
    if not ref:
        raise DataError("no instances to score")


@dataclass(frozen=True)
class PathMask:
    """Binary H x W labelling of a node set."""

    bits: np.ndarray

    @classmethod
    def from_nodes(cls, shape: Tuple[int, int], nodes: Iterable[Node]) -> "PathMask":
        bits = np.zeros(shape, dtype=bool)
        for r, c in nodes:
            bits[r, c] = True
        bits.setflags(write=False)
        return cls(bits)

    def popcount(self) -> int:
        return int(self.bits.sum())

    def symdiff_count(self, other: "PathMask") -> int:
        return int(np.logical_xor(self.bits, other.bits).sum())


def spr(pred: Sequence, ref: Sequence) -> float:
    """Fraction of instances where the prediction has at most as many nodes."""
    _check_paired(pred, ref)
    hits = sum(1 for p, q in zip(pred, ref) if len(_nodes(p)) <= len(_nodes(q)))
    return hits / len(ref)


def psim_instance(pred, ref) -> float:
    pset = set(_nodes(pred))
    rset = set(_nodes(ref))
    ratio = len(pset ^ rset) / (2 * len(rset))
    return 1.0 - min(ratio, 1.0)


def psim(pred: Sequence, ref: Sequence) -> float:
    """Mask-overlap similarity: 1 - mean capped symmetric-difference ratio."""
    _check_paired(pred, ref)
    return sum(psim_instance(p, q) for p, q in zip(pred, ref)) / len(ref)


def enclosed_region(a, b) -> Set[Node]:
    """Cells strictly enclosed between two paths sharing both endpoints.

    The polygon runs along ``a`` and back along reversed ``b``; interior cells
    are found by even-odd counting of edge crossings per grid row (exact
    rational arithmetic, so results are deterministic). Cells lying on either
    path are never part of the region.
    """
    a_nodes = _nodes(a)
    b_nodes = _nodes(b)
    if a_nodes[0] != b_nodes[0] or a_nodes[-1] != b_nodes[-1]:
        raise DataError("paths must share source and target for area computation")
    on_path = set(a_nodes) | set(b_nodes)
    verts = list(a_nodes) + list(reversed(b_nodes))[1:-1]
    n = len(verts)
    if n < 3:
        return set()
    crossings: Dict[int, List[Fraction]] = {}
    for idx in range(n):
        r1, c1 = verts[idx]
        r2, c2 = verts[(idx + 1) % n]
        if r1 == r2:
            continue
        lo, hi = (r1, r2) if r1 < r2 else (r2, r1)
        for row in range(lo, hi):  # half-open in the row coordinate
            x = Fraction(c1) + Fraction(row - r1, r2 - r1) * (c2 - c1)
            crossings.setdefault(row, []).append(x)
    region: Set[Node] = set()
    for row, xs in crossings.items():
        xs.sort()
        lo_col = int(xs[0])
        hi_col = int(xs[-1]) + 1
        for col in range(lo_col, hi_col + 1):
            if (row, col) in on_path:
                continue
            # Inside iff an odd number of crossings lie strictly to the right.
            if (len(xs) - bisect_right(xs, col)) % 2 == 1:
                region.add((row, col))
    return region


def area_between(a, b) -> int:
    """Count of cells enclosed between two paths (excluding path cells)."""
    return len(enclosed_region(a, b))


def asim_instance_scores(
    preds_by_method: Mapping[str, Sequence], ref: Sequence
) -> Dict[str, List[float]]:
    """Per-instance area-similarity scores, normalized over the method set.

    Per instance, each method scores 1 - |own region| / |union of all
    methods' regions|; identical paths (empty union) score 1.
    """
    if not preds_by_method:
        raise DataError("asim needs at least one method")
    methods = list(preds_by_method)
    for m in methods:
        _check_paired(preds_by_method[m], ref)
    scores: Dict[str, List[float]] = {m: [] for m in methods}
    for i in range(len(ref)):
        regions = {m: enclosed_region(preds_by_method[m][i], ref[i]) for m in methods}
        union: Set[Node] = set()
        for reg in regions.values():
            union |= reg
        denom = len(union)
        for m in methods:
            scores[m].append(1.0 if denom == 0 else 1.0 - len(regions[m]) / denom)
    return scores


def asim(preds_by_method: Mapping[str, Sequence], ref: Sequence) -> Dict[str, float]:
    """Mean area similarity per method over the instance set."""
    scores = asim_instance_scores(preds_by_method, ref)
    return {m: sum(vals) / len(vals) for m, vals in scores.items()}


def chamfer_pair(pred, ref) -> Tuple[float, float]:
    """Bidirectional nearest-neighbor squared-distance sums for one instance.

    Returns (literal, normalized): the literal value sums both directed
    terms; the normalized variant divides each directed sum by its point
    count before adding.
    """
    a = np.asarray(_nodes(pred), dtype=float)
    b = np.asarray(_nodes(ref), dtype=float)
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    ab = d2.min(axis=1)
    ba = d2.min(axis=0)
    return float(ab.sum() + ba.sum()), float(ab.mean() + ba.mean())


def chamfer(pred: Sequence, ref: Sequence) -> float:
    """Mean literal Chamfer distance over instances."""
    _check_paired(pred, ref)
    return sum(chamfer_pair(p, q)[0] for p, q in zip(pred, ref)) / len(ref)


def chamfer_normalized(pred: Sequence, ref: Sequence) -> float:
    """Mean per-point-normalized Chamfer distance over instances."""
    _check_paired(pred, ref)
    return sum(chamfer_pair(p, q)[1] for p, q in zip(pred, ref)) / len(ref)


def hist(trace: SearchTrace, grid: GridMap) -> float:
    """Fraction of grid cells the search expanded."""
    return len(trace.closed) / (grid.height * grid.width)


def ep(trace: SearchTrace, astar_trace: SearchTrace) -> float:
    """Relative reduction in expanded nodes versus the A* trace (clamped at 0)."""
    na = len(astar_trace.closed)
    if na == 0:
        raise DataError("A* trace has an empty closed list")
    return max(na - len(trace.closed), 0) / na


def path_loss(trace: SearchTrace, ref: Path) -> float:
    """L1 distance between the closed-list mask and the reference-path mask."""
    closed = trace.closed_set()
    refset = set(ref.nodes)
    return float(len(closed ^ refset))


_CSV_COLUMNS = (
    "instance_id",
    "spr",
    "psim",
    "asim",
    "cd",
    "cd_normalized",
    "hist",
    "ep",
    "path_loss",
)


@dataclass(frozen=True)
class InstanceMetrics:
    instance_id: str
    spr: float
    psim: float
    asim: float
    cd: float
    cd_normalized: float
    hist: float
    ep: float
    path_loss: float

    def row(self) -> List[str]:
        return [self.instance_id] + [
            f"{getattr(self, col):.6f}" for col in _CSV_COLUMNS[1:]
        ]


@dataclass(frozen=True)
class MetricsReport:
    """Per-instance metric rows plus their arithmetic-mean aggregate."""

    method: str
    per_instance: Tuple[InstanceMetrics, ...]

    def _mean(self, col: str) -> float:
        return sum(getattr(m, col) for m in self.per_instance) / len(self.per_instance)

    @property
    def spr(self) -> float:
        return self._mean("spr")

    @property
    def psim(self) -> float:
        return self._mean("psim")

    @property
    def asim(self) -> float:
        return self._mean("asim")

    @property
    def cd(self) -> float:
        return self._mean("cd")

    @property
    def cd_normalized(self) -> float:
        return self._mean("cd_normalized")

    @property
    def hist(self) -> float:
        return self._mean("hist")

    @property
    def ep(self) -> float:
        return self._mean("ep")

    @property
    def path_loss(self) -> float:
        return self._mean("path_loss")

    def aggregate_row(self) -> List[str]:
        return ["aggregate"] + [f"{self._mean(col):.6f}" for col in _CSV_COLUMNS[1:]]

    def to_csv(self) -> str:
        lines = [",".join(_CSV_COLUMNS)]
        for m in self.per_instance:
            lines.append(",".join(m.row()))
        lines.append(",".join(self.aggregate_row()))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "aggregate": {col: self._mean(col) for col in _CSV_COLUMNS[1:]},
            "per_instance": [
                {"instance_id": m.instance_id, **{c: getattr(m, c) for c in _CSV_COLUMNS[1:]}}
                for m in self.per_instance
            ],
        }


def build_report(
    method: str,
    instance_ids: Sequence[str],
    preds: Sequence[Path],
    refs: Sequence[Path],
    traces: Sequence[SearchTrace],
    astar_traces: Sequence[SearchTrace],
    grids: Sequence[GridMap],
    asim_scores: Sequence[float],
) -> MetricsReport:
    _check_paired(preds, refs)
    rows = []
    for i, iid in enumerate(instance_ids):
        lit, norm = chamfer_pair(preds[i], refs[i])
        rows.append(
            InstanceMetrics(
                instance_id=iid,
                spr=1.0 if len(_nodes(preds[i])) <= len(_nodes(refs[i])) else 0.0,
                psim=psim_instance(preds[i], refs[i]),
                asim=asim_scores[i],
                cd=lit,
                cd_normalized=norm,
                hist=hist(traces[i], grids[i]),
                ep=ep(traces[i], astar_traces[i]),
                path_loss=path_loss(traces[i], refs[i]),
            )
        )
    return MetricsReport(method=method, per_instance=tuple(rows))
