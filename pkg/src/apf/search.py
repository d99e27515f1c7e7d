"""Search engines over grid maps.

All engines emit a common trace (closed list in expansion order, final open
set, parent map, messages, costs, selection probabilities) and terminate
either by reaching the target or by exhausting the open list. Tie-breaking on
equal selection keys always falls back to the lowest flat cell index so runs
are bit-reproducible.

The target node joins the closed list as the final selection when a search
succeeds, so a perfectly imitating run has a closed list exactly equal to the
reference path.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Set, Tuple

from .errors import DataError, InternalError
from .geometry import (
    DEFAULT_SIGMA,
    HeuristicField,
    PafParams,
    UNIT_TURN_ANGLES,
    line_of_sight,
    polyline_length,
)
from .grid import GridMap, ProblemInstance
from .paths import Node, Path

TARGET_REACHED = "target_reached"
OPEN_EXHAUSTED = "open_exhausted"

_INF = math.inf
_PI = math.pi


@dataclass
class SearchTrace:
    """State left behind by one search run."""

    closed: List[Node]
    open_final: Set[Node]
    parents: Dict[Node, Node]
    messages: Dict[Node, float]
    costs: Dict[Node, float]
    probabilities: Dict[Node, float]
    expansions: int

    def closed_set(self) -> Set[Node]:
        return set(self.closed)


@dataclass
class SearchOutcome:
    path: Optional[Path]
    trace: SearchTrace
    terminated_by: str
    waypoints: Optional[List[Node]] = None  # any-angle searches only

    def to_dict(self, include_trace: bool = False) -> dict:
        out = {
            "terminated_by": self.terminated_by,
            "path": self.path.as_lists() if self.path else None,
            "trace": {
                "closed_size": len(self.trace.closed),
                "expansions": self.trace.expansions,
                "open_size": len(self.trace.open_final),
            },
        }
        if self.waypoints is not None:
            out["waypoints"] = [list(n) for n in self.waypoints]
        if include_trace:
            out["trace"]["closed"] = [list(n) for n in self.trace.closed]
            out["trace"]["parents"] = {
                f"{r},{c}": [pr, pc] for (r, c), (pr, pc) in self.trace.parents.items()
            }
            out["trace"]["messages"] = {
                f"{r},{c}": v for (r, c), v in self.trace.messages.items()
            }
            out["trace"]["costs"] = {
                f"{r},{c}": v for (r, c), v in self.trace.costs.items()
            }
            out["trace"]["probabilities"] = {
                f"{r},{c}": v for (r, c), v in self.trace.probabilities.items()
            }
        return out


def backtrack(trace: SearchTrace, source: Node, target: Node) -> Path:
    """Follow parents from target to source and reverse."""
    nodes = [target]
    seen = {target}
    cur = target
    while cur != source:
        nxt = trace.parents.get(cur)
        if nxt is None:
            raise InternalError(f"broken parent chain at {cur}")
        if nxt in seen:
            raise InternalError(f"parent cycle through {nxt}")
        nodes.append(nxt)
        seen.add(nxt)
        cur = nxt
    nodes.reverse()
    return Path(tuple(nodes))


def _softmax_probability(open_costs: Dict[Node, float], node: Node) -> float:
    """exp(-c) selection weight of `node` normalized over the open list."""
    cmin = min(open_costs.values())
    if math.isinf(cmin):
        return 1.0 / len(open_costs)
    total = 0.0
    for c in open_costs.values():
        total += math.exp(cmin - c)
    return math.exp(cmin - open_costs[node]) / total


def _paf_engine(
    instance: ProblemInstance,
    alpha: float,
    lam: float,
    kappa: float,
    sigma: float,
    heuristic_field: Optional[HeuristicField],
    record_probabilities: bool,
    selector: Optional[Callable],
) -> SearchOutcome:
    """Message-passing node expansion shared by the angular and random-walk engines.

    Per expansion of node i with parent j, each open passable neighbor k gets
    the message update m_k <- min(m_k, theta_s) if k neighbors the source,
    else min(m_k, theta_i + m_i + kappa * paf(angle(j,i,k), alpha)); its
    selection cost is lam * (theta_k + D_k) + (1 - lam) * m_k. The next node
    is the open-list argmin of that cost (argmax of softmax(-c)) unless a
    custom selector is supplied. Generation of the target ends the search.
    """
    grid = instance.grid
    source, target = instance.source, instance.target
    if heuristic_field is None:
        heuristic_field = HeuristicField.compute(grid.height, grid.width, target, sigma)
    d_rows = heuristic_field.rows()
    theta_rows = grid.cost_rows()
    nbrs = grid.neighbor_table()
    width = grid.width
    one_m_lam = 1.0 - lam
    one_m_alpha = 1.0 - alpha
    theta_s = theta_rows[source[0]][source[1]]
    source_nbrs = frozenset(nbrs[source])
    angle_table = UNIT_TURN_ANGLES

    messages: Dict[Node, float] = {source: 0.0}
    parents: Dict[Node, Node] = {}
    costs: Dict[Node, float] = {}
    probabilities: Dict[Node, float] = {}
    closed: Dict[Node, None] = {}
    c_source = lam * (theta_s + d_rows[source[0]][source[1]])  # m_s = 0
    costs[source] = c_source
    open_costs: Dict[Node, float] = {source: c_source}
    heap: List[Tuple[float, int, Node]] = [(c_source, source[0] * width + source[1], source)]
    reached = False

    while open_costs:
        if selector is None:
            while True:
                c_sel, _, node = heapq.heappop(heap)
                if open_costs.get(node) == c_sel:
                    break
        else:
            node = selector(open_costs, probabilities)
        if record_probabilities and node not in probabilities:
            probabilities[node] = _softmax_probability(open_costs, node)
        del open_costs[node]
        closed[node] = None
        if node == target:  # defensive; generation normally exits first
            reached = True
            break

        par = parents.get(node)
        m_i = messages[node]
        if not math.isfinite(m_i):
            raise InternalError(f"non-finite message at expanded node {node}")
        base = theta_rows[node[0]][node[1]] + m_i
        if par is not None:
            in_dr = node[0] - par[0]
            in_dc = node[1] - par[1]
        generated = [k for k in nbrs[node] if k not in closed]
        for k in generated:
            # Neighbors join the open list before their messages update.
            if k not in open_costs:
                open_costs[k] = _INF
                heapq.heappush(heap, (_INF, k[0] * width + k[1], k))
        hit_target = False
        for k in generated:
            if k in source_nbrs:
                cand = theta_s
            elif par is None or kappa == 0.0:
                cand = base
            else:
                ang = angle_table[(in_dr, in_dc, k[0] - node[0], k[1] - node[1])]
                cand = base + kappa * (alpha * ang + one_m_alpha * (_PI - ang))
            mk = messages.get(k, _INF)
            if cand < mk:
                messages[k] = cand
                parents[k] = node
                mk = cand
            ck = lam * (theta_rows[k[0]][k[1]] + d_rows[k[0]][k[1]]) + one_m_lam * mk
            costs[k] = ck
            if ck != open_costs[k]:
                open_costs[k] = ck
                heapq.heappush(heap, (ck, k[0] * width + k[1], k))
            if k == target:
                hit_target = True
                break
        if hit_target:
            if record_probabilities:
                probabilities[target] = _softmax_probability(open_costs, target)
            del open_costs[target]
            closed[target] = None
            reached = True
            break

    trace = SearchTrace(
        closed=list(closed),
        open_final=set(open_costs),
        parents=parents,
        messages=messages,
        costs=costs,
        probabilities=probabilities,
        expansions=len(closed),
    )
    if reached:
        return SearchOutcome(backtrack(trace, source, target), trace, TARGET_REACHED)
    return SearchOutcome(None, trace, OPEN_EXHAUSTED)


def daa_star(
    instance: ProblemInstance,
    params: PafParams,
    sigma: float = DEFAULT_SIGMA,
    heuristic_field: Optional[HeuristicField] = None,
    record_probabilities: bool = True,
) -> SearchOutcome:
    """Angular A*: best-first message passing with a turn-angle penalty.

    ``record_probabilities=False`` skips the per-step softmax bookkeeping,
    which speeds up bulk parameter sweeps without changing the search.
    """
    return _paf_engine(
        instance,
        params.alpha,
        params.lam,
        params.kappa,
        sigma,
        heuristic_field,
        record_probabilities,
        selector=None,
    )


def random_walk_search(
    instance: ProblemInstance,
    params: PafParams,
    sigma: float = DEFAULT_SIGMA,
    k: int = 3,
    seed: int = 0,
    heuristic_field: Optional[HeuristicField] = None,
) -> SearchOutcome:
    """Angular engine with kappa=0 and randomized top-k node selection.

    Each step samples the next node among the k lowest-cost open nodes with
    probability proportional to softmax(-cost) over that subset. Deterministic
    for a fixed seed.
    """
    if k < 1:
        raise DataError(f"top-k size must be >= 1, got {k}")
    rng = random.Random(seed)
    width = instance.grid.width

    def selector(open_costs: Dict[Node, float], probabilities: Dict[Node, float]) -> Node:
        cands = heapq.nsmallest(
            k, open_costs.items(), key=lambda it: (it[1], it[0][0] * width + it[0][1])
        )
        cmin = cands[0][1]
        weights = [math.exp(cmin - c) for _, c in cands]
        total = sum(weights)
        pick = rng.random() * total
        acc = 0.0
        for (node, _), w in zip(cands, weights):
            acc += w
            if pick < acc or node == cands[-1][0]:
                probabilities[node] = w / total
                return node
        raise InternalError("top-k sampling fell through")

    return _paf_engine(
        instance,
        params.alpha,
        params.lam,
        0.0,
        sigma,
        heuristic_field,
        record_probabilities=True,
        selector=selector,
    )


def _relaxation_engine(
    grid: GridMap,
    source: Node,
    target: Node,
    step_cost: Callable[[Node], float],
    h_rows: Optional[List[List[float]]],
    select_key: Optional[Callable],
) -> Tuple[bool, Dict, Dict, Dict, Dict, Dict]:
    """g-relaxation best-first core for the classic engines.

    Re-opens closed nodes whose g improves. When ``select_key`` is given the
    open list is scanned with it each step (focal-style selection) instead of
    popping the (f, flat index) heap.
    """
    nbrs = grid.neighbor_table()
    width = grid.width
    g: Dict[Node, float] = {source: 0.0}
    parents: Dict[Node, Node] = {}
    fvals: Dict[Node, float] = {}
    closed: Dict[Node, None] = {}
    f0 = h_rows[source[0]][source[1]] if h_rows else 0.0
    fvals[source] = f0
    open_costs: Dict[Node, float] = {source: f0}
    heap: List[Tuple[float, int, Node]] = [(f0, source[0] * width + source[1], source)]
    reached = False

    while open_costs:
        if select_key is None:
            while True:
                fc, _, node = heapq.heappop(heap)
                if open_costs.get(node) == fc:
                    break
        else:
            node = select_key(open_costs)
        del open_costs[node]
        closed[node] = None
        if node == target:
            reached = True
            break
        gn = g[node]
        for nxt in nbrs[node]:
            ng = gn + step_cost(nxt)
            if ng < g.get(nxt, _INF):
                g[nxt] = ng
                parents[nxt] = node
                fn = ng + (h_rows[nxt[0]][nxt[1]] if h_rows else 0.0)
                fvals[nxt] = fn
                if nxt in closed:
                    del closed[nxt]
                open_costs[nxt] = fn
                heapq.heappush(heap, (fn, nxt[0] * width + nxt[1], nxt))
    return reached, g, parents, fvals, closed, open_costs


def _classic_outcome(reached, g, parents, fvals, closed, open_costs, source, target):
    trace = SearchTrace(
        closed=list(closed),
        open_final=set(open_costs),
        parents=parents,
        messages=g,
        costs=fvals,
        probabilities={},
        expansions=len(closed),
    )
    if reached:
        return SearchOutcome(backtrack(trace, source, target), trace, TARGET_REACHED)
    return SearchOutcome(None, trace, OPEN_EXHAUSTED)


def classic_astar(
    instance: ProblemInstance,
    sigma: float = DEFAULT_SIGMA,
    heuristic_field: Optional[HeuristicField] = None,
) -> SearchOutcome:
    """Textbook A* over unit move costs with the weighted grid heuristic."""
    grid = instance.grid
    if heuristic_field is None:
        heuristic_field = HeuristicField.compute(
            grid.height, grid.width, instance.target, sigma
        )
    state = _relaxation_engine(
        grid,
        instance.source,
        instance.target,
        step_cost=lambda _k: 1.0,
        h_rows=heuristic_field.rows(),
        select_key=None,
    )
    return _classic_outcome(*state, instance.source, instance.target)


def dijkstra(instance: ProblemInstance) -> SearchOutcome:
    """Uniform-cost search: unit steps on binary maps, per-node priors otherwise."""
    grid = instance.grid
    if grid.is_uniform_cost():
        step_cost = lambda _k: 1.0  # noqa: E731
    else:
        theta_rows = grid.cost_rows()
        step_cost = lambda k: theta_rows[k[0]][k[1]]  # noqa: E731
    state = _relaxation_engine(
        grid, instance.source, instance.target, step_cost, h_rows=None, select_key=None
    )
    return _classic_outcome(*state, instance.source, instance.target)


def theta_star(
    instance: ProblemInstance,
    sigma: float = DEFAULT_SIGMA,
    heuristic_field: Optional[HeuristicField] = None,
) -> SearchOutcome:
    """Any-angle search: parents shortcut to grandparents under line of sight.

    g-values accumulate Euclidean segment lengths between waypoints. The
    returned path is the Bresenham rasterization of the waypoint chain; the
    waypoints themselves are kept on the outcome.
    """
    grid = instance.grid
    source, target = instance.source, instance.target
    if heuristic_field is None:
        heuristic_field = HeuristicField.compute(grid.height, grid.width, target, sigma)
    h_rows = heuristic_field.rows()
    nbrs = grid.neighbor_table()
    width = grid.width
    g: Dict[Node, float] = {source: 0.0}
    parents: Dict[Node, Node] = {}
    fvals: Dict[Node, float] = {source: h_rows[source[0]][source[1]]}
    closed: Dict[Node, None] = {}
    open_costs: Dict[Node, float] = {source: fvals[source]}
    heap = [(fvals[source], source[0] * width + source[1], source)]
    los_cache: Dict[Tuple[Node, Node], bool] = {}

    def visible(a: Node, b: Node) -> bool:
        key = (a, b) if a <= b else (b, a)
        hit = los_cache.get(key)
        if hit is None:
            hit, _ = line_of_sight(grid, key[0], key[1])
            los_cache[key] = hit
        return hit

    reached = False
    while open_costs:
        while True:
            fc, _, node = heapq.heappop(heap)
            if open_costs.get(node) == fc:
                break
        del open_costs[node]
        closed[node] = None
        if node == target:
            reached = True
            break
        par = parents.get(node, node)
        for nxt in nbrs[node]:
            if nxt in closed:
                continue
            if visible(par, nxt):
                cand_parent = par
                ng = g[par] + math.hypot(nxt[0] - par[0], nxt[1] - par[1])
            else:
                cand_parent = node
                ng = g[node] + math.hypot(nxt[0] - node[0], nxt[1] - node[1])
            if ng < g.get(nxt, _INF):
                g[nxt] = ng
                parents[nxt] = cand_parent
                fn = ng + h_rows[nxt[0]][nxt[1]]
                fvals[nxt] = fn
                open_costs[nxt] = fn
                heapq.heappush(heap, (fn, nxt[0] * width + nxt[1], nxt))

    trace = SearchTrace(
        closed=list(closed),
        open_final=set(open_costs),
        parents=parents,
        messages=g,
        costs=fvals,
        probabilities={},
        expansions=len(closed),
    )
    if not reached:
        return SearchOutcome(None, trace, OPEN_EXHAUSTED)

    waypoints = [target]
    seen = {target}
    cur = target
    while cur != source:
        cur = parents.get(cur)
        if cur is None or cur in seen:
            raise InternalError("broken waypoint chain")
        waypoints.append(cur)
        seen.add(cur)
    waypoints.reverse()
    rasterized = _rasterize_waypoints(grid, waypoints)
    return SearchOutcome(rasterized, trace, TARGET_REACHED, waypoints=waypoints)


def _rasterize_waypoints(grid: GridMap, waypoints: List[Node]) -> Path:
    cells: List[Node] = [waypoints[0]]
    for a, b in zip(waypoints, waypoints[1:]):
        _, segment = line_of_sight(grid, a, b)
        cells.extend(segment[1:])
    return Path(tuple(cells))


def euclidean_path_length(outcome: SearchOutcome) -> float:
    """Length of an any-angle result measured along its waypoint polyline."""
    if outcome.waypoints is None:
        raise DataError("outcome has no waypoints")
    return polyline_length(outcome.waypoints)


def focal_search(
    grid: GridMap,
    source: Node,
    target: Node,
    w: float = 2.0,
    sigma: float = DEFAULT_SIGMA,
    heuristic_field: Optional[HeuristicField] = None,
) -> SearchOutcome:
    """Bounded-suboptimal A* steered by a per-cell probability map.

    The cost field is read as path probabilities in [0, 1]. Each step expands,
    among open nodes with f <= w * f_min, the one with the highest probability
    (ties: lower f, then lower flat index). With w=1 this is classic A* whose
    tie-breaking prefers probable cells.
    """
    if w < 1.0:
        raise DataError(f"focal weight must be >= 1, got {w}")
    vals = grid.costs[grid.passable]
    if vals.size and (vals.min() < 0.0 or vals.max() > 1.0):
        raise DataError("focal search needs cell probabilities in [0, 1]")
    for name, node in (("source", source), ("target", target)):
        if not grid.is_passable(node):
            raise DataError(f"{name} {node} is not a passable cell")
    if source == target:
        raise DataError("source and target must differ")
    if heuristic_field is None:
        heuristic_field = HeuristicField.compute(grid.height, grid.width, target, sigma)
    prob_rows = grid.cost_rows()
    width = grid.width

    def select(open_costs: Dict[Node, float]) -> Node:
        f_min = min(open_costs.values())
        bound = w * f_min
        best = None
        best_key = None
        for node, fv in open_costs.items():
            if fv <= bound:
                key = (-prob_rows[node[0]][node[1]], fv, node[0] * width + node[1])
                if best_key is None or key < best_key:
                    best_key = key
                    best = node
        return best

    state = _relaxation_engine(
        grid,
        source,
        target,
        step_cost=lambda _k: 1.0,
        h_rows=heuristic_field.rows(),
        select_key=select,
    )
    return _classic_outcome(*state, source, target)
