"""Shared fixtures and independent oracles for the test suite.

The BFS oracle deliberately re-implements 8-neighbor enumeration from the raw
passability mask so path-length checks do not depend on the library's own
neighbor/search machinery.
"""

from collections import deque

import numpy as np

from apf import GridMap, Path, ProblemInstance

OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def bfs_hops(grid: GridMap, source):
    """Minimal unit-step counts from source to every reachable cell."""
    passable = np.asarray(grid.passable)
    h, w = passable.shape
    dist = {source: 0}
    queue = deque([source])
    while queue:
        r, c = queue.popleft()
        d = dist[(r, c)]
        for dr, dc in OFFSETS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and passable[nr, nc] and (nr, nc) not in dist:
                dist[(nr, nc)] = d + 1
                queue.append((nr, nc))
    return dist


def grid_from_rows(rows, costs=None) -> GridMap:
    """Build a map from strings: '.' passable, '#' blocked."""
    mask = np.array([[ch == "." for ch in row] for row in rows], dtype=bool)
    if costs is None:
        costs = np.ones(mask.shape, dtype=float)
    return GridMap(mask, costs)


def random_mask_grid(rng, height, width, density) -> GridMap:
    mask = np.array(
        [[rng.random() >= density for _ in range(width)] for _ in range(height)],
        dtype=bool,
    )
    return GridMap(mask, np.ones((height, width), dtype=float))


def corridor_instance(cells, height=None, width=None) -> ProblemInstance:
    """Instance whose only passable cells form the given corridor."""
    h = height or (max(r for r, _ in cells) + 2)
    w = width or (max(c for _, c in cells) + 2)
    mask = np.zeros((h, w), dtype=bool)
    for r, c in cells:
        mask[r, c] = True
    grid = GridMap(mask, np.ones((h, w), dtype=float))
    path = Path(tuple(cells))
    return ProblemInstance(grid=grid, source=cells[0], target=cells[-1], reference=path)


STRAIGHT_CORRIDOR = [(1, c) for c in range(8)]

# Bent corridor: a row run, a diagonal kink, then a column run. No two
# non-consecutive cells are 8-adjacent, so the feasible path is unique.
BENT_CORRIDOR = [(1, 1), (1, 2), (1, 3), (2, 4), (3, 4), (4, 4), (5, 4)]


def disconnected_instance(height=12, width=12, seed=0) -> ProblemInstance:
    """Two regions split by a full wall row; target unreachable from source."""
    import random

    rng = random.Random(seed)
    mask = np.ones((height, width), dtype=bool)
    mask[height // 2, :] = False
    for r in range(height):
        for c in range(width):
            if r != height // 2 and rng.random() < 0.15:
                mask[r, c] = False
    mask[0, 0] = True
    mask[height - 1, width - 1] = True
    grid = GridMap(mask, np.ones((height, width), dtype=float))
    return ProblemInstance(grid=grid, source=(0, 0), target=(height - 1, width - 1))
