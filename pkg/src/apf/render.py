"""Static renders of maps, paths, and benchmark summaries.

The ASCII render is the canonical, byte-stable surface; the pixmap and the
matplotlib figures are best-effort visual artifacts.
"""

from __future__ import annotations

from pathlib import Path as FsPath
from typing import Iterable, Optional, Sequence

from .grid import GridMap
from .paths import Node

# cell kind -> RGB for the pixmap render
_COLORS = {
    "#": (40, 40, 40),
    ".": (255, 255, 255),
    "o": (168, 200, 255),
    "*": (220, 60, 60),
    "S": (40, 170, 70),
    "T": (70, 90, 230),
}


def _cell_grid(
    grid: GridMap,
    path_nodes: Iterable[Node],
    closed_nodes: Iterable[Node],
    source: Optional[Node],
    target: Optional[Node],
):
    cells = [
        ["." if grid.passable[r, c] else "#" for c in range(grid.width)]
        for r in range(grid.height)
    ]
    for r, c in closed_nodes:
        if cells[r][c] == ".":
            cells[r][c] = "o"
    for r, c in path_nodes:
        cells[r][c] = "*"
    if source is not None:
        cells[source[0]][source[1]] = "S"
    if target is not None:
        cells[target[0]][target[1]] = "T"
    return cells


def ascii_render(
    grid: GridMap,
    path_nodes: Iterable[Node] = (),
    closed_nodes: Iterable[Node] = (),
    source: Optional[Node] = None,
    target: Optional[Node] = None,
) -> str:
    """Text render: '#' obstacle, '.' free, '*' path, 'o' closed, 'S'/'T' endpoints."""
    cells = _cell_grid(grid, path_nodes, closed_nodes, source, target)
    return "\n".join("".join(row) for row in cells) + "\n"


def write_ppm(
    out_path,
    grid: GridMap,
    path_nodes: Iterable[Node] = (),
    closed_nodes: Iterable[Node] = (),
    source: Optional[Node] = None,
    target: Optional[Node] = None,
    scale: int = 8,
) -> None:
    """Binary portable-pixmap render with `scale` x `scale` pixels per cell."""
    cells = _cell_grid(grid, path_nodes, closed_nodes, source, target)
    h, w = grid.height, grid.width
    header = f"P6\n{w * scale} {h * scale}\n255\n".encode("ascii")
    rows = []
    for r in range(h):
        row = bytearray()
        for c in range(w):
            row += bytes(_COLORS[cells[r][c]]) * scale
        rows.append(bytes(row) * scale)
    FsPath(out_path).write_bytes(header + b"".join(rows))


def bench_summary_figure(reports: Sequence, out_path) -> None:
    """Grouped per-method bar charts of the aggregate benchmark metrics."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    methods = [rep.method for rep in reports]
    fig, (ax_sim, ax_eff) = plt.subplots(2, 1, figsize=(max(6, 1.8 * len(methods)), 7))

    sim_metrics = ("spr", "psim", "asim")
    eff_metrics = ("hist", "ep", "cd_normalized")
    x = range(len(methods))
    width = 0.26
    for ax, names, title in (
        (ax_sim, sim_metrics, "path similarity"),
        (ax_eff, eff_metrics, "search efficiency / distance"),
    ):
        for i, name in enumerate(names):
            vals = [getattr(rep, name) for rep in reports]
            ax.bar([xi + (i - 1) * width for xi in x], vals, width=width, label=name)
        ax.set_xticks(list(x))
        ax.set_xticklabels(methods, rotation=20, ha="right", fontsize=8)
        ax.set_title(title)
        ax.legend(fontsize=8)
        ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def instance_figure(
    out_path,
    grid: GridMap,
    paths_by_method: dict,
    reference: Optional[Sequence[Node]] = None,
    source: Optional[Node] = None,
    target: Optional[Node] = None,
) -> None:
    """Overlay of method paths (and the reference) on the occupancy grid."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(~grid.passable, cmap="gray_r", interpolation="nearest")
    if reference is not None:
        rr = [n[0] for n in reference]
        cc = [n[1] for n in reference]
        ax.plot(cc, rr, color="black", lw=2.5, alpha=0.5, label="reference")
    for label, nodes in paths_by_method.items():
        rr = [n[0] for n in nodes]
        cc = [n[1] for n in nodes]
        ax.plot(cc, rr, lw=1.5, label=label)
    if source is not None:
        ax.plot([source[1]], [source[0]], "g^", ms=8)
    if target is not None:
        ax.plot([target[1]], [target[0]], "bv", ms=8)
    ax.legend(fontsize=7, loc="upper right")
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
