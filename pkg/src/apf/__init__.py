"""Angular grid pathfinding: engines, imitation metrics, and weight fitting."""

from .errors import ApfError, DataError, InternalError
from .fit import FitConfig, FitResult, fit, objective, preset_names, presets
from .geometry import (
    DEFAULT_SIGMA,
    HeuristicField,
    PafParams,
    bresenham_line,
    heuristic,
    line_of_sight,
    paf,
    polyline_length,
    turn_angle,
)
from .grid import (
    GridMap,
    ProblemInstance,
    connected,
    generate_maze,
    load_costmap,
    load_instance,
    load_map_file,
    neighbors,
    parse_costmap,
    parse_movingai,
    save_instance,
    write_costmap,
    write_movingai,
)
from .metrics import (
    MetricsReport,
    PathMask,
    area_between,
    asim,
    chamfer,
    chamfer_normalized,
    chamfer_pair,
    enclosed_region,
    ep,
    hist,
    path_loss,
    psim,
    spr,
)
from .paths import Node, Path, degree_constraint_ok
from .search import (
    OPEN_EXHAUSTED,
    TARGET_REACHED,
    SearchOutcome,
    SearchTrace,
    backtrack,
    classic_astar,
    daa_star,
    dijkstra,
    euclidean_path_length,
    focal_search,
    random_walk_search,
    theta_star,
)

__version__ = "0.1.0"
