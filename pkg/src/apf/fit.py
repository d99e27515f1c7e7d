"""Derivative-free recovery of the scalar search weights.

The objective is the mean path loss of the angular engine over a set of
demonstration instances. Because paths change discretely under the weights,
the landscape is piecewise constant; a coarse full-grid sweep followed by
shrinking coordinate-descent steps handles the plateaus predictably and
deterministically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import DataError, InternalError
from .geometry import DEFAULT_SIGMA, HeuristicField, PafParams
from .grid import ProblemInstance
from .metrics import path_loss
from .search import daa_star

Bounds = Tuple[Tuple[float, float], Tuple[float, float], Tuple[float, float]]

# All learned weights observed in practice land inside the unit cube, so the
# search is bounded there (kappa included).
DEFAULT_BOUNDS: Bounds = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))

# Fitted weights for named dataset/method combinations, usable as presets.
_PRESETS: Dict[str, Tuple[float, float, float]] = {
    "mpd/daa-min": (1.0, 0.199, 0.296),
    "mpd/daa-max": (0.0, 0.525, 0.362),
    "mpd/daa-mix": (0.334, 0.660, 0.753),
    "tmpd/daa-min": (1.0, 0.172, 0.659),
    "tmpd/daa-max": (0.0, 0.321, 0.001),
    "tmpd/daa-mix": (0.769, 0.481, 0.838),
    "csm/daa-min": (1.0, 0.473, 1.0),
    "csm/daa-max": (0.0, 0.321, 0.001),
    "csm/daa-mix": (0.687, 0.517, 0.768),
    "aug-tmpd/daa": (0.964, 0.633, 0.978),
    "aug-tmpd/daa-path": (0.587, 0.552, 0.563),
    "aug-tmpd/daa-mask": (0.696, 0.505, 0.774),
    "aug-tmpd/daa-weight": (0.622, 0.499, 0.703),
    "warcraft/daa-min": (1.0, 0.754, 0.167),
    "warcraft/daa-max": (0.0, 0.788, 0.439),
    "warcraft/daa-mix": (0.277, 0.805, 0.744),
    "pokemon/daa-min": (1.0, 0.785, 0.228),
    "pokemon/daa-max": (0.0, 0.834, 0.440),
    "pokemon/daa-mix": (0.323, 0.832, 0.702),
    "sdd-intra/daa-min": (1.0, 0.535, 0.002),
    "sdd-intra/daa-max": (0.0, 0.734, 0.684),
    "sdd-intra/daa-mix": (0.095, 0.779, 0.914),
    "sdd-inter/daa-min": (1.0, 0.296, 0.030),
    "sdd-inter/daa-max": (0.0, 0.690, 0.577),
    "sdd-inter/daa-mix": (0.174, 0.730, 0.841),
}


def presets(name: str) -> PafParams:
    """Named (alpha, lambda, kappa) preset, e.g. ``mpd/daa-mix``."""
    key = name.strip().lower()
    if key not in _PRESETS:
        known = ", ".join(sorted(_PRESETS))
        raise DataError(f"unknown preset {name!r}; known presets: {known}")
    a, l, k = _PRESETS[key]
    return PafParams(alpha=a, lam=l, kappa=k)


def preset_names() -> List[str]:
    return sorted(_PRESETS)


@dataclass(frozen=True)
class FitConfig:
    grid_step: float = 0.1
    refine_iters: int = 8
    refine_shrink: float = 0.5
    bounds: Bounds = DEFAULT_BOUNDS
    seed: int = 0
    preset: Optional[str] = None  # extra seeded start, evaluated after the default init

    def __post_init__(self) -> None:
        if not 0.0 < self.grid_step <= 0.5:
            raise DataError(f"grid_step must be in (0, 0.5], got {self.grid_step}")
        if not 0.0 < self.refine_shrink < 1.0:
            raise DataError(f"refine_shrink must be in (0, 1), got {self.refine_shrink}")
        if self.refine_iters < 0:
            raise DataError(f"refine_iters must be >= 0, got {self.refine_iters}")
        if self.preset is not None:
            presets(self.preset)  # validate early


@dataclass(frozen=True)
class FitResult:
    params: PafParams
    train_loss: float
    eval_loss: Optional[float]
    evaluations: int
    loss_curve: Tuple[Tuple[PafParams, float], ...]

    def to_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "train_loss": self.train_loss,
            "eval_loss": self.eval_loss,
            "evaluations": self.evaluations,
            "loss_curve": [
                {"params": p.as_dict(), "loss": loss} for p, loss in self.loss_curve
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def curve_csv(self) -> str:
        lines = ["evaluation,alpha,lambda,kappa,loss"]
        for i, (p, loss) in enumerate(self.loss_curve):
            lines.append(f"{i},{p.alpha:.6f},{p.lam:.6f},{p.kappa:.6f},{loss:.6f}")
        return "\n".join(lines) + "\n"


def _prepared_fields(instances: Sequence[ProblemInstance], sigma: float):
    fields = []
    for idx, inst in enumerate(instances):
        if inst.reference is None:
            raise DataError(f"instance {idx} carries no reference path")
        fields.append(
            HeuristicField.compute(inst.grid.height, inst.grid.width, inst.target, sigma)
        )
    return fields


def objective(
    params: PafParams,
    instances: Sequence[ProblemInstance],
    sigma: float = DEFAULT_SIGMA,
    _fields=None,
) -> float:
    """Mean path loss of the angular engine at the given weights."""
    if not instances:
        raise DataError("objective needs at least one instance")
    fields = _fields if _fields is not None else _prepared_fields(instances, sigma)
    total = 0.0
    for inst, fld in zip(instances, fields):
        if inst.reference is None:
            raise DataError("instance carries no reference path")
        outcome = daa_star(
            inst, params, sigma, heuristic_field=fld, record_probabilities=False
        )
        if outcome.path is None:
            raise InternalError(
                f"search failed on a connected instance (source {inst.source})"
            )
        total += path_loss(outcome.trace, inst.reference)
    return total / len(instances)


def _grid_values(step: float) -> List[float]:
    values = []
    i = 0
    while True:
        v = round(i * step, 12)
        if v > 1.0 + 1e-12:
            break
        values.append(min(v, 1.0))
        i += 1
    if values[-1] != 1.0:
        values.append(1.0)
    return values


def _clamp(value: float, bounds: Tuple[float, float]) -> float:
    return min(max(value, bounds[0]), bounds[1])


def fit(
    instances: Sequence[ProblemInstance],
    config: FitConfig = FitConfig(),
    sigma: float = DEFAULT_SIGMA,
    eval_instances: Optional[Sequence[ProblemInstance]] = None,
) -> FitResult:
    """Recover (alpha, lambda, kappa) minimizing the mean path loss.

    Evaluation order: the canonical initialization (0.5, 0.5, 1.0 clamped to
    bounds), the optional preset, the full coarse grid, then coordinate
    descent around the incumbent with per-coordinate +/- steps that shrink
    each round. Ties keep the earlier-evaluated point. Deterministic for a
    fixed configuration.
    """
    if not instances:
        raise DataError("fit needs at least one instance")
    fields = _prepared_fields(instances, sigma)
    curve: List[Tuple[PafParams, float]] = []
    best_params: Optional[PafParams] = None
    best_loss = float("inf")

    def evaluate(alpha: float, lam: float, kappa: float) -> None:
        nonlocal best_params, best_loss
        params = PafParams(alpha=alpha, lam=lam, kappa=kappa)
        loss = objective(params, instances, sigma, _fields=fields)
        curve.append((params, loss))
        if loss < best_loss:
            best_loss = loss
            best_params = params

    b_alpha, b_lam, b_kappa = config.bounds
    evaluate(_clamp(0.5, b_alpha), _clamp(0.5, b_lam), _clamp(1.0, b_kappa))
    if config.preset is not None:
        p = presets(config.preset)
        evaluate(_clamp(p.alpha, b_alpha), _clamp(p.lam, b_lam), _clamp(p.kappa, b_kappa))

    alphas = [_clamp(v, b_alpha) for v in _grid_values(config.grid_step)]
    lams = [_clamp(v, b_lam) for v in _grid_values(config.grid_step)]
    kappas = [_clamp(v, b_kappa) for v in _grid_values(config.grid_step)]
    for a in alphas:
        for l in lams:
            for k in kappas:
                evaluate(a, l, k)

    step = config.grid_step
    for _ in range(config.refine_iters):
        step *= config.refine_shrink
        for coord, bounds in enumerate(config.bounds):
            for delta in (step, -step):
                point = [best_params.alpha, best_params.lam, best_params.kappa]
                moved = round(_clamp(point[coord] + delta, bounds), 12)
                if moved == point[coord]:
                    continue
                point[coord] = moved
                evaluate(*point)

    # One final evaluation re-verifies the reported loss (determinism check).
    check = objective(best_params, instances, sigma, _fields=fields)
    if check != best_loss:
        raise InternalError(
            f"objective is not reproducible: {check} != {best_loss} at {best_params}"
        )
    eval_loss = None
    if eval_instances is not None:
        eval_loss = objective(best_params, eval_instances, sigma)
    return FitResult(
        params=best_params,
        train_loss=best_loss,
        eval_loss=eval_loss,
        evaluations=len(curve),
        loss_curve=tuple(curve),
    )
