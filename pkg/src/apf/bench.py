"""Multi-method benchmark orchestration.

Runs every configured method on every instance, computes the full metric
suite (Ep against the classic A* trace, area similarity normalized over
exactly the configured method set), and assembles deterministic CSV/JSON
reports. (instance x method) cells are distributed over a worker pool; result
assembly is ordered, so output is schedule-independent.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import DataError
from .fit import presets
from .geometry import DEFAULT_SIGMA, HeuristicField, PafParams
from .grid import ProblemInstance, load_instance
from .metrics import MetricsReport, asim_instance_scores, build_report
from .search import (
    SearchOutcome,
    classic_astar,
    daa_star,
    dijkstra,
    focal_search,
    random_walk_search,
    theta_star,
)

ENGINES = ("daa", "astar", "dijkstra", "theta", "randwalk", "focal")

THREADS_ENV = "APF_THREADS"


@dataclass(frozen=True)
class MethodSpec:
    """One benchmark row: an engine plus its parameters."""

    label: str
    engine: str
    params: PafParams = field(default_factory=PafParams)
    k: int = 3
    seed: int = 0
    w: float = 2.0


def parse_method_spec(text: str) -> MethodSpec:
    """Parse a method mini-spec like ``daa:alpha=0.3,lambda=0.7,kappa=0.8``.

    Engines: daa (keys alpha/lambda/kappa or preset), randwalk (lambda/k/seed),
    focal (w), astar, dijkstra, theta (no keys).
    """
    name, _, rest = text.strip().partition(":")
    name = name.strip().lower()
    if name not in ENGINES:
        raise DataError(f"unknown engine {name!r}; expected one of {', '.join(ENGINES)}")
    opts: Dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            if not item.strip():
                continue
            key, sep, value = item.partition("=")
            if not sep:
                raise DataError(f"malformed method option {item!r} in {text!r}")
            opts[key.strip().lower()] = value.strip()

    def pop_float(key: str, default: float) -> float:
        if key not in opts:
            return default
        try:
            return float(opts.pop(key))
        except ValueError:
            raise DataError(f"method option {key} must be a number in {text!r}")

    def pop_int(key: str, default: int) -> int:
        if key not in opts:
            return default
        try:
            return int(opts.pop(key))
        except ValueError:
            raise DataError(f"method option {key} must be an integer in {text!r}")

    params = PafParams()
    k = 3
    seed = 0
    w = 2.0
    if name == "daa":
        if "preset" in opts:
            params = presets(opts.pop("preset"))
        params = PafParams(
            alpha=pop_float("alpha", params.alpha),
            lam=pop_float("lambda", params.lam),
            kappa=pop_float("kappa", params.kappa),
        )
    elif name == "randwalk":
        params = PafParams(alpha=0.5, lam=pop_float("lambda", 0.5), kappa=0.0)
        k = pop_int("k", 3)
        seed = pop_int("seed", 0)
    elif name == "focal":
        w = pop_float("w", 2.0)
    if opts:
        raise DataError(f"unsupported option(s) {sorted(opts)} for engine {name!r}")
    return MethodSpec(label=text.strip(), engine=name, params=params, k=k, seed=seed, w=w)


def run_method(
    spec: MethodSpec,
    instance: ProblemInstance,
    sigma: float = DEFAULT_SIGMA,
    heuristic_field: Optional[HeuristicField] = None,
) -> SearchOutcome:
    if spec.engine == "daa":
        return daa_star(instance, spec.params, sigma, heuristic_field=heuristic_field)
    if spec.engine == "astar":
        return classic_astar(instance, sigma, heuristic_field=heuristic_field)
    if spec.engine == "dijkstra":
        return dijkstra(instance)
    if spec.engine == "theta":
        return theta_star(instance, sigma, heuristic_field=heuristic_field)
    if spec.engine == "randwalk":
        return random_walk_search(
            instance, spec.params, sigma, k=spec.k, seed=spec.seed,
            heuristic_field=heuristic_field,
        )
    if spec.engine == "focal":
        return focal_search(
            instance.grid, instance.source, instance.target, spec.w, sigma,
            heuristic_field=heuristic_field,
        )
    raise DataError(f"unknown engine {spec.engine!r}")


def worker_count(requested: Optional[int] = None) -> int:
    count = requested if requested and requested > 0 else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            raise DataError(f"{THREADS_ENV} must be an integer, got {cap!r}")
    return count


@dataclass
class BenchResult:
    reports: List[MetricsReport]
    instance_ids: List[str]
    method_labels: List[str]
    timings: Dict[str, float]
    outcomes: Dict[str, List[SearchOutcome]]


def run_bench(
    instances: Sequence[ProblemInstance],
    instance_ids: Sequence[str],
    specs: Sequence[MethodSpec],
    sigma: float = DEFAULT_SIGMA,
    threads: Optional[int] = None,
) -> BenchResult:
    if not specs:
        raise DataError("bench needs at least one method")
    if len(instances) != len(instance_ids):
        raise DataError("instance/id count mismatch")
    for iid, inst in zip(instance_ids, instances):
        if inst.reference is None:
            raise DataError(f"instance {iid} carries no reference path")
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise DataError("duplicate method labels in bench configuration")

    fields = [
        HeuristicField.compute(inst.grid.height, inst.grid.width, inst.target, sigma)
        for inst in instances
    ]
    # Ep always compares against classic A*; reuse the configured astar row
    # when present, otherwise run it implicitly (not reported).
    astar_idx = next((i for i, s in enumerate(specs) if s.engine == "astar"), None)

    def run_cell(spec: MethodSpec, idx: int) -> Tuple[SearchOutcome, float]:
        start = time.perf_counter()
        outcome = run_method(spec, instances[idx], sigma, heuristic_field=fields[idx])
        return outcome, time.perf_counter() - start

    cells = [(si, ii) for si in range(len(specs)) for ii in range(len(instances))]
    results: Dict[Tuple[int, int], Tuple[SearchOutcome, float]] = {}
    max_workers = worker_count(threads)
    if max_workers == 1:
        for si, ii in cells:
            results[(si, ii)] = run_cell(specs[si], ii)
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {
                (si, ii): pool.submit(run_cell, specs[si], ii) for si, ii in cells
            }
            for key, fut in futures.items():
                results[key] = fut.result()

    outcomes: Dict[str, List[SearchOutcome]] = {}
    timings: Dict[str, float] = {}
    for si, spec in enumerate(specs):
        outs = []
        elapsed = 0.0
        for ii, iid in enumerate(instance_ids):
            outcome, dt = results[(si, ii)]
            elapsed += dt
            if outcome.path is None:
                raise DataError(
                    f"instance {iid}: method {spec.label!r} did not reach the target"
                )
            outs.append(outcome)
        outcomes[spec.label] = outs
        timings[spec.label] = elapsed

    if astar_idx is not None:
        astar_traces = [o.trace for o in outcomes[specs[astar_idx].label]]
    else:
        astar_traces = [
            classic_astar(inst, sigma, heuristic_field=fld).trace
            for inst, fld in zip(instances, fields)
        ]

    refs = [inst.reference for inst in instances]
    preds_by_method = {label: [o.path for o in outcomes[label]] for label in labels}
    asim_scores = asim_instance_scores(preds_by_method, refs)
    grids = [inst.grid for inst in instances]
    reports = [
        build_report(
            method=label,
            instance_ids=list(instance_ids),
            preds=preds_by_method[label],
            refs=refs,
            traces=[o.trace for o in outcomes[label]],
            astar_traces=astar_traces,
            grids=grids,
            asim_scores=asim_scores[label],
        )
        for label in labels
    ]
    return BenchResult(
        reports=reports,
        instance_ids=list(instance_ids),
        method_labels=labels,
        timings=timings,
        outcomes=outcomes,
    )


def load_dataset(dataset: str) -> Tuple[List[ProblemInstance], List[str]]:
    """Load instances from a manifest file, a dataset directory, or one JSON."""
    path = FsPath(dataset)
    if path.is_dir():
        manifest = path / "manifest.json"
        if manifest.exists():
            return load_dataset(str(manifest))
        files = sorted(p for p in path.glob("*.json") if p.name != "manifest.json")
        if not files:
            raise DataError(f"no instance files found in {path}")
        return [load_instance(p) for p in files], [p.stem for p in files]
    if not path.exists():
        raise DataError(f"dataset path {path} does not exist")
    if path.name == "manifest.json" or path.name.endswith(".manifest.json"):
        try:
            listing = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from exc
        names = listing.get("instances")
        if not isinstance(names, list) or not names:
            raise DataError(f"{path}: manifest has no 'instances' list")
        files = [path.parent / name for name in names]
        return [load_instance(p) for p in files], [FsPath(n).stem for n in names]
    return [load_instance(path)], [path.stem]


def bench_csv(
    result: BenchResult, config_echo: Dict, sigma: float
) -> str:
    """Deterministic CSV: comment header with the effective config, then rows."""
    lines = [
        "# apf bench report",
        "# config: " + json.dumps(config_echo, sort_keys=True, separators=(",", ":")),
        "# asim_methods: " + "|".join(result.method_labels),
        f"# sigma: {sigma}",
        "method,instance_id,spr,psim,asim,cd,cd_normalized,hist,ep,path_loss",
    ]
    for report in result.reports:
        for row in report.per_instance:
            lines.append(",".join([report.method] + row.row()))
        lines.append(",".join([report.method] + report.aggregate_row()))
    return "\n".join(lines) + "\n"


def bench_json(result: BenchResult, config_echo: Dict, sigma: float) -> str:
    payload = {
        "config": config_echo,
        "sigma": sigma,
        "asim_methods": result.method_labels,
        "reports": [rep.to_dict() for rep in result.reports],
        "timings_seconds": {k: result.timings[k] for k in result.method_labels},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
