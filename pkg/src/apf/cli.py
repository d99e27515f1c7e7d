"""Command-line front end: dataset generation, solving, benchmarking, fitting.

Exit codes: 0 success, 1 usage error, 2 data/contract error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path as FsPath

from .bench import (
    bench_csv,
    bench_json,
    load_dataset,
    parse_method_spec,
    run_bench,
    run_method,
)
from .errors import DataError, InternalError
from .fit import FitConfig, fit, preset_names
from .geometry import DEFAULT_SIGMA
from .grid import (
    generate_maze,
    load_instance,
    parse_movingai,
    save_instance,
    write_movingai,
)
from .metrics import hist
from .render import ascii_render, bench_summary_figure, instance_figure, write_ppm
from .search import OPEN_EXHAUSTED, dijkstra


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; this tool reserves 2 for
    # data errors, so remap usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._usage_exit(message))

    def _usage_exit(self, message) -> int:
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="apf", description="Grid pathfinding bench tool")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("gen", help="generate a maze instance dataset")
    p_gen.add_argument("--count", type=int, required=True)
    p_gen.add_argument("--height", type=int, default=32)
    p_gen.add_argument("--width", type=int, default=32)
    p_gen.add_argument("--density", type=float, default=0.3)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out-dir", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance with one method")
    p_solve.add_argument("instance")
    p_solve.add_argument("--method", default="astar", help="method spec, e.g. daa:preset=mpd/daa-mix")
    p_solve.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p_solve.add_argument("--render", action="store_true", help="print ASCII render and write a .ppm")
    p_solve.add_argument("--render-out", default=None, help="pixmap output path (with --render)")
    p_solve.add_argument("--json", action="store_true", dest="as_json", help="emit outcome JSON")
    p_solve.add_argument("--full-trace", action="store_true", help="include the full trace in JSON")

    p_bench = sub.add_parser("bench", help="run a method tournament over a dataset")
    p_bench.add_argument("--config", default=None, help="JSON config; flags override it")
    p_bench.add_argument("--dataset", default=None, help="dataset dir, manifest, or instance JSON")
    p_bench.add_argument("--method", action="append", dest="methods", default=None)
    p_bench.add_argument("--sigma", type=float, default=None)
    p_bench.add_argument("--output", default=None, help="report path (default bench_report.<format>)")
    p_bench.add_argument("--format", choices=("csv", "json"), default=None)
    p_bench.add_argument("--threads", type=int, default=None)
    p_bench.add_argument("--no-figures", action="store_true", help="skip the matplotlib summary")
    p_bench.add_argument(
        "--render-paths", type=int, default=0, metavar="N",
        help="also render path overlays for the first N instances",
    )

    p_fit = sub.add_parser("fit", help="fit (alpha, lambda, kappa) to reference paths")
    p_fit.add_argument("--train", required=True, help="training dataset (dir/manifest/instance)")
    p_fit.add_argument("--eval", dest="eval_set", default=None, help="optional eval dataset")
    p_fit.add_argument("--grid-step", type=float, default=0.1)
    p_fit.add_argument("--refine-iters", type=int, default=8)
    p_fit.add_argument("--refine-shrink", type=float, default=0.5)
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--preset", default=None, help=f"extra start; one of: {', '.join(preset_names())}")
    p_fit.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)
    p_fit.add_argument("--output", default="fit_result.json")
    p_fit.add_argument("--curve-csv", default=None, help="also write the loss curve as CSV")

    p_conv = sub.add_parser("convert", help="convert MovingAI .map <-> instance JSON")
    p_conv.add_argument("src")
    p_conv.add_argument("dst")
    p_conv.add_argument("--source", type=int, nargs=2, metavar=("R", "C"))
    p_conv.add_argument("--target", type=int, nargs=2, metavar=("R", "C"))
    p_conv.add_argument("--with-reference", action="store_true",
                        help="attach a Dijkstra reference path (map -> JSON)")
    return parser


def cmd_gen(args) -> int:
    out_dir = FsPath(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for i in range(args.count):
        instance = generate_maze(
            args.height, args.width, args.density, seed=args.seed * 1_000_003 + i
        )
        name = f"inst_{i:04d}.json"
        save_instance(instance, out_dir / name)
        names.append(name)
    manifest = {
        "count": args.count,
        "density": args.density,
        "height": args.height,
        "instances": names,
        "seed": args.seed,
        "width": args.width,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {args.count} instances to {out_dir}")
    return 0


def cmd_solve(args) -> int:
    spec = parse_method_spec(args.method)
    instance = load_instance(args.instance)
    outcome = run_method(spec, instance, args.sigma)
    if outcome.terminated_by == OPEN_EXHAUSTED:
        print("unreachable: open list exhausted before the target", file=sys.stderr)
        return 2
    print(f"method: {spec.label}")
    if spec.engine in ("daa", "randwalk"):
        p = spec.params
        print(f"params: ({p.alpha:.3f}, {p.lam:.3f}, {p.kappa:.3f})")
    print(f"path length: {len(outcome.path)} nodes")
    print(f"expansions: {outcome.trace.expansions}")
    print(f"hist: {hist(outcome.trace, instance.grid):.6f}")
    if outcome.waypoints is not None:
        print(f"waypoints: {len(outcome.waypoints)}")
    if args.as_json:
        print(json.dumps(outcome.to_dict(include_trace=args.full_trace), sort_keys=True))
    if args.render:
        art = ascii_render(
            instance.grid,
            path_nodes=outcome.path.nodes,
            closed_nodes=outcome.trace.closed,
            source=instance.source,
            target=instance.target,
        )
        sys.stdout.write(art)
        ppm_path = args.render_out or (FsPath(args.instance).with_suffix(".ppm"))
        write_ppm(
            ppm_path,
            instance.grid,
            path_nodes=outcome.path.nodes,
            closed_nodes=outcome.trace.closed,
            source=instance.source,
            target=instance.target,
        )
        print(f"render: {ppm_path}")
    return 0


def cmd_bench(args) -> int:
    config = {}
    if args.config:
        cfg_path = FsPath(args.config)
        try:
            config = json.loads(cfg_path.read_text())
        except OSError as exc:
            raise DataError(f"cannot read config {cfg_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"{cfg_path}: invalid JSON: {exc}") from exc
    dataset = args.dataset or config.get("dataset")
    methods = args.methods or config.get("methods")
    sigma = args.sigma if args.sigma is not None else config.get("sigma", DEFAULT_SIGMA)
    fmt = args.format or config.get("format", "csv")
    output = args.output or config.get("output", f"bench_report.{fmt}")
    if not dataset:
        raise DataError("bench needs a dataset (--dataset or config)")
    if not methods:
        raise DataError("bench needs at least one --method (or config methods)")

    specs = [parse_method_spec(m) for m in methods]
    instances, ids = load_dataset(dataset)
    result = run_bench(instances, ids, specs, sigma=sigma, threads=args.threads)

    config_echo = {
        "dataset": str(dataset),
        "format": fmt,
        "methods": [s.label for s in specs],
        "output": str(output),
        "sigma": sigma,
    }
    out_path = FsPath(output)
    if fmt == "csv":
        out_path.write_text(bench_csv(result, config_echo, sigma))
    else:
        out_path.write_text(bench_json(result, config_echo, sigma))
    print(f"report: {out_path}")
    for label in result.method_labels:
        print(f"  {label}: {result.timings[label]:.3f}s")

    if not args.no_figures:
        fig_path = out_path.with_name(out_path.stem + "_summary.png")
        bench_summary_figure(result.reports, fig_path)
        print(f"figure: {fig_path}")
        for i in range(min(args.render_paths, len(instances))):
            inst = instances[i]
            overlay = {
                label: result.outcomes[label][i].path.nodes
                for label in result.method_labels
            }
            path_fig = out_path.with_name(f"{out_path.stem}_paths_{ids[i]}.png")
            instance_figure(
                path_fig,
                inst.grid,
                overlay,
                reference=inst.reference.nodes if inst.reference else None,
                source=inst.source,
                target=inst.target,
            )
            print(f"figure: {path_fig}")
    return 0


def cmd_fit(args) -> int:
    train_instances, _ = load_dataset(args.train)
    eval_instances = None
    if args.eval_set:
        eval_instances, _ = load_dataset(args.eval_set)
    config = FitConfig(
        grid_step=args.grid_step,
        refine_iters=args.refine_iters,
        refine_shrink=args.refine_shrink,
        seed=args.seed,
        preset=args.preset,
    )
    result = fit(train_instances, config, sigma=args.sigma, eval_instances=eval_instances)
    FsPath(args.output).write_text(result.to_json())
    if args.curve_csv:
        FsPath(args.curve_csv).write_text(result.curve_csv())
    p = result.params
    print(f"best params: alpha={p.alpha:.6f} lambda={p.lam:.6f} kappa={p.kappa:.6f}")
    print(f"train loss: {result.train_loss:.6f}")
    if result.eval_loss is not None:
        print(f"eval loss: {result.eval_loss:.6f}")
    print(f"evaluations: {result.evaluations}")
    print(f"result: {args.output}")
    return 0


def cmd_convert(args) -> int:
    src, dst = FsPath(args.src), FsPath(args.dst)
    if src.suffix == ".map" and dst.suffix == ".json":
        if not args.source or not args.target:
            raise DataError("map -> JSON conversion needs --source and --target")
        try:
            grid = parse_movingai(src.read_text())
        except OSError as exc:
            raise DataError(f"cannot read {src}: {exc}") from exc
        from .grid import ProblemInstance

        instance = ProblemInstance(
            grid=grid, source=tuple(args.source), target=tuple(args.target)
        )
        if args.with_reference:
            outcome = dijkstra(instance)
            if outcome.path is None:
                raise DataError("target unreachable; cannot attach a reference path")
            from dataclasses import replace

            instance = replace(instance, reference=outcome.path)
        save_instance(instance, dst)
        print(f"wrote {dst}")
        return 0
    if src.suffix == ".json" and dst.suffix == ".map":
        instance = load_instance(src)
        vals = instance.grid.costs[instance.grid.passable]
        if vals.size and not (vals == 1.0).all():
            raise DataError("cost map cannot be represented in MovingAI format")
        dst.write_text(write_movingai(instance.grid))
        print(f"wrote {dst}")
        return 0
    raise DataError("convert expects .map -> .json or .json -> .map")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse --help (0) or usage error (1)
        return exc.code if isinstance(exc.code, int) else 1
    try:
        handler = {
            "gen": cmd_gen,
            "solve": cmd_solve,
            "bench": cmd_bench,
            "fit": cmd_fit,
            "convert": cmd_convert,
        }[args.command]
        return handler(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
