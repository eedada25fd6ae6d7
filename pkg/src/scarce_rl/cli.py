"""Command-line entry point: experiments, comparisons, landscape scans, the service.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage or spec errors.
The ``SCARCE_RL_LOG`` environment variable sets the log level (e.g. INFO).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .environments import config_from_dict, resolve_env_config
from .harness import (
    ExperimentSpec,
    compare_agents,
    export_comparison,
    export_landscape,
    export_results,
    format_comparison_table,
    landscape_scan,
    run_experiment,
)

logger = logging.getLogger(__name__)


class SpecError(Exception):
    """A problem with user-supplied spec/config input (exit code 2)."""


def _load_spec(path: str, args) -> ExperimentSpec:
    try:
        spec = ExperimentSpec.from_json(path)
    except FileNotFoundError as exc:
        raise SpecError(f"spec file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise SpecError(f"invalid spec file {path}: {exc}") from exc
    return spec.with_overrides(runs=args.runs, episodes=args.episodes, seed=args.seed)


def _cmd_run(args) -> int:
    spec = _load_spec(args.spec, args)
    result = run_experiment(spec, parallel=args.parallel)
    output = args.output or f"results.{args.format}"
    export_results(result, output, format=args.format)
    print(f"wrote {spec.runs} runs of {spec.agent} on {spec.env} to {output}")
    return 0


def _cmd_compare(args) -> int:
    specs = [_load_spec(path, args) for path in args.specs]
    try:
        table = compare_agents(specs, parallel=args.parallel)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc
    print(format_comparison_table(table))
    if args.output:
        export_comparison(table, args.output, format=args.format)
        print(f"wrote comparison to {args.output}")
    return 0


def _cmd_landscape(args) -> int:
    try:
        config = resolve_env_config(args.env)
    except (ValueError, json.JSONDecodeError) as exc:
        raise SpecError(str(exc)) from exc
    matrix = landscape_scan(config, year=args.year, grid_n=args.n, scale_display=args.scale_display)
    output = args.output or f"landscape_{args.env}_year{args.year}.csv"
    export_landscape(matrix, output)
    print(f"wrote {matrix.size} cells to {output}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServerConfig, create_app, default_server_config

    if args.config:
        try:
            with open(args.config, encoding="utf-8") as f:
                registry = json.load(f)
            envs = {env_id: config_from_dict(data) for env_id, data in registry.items()}
        except FileNotFoundError as exc:
            raise SpecError(f"config file not found: {args.config}") from exc
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
            raise SpecError(f"invalid server config {args.config}: {exc}") from exc
        config = ServerConfig(envs=envs)
    else:
        config = default_server_config()
    host, _, port = args.addr.partition(":")
    app = create_app(config)
    print(f"serving {sorted(config.envs)} on http://{args.addr}")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))
    return 0


def _cmd_demo(args) -> int:
    from .core import SeededRng
    from .environments import default_env_a

    print("scarce-rl demo: random search vs sequence breaking on env_a")
    seeds = [int(args.seed) + i for i in range(3)] if args.seed is not None else [0, 1, 2]
    specs = [
        ExperimentSpec(env="env_a", agent="random_search", runs=len(seeds), seeds=tuple(seeds)),
        ExperimentSpec(env="env_a", agent="qlearning_seq_break", runs=len(seeds), seeds=tuple(seeds)),
        ExperimentSpec(env="env_a", agent="full_seq_break", runs=len(seeds), seeds=tuple(seeds)),
    ]
    table = compare_agents(specs)
    print(format_comparison_table(table))
    config = default_env_a()
    matrix = landscape_scan(config, year=1, grid_n=40)
    print(f"year-1 landscape: max {matrix.max():.2f}, mean {matrix.mean():.2f} over {matrix.size} cells")
    rng = SeededRng(seeds[0])
    print(f"a random policy, for flavor: {rng.uniform(size=10).round(2).tolist()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scarce-rl",
        description="Budget-constrained policy search on synthetic five-year simulators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("-o", "--output", help="output file path")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--seed", type=int, help="override the spec seed list")
        p.add_argument("--runs", type=int, help="override the number of runs")
        p.add_argument("--episodes", type=int, help="override episodes per run")
        p.add_argument("--parallel", action="store_true", help="run repetitions in parallel")

    p_run = sub.add_parser("run", help="execute one experiment spec")
    p_run.add_argument("spec", help="experiment spec JSON file")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run several specs sharing env and seeds")
    p_cmp.add_argument("specs", nargs="+", help="experiment spec JSON files")
    add_common(p_cmp)
    p_cmp.set_defaults(func=_cmd_compare)

    p_land = sub.add_parser("landscape", help="exhaustive reward-surface scan")
    p_land.add_argument("env", help="env_a, env_b, or a config file path")
    p_land.add_argument("--year", type=int, default=1)
    p_land.add_argument("-n", type=int, default=40, help="grid points per axis")
    p_land.add_argument("--scale-display", action="store_true", help="divide rewards by 100")
    p_land.add_argument("-o", "--output", help="output CSV path")
    p_land.set_defaults(func=_cmd_landscape)

    p_serve = sub.add_parser("serve", help="start the oracle service")
    p_serve.add_argument("--config", help="JSON file mapping env ids to env configs")
    p_serve.add_argument("--addr", default="127.0.0.1:8000")
    p_serve.set_defaults(func=_cmd_serve)

    p_demo = sub.add_parser("demo", help="small end-to-end showcase")
    p_demo.add_argument("--seed", type=int, help="base seed for the demo runs")
    p_demo.set_defaults(func=_cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("SCARCE_RL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # runtime failure
        logger.exception("command failed")
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
