"""Command-line entry points: generate instances, simulate, run batches, serve."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import benchgen, sim
from .benchgen import GenerationParams, InstanceFormatError


def _params_from_args(args: argparse.Namespace) -> GenerationParams:
    values = {}
    if args.params:
        values.update(json.loads(Path(args.params).read_text()))
    flag_map = {
        "grid": "grid_side_m",
        "customers": "customer_count",
        "tours": "tour_count",
        "capacity": "tour_capacity",
        "windows": "window_count",
        "depot_mode": "depot_mode",
    }
    for flag, field_name in flag_map.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[field_name] = v
    values["seed"] = args.seed
    known = {f.name for f in fields(GenerationParams)}
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown generation parameters: {sorted(unknown)}")
    return GenerationParams(**values)


def _cmd_generate(args: argparse.Namespace) -> int:
    params = _params_from_args(args)
    instance = benchgen.generate_instance(params)
    benchgen.write_instance(instance, args.out)
    print(f"wrote {args.out}: {params.customer_count} customers, "
          f"{params.tour_count} tours, {params.window_count} windows, seed {params.seed}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    instance = benchgen.read_instance(args.instance)
    metrics = sim.run_simulation(instance, args.improve, args.every)
    params = GenerationParams(**instance.metadata["params"])
    cfg = sim.BatchConfig(name=Path(args.instance).stem, params=params,
                          improve=args.improve, every=args.every)
    csv_text = sim.metrics_csv(cfg, [params.seed], [metrics])
    if args.out:
        Path(args.out).write_text(csv_text)
    else:
        sys.stdout.write(csv_text)
    print(f"inserted {metrics.total_inserted}, "
          f"avg offered {metrics.avg_offered_windows:.2f}, "
          f"objective {metrics.final_objective_s:.0f} s", file=sys.stderr)
    return 0


def _cmd_batch(args: argparse.Namespace) -> int:
    doc = json.loads(Path(args.config).read_text())
    configs = []
    for entry in doc["configs"]:
        params = GenerationParams(**entry.get("params", {}))
        configs.append(sim.BatchConfig(name=entry["name"], params=params,
                                       improve=entry.get("improve", sim.POLICY_NONE),
                                       every=int(entry.get("every", 1)),
                                       mix_depots=bool(entry.get("mix_depots", True))))
    seeds = doc.get("seeds")
    if seeds is None:
        base = int(doc.get("seed_base", 0))
        seeds = [base + i for i in range(args.reps)]
    report = sim.run_batch(configs, [int(s) for s in seeds], args.out,
                           workers=args.workers)
    print(sim.summary_table(report))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(log_path=args.log_path)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slotsched",
                                     description="Delivery-slot scheduling toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a benchmark instance file")
    gen.add_argument("--params", help="JSON file of generation parameters")
    gen.add_argument("--grid", type=float, help="grid side in meters")
    gen.add_argument("--customers", type=int)
    gen.add_argument("--tours", type=int)
    gen.add_argument("--capacity", type=float)
    gen.add_argument("--windows", type=int)
    gen.add_argument("--depot-mode", dest="depot_mode",
                     choices=[benchgen.DEPOT_CENTER, benchgen.DEPOT_TOP_LEFT])
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    simp = sub.add_parser("simulate", help="replay one instance against the engine")
    simp.add_argument("--instance", required=True)
    simp.add_argument("--improve", choices=list(sim.POLICIES), default=sim.POLICY_NONE)
    simp.add_argument("--every", type=int, default=1)
    simp.add_argument("--out", help="metrics CSV path (stdout if omitted)")
    simp.set_defaults(func=_cmd_simulate)

    bat = sub.add_parser("batch", help="run a batch of configurations")
    bat.add_argument("--config", required=True, help="batch config JSON")
    bat.add_argument("--reps", type=int, default=1,
                     help="repetitions when the config lists no seeds")
    bat.add_argument("--out", required=True, help="output directory")
    bat.add_argument("--workers", type=int, default=1,
                     help="parallel simulation processes")
    bat.set_defaults(func=_cmd_batch)

    srv = sub.add_parser("serve", help="run the HTTP booking service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--log-path", dest="log_path", default=None)
    srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceFormatError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
