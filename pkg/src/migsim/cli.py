"""Command-line entry points: run, sweep and report.

`run` executes one seeded simulation and writes load.csv, messages.csv,
latency.csv, distances.csv, migrations.csv and manifest.json into the
output directory.  `sweep` repeats a run over a seed list (optionally in
parallel processes) and adds a cross-seed summary.csv.  `report` renders
the figures for an existing run directory.

Exit codes: 0 ok, 2 configuration error, 3 runtime invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__, metrics
from .config import ConfigError, PROCEDURES, RunConfig, SCENARIOS, TOPOLOGIES
from .engine import InvariantError, World
from .netgraph import NetworkGraph, build_full_mesh, build_grid, build_hypercube
from .scenarios import make_scenario

FINAL_WINDOW = 100  # samples in the "final window" summary aggregates


def build_graph(config: RunConfig) -> NetworkGraph:
    if config.topology == "grid":
        return build_grid(config.rows, config.cols)
    if config.topology == "hypercube":
        return build_hypercube(int(config.nodes).bit_length() - 1)
    return build_full_mesh(int(config.nodes))


def build_world(config: RunConfig, trace=None) -> World:
    config.validate()
    graph = build_graph(config)
    scenario = make_scenario(config, graph.n_nodes)
    return World(graph, config, scenario, trace=trace)


def write_outputs(world: World, outdir: Path) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    samples = world.metrics.samples
    metrics.write_load_csv(samples, outdir / "load.csv")
    metrics.write_messages_csv(samples, outdir / "messages.csv")
    metrics.write_latency_csv(samples, outdir / "latency.csv")
    metrics.write_migrations_csv(samples, outdir / "migrations.csv")
    totals = metrics.total_distances(
        world.graph, world.hosts(), world.scenario.comm_graph())
    hist = metrics.distance_histogram(totals, world.scenario.distance_report_ids())
    metrics.write_distances_csv(hist, outdir / "distances.csv")
    manifest = {
        "version": __version__,
        "config": world.config.to_dict(),
        "nodes": world.graph.n_nodes,
        "gate_round": world.gate_round,
        "rounds": world.round,
        "transitions": world.transitions,
        "samples": len(samples),
        "migrations": world.migration_count,
        "cycles": world.cycles,
        "queue_overflows": world.graph.total_overflows(),
        "stalled": world.stalled,
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_to_dir(config: RunConfig, outdir: Path) -> World:
    """Build, run, settle and persist one simulation."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    trace = open(outdir / "trace.log", "w") if config.trace else None
    try:
        world = build_world(config, trace=trace)
        world.run()
    finally:
        if trace is not None:
            trace.close()
    write_outputs(world, outdir)
    return world


def _final_means(outdir: Path) -> dict[str, float]:
    msgs = metrics.read_csv_columns(outdir / "messages.csv")
    load = metrics.read_csv_columns(outdir / "load.csv")
    mig = metrics.read_csv_columns(outdir / "migrations.csv")
    return {
        "msg_avg_final": metrics.final_window_mean(msgs["avg"], FINAL_WINDOW),
        "msg_std_final": metrics.final_window_mean(msgs["std"], FINAL_WINDOW),
        "load_max_final": metrics.final_window_mean(load["max"], FINAL_WINDOW),
        "load_std_final": metrics.final_window_mean(load["std"], FINAL_WINDOW),
        "migrations_total": sum(mig["count"]),
    }


def _run_seed(config_dict: dict, outdir: str) -> str:
    cfg = RunConfig.from_dict(config_dict)
    run_to_dir(cfg, Path(outdir))
    return outdir


def sweep(config: RunConfig, seeds: list[int], outdir: Path, jobs: int = 1) -> int:
    """Independent per-seed runs plus summary.csv; per-seed failures are
    reported but do not abort the other seeds."""
    if not seeds:
        raise ConfigError("sweep needs at least one seed")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    tasks = []
    for seed in seeds:
        d = dict(config.to_dict(), seed=seed)
        tasks.append((seed, d, str(outdir / f"seed_{seed}")))
    failures: list[tuple[int, str]] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = {pool.submit(_run_seed, d, path): seed for seed, d, path in tasks}
            for fut, seed in futs.items():
                try:
                    fut.result()
                except Exception as exc:
                    failures.append((seed, str(exc)))
    else:
        for seed, d, path in tasks:
            try:
                _run_seed(d, path)
            except Exception as exc:
                failures.append((seed, str(exc)))
    failed = {s for s, _ in failures}
    with open(outdir / "summary.csv", "w") as fh:
        fh.write("seed,msg_avg_final,msg_std_final,load_max_final,"
                 "load_std_final,migrations_total\n")
        for seed in seeds:
            if seed in failed:
                continue
            m = _final_means(outdir / f"seed_{seed}")
            fh.write(f"{seed},{m['msg_avg_final']:.6f},{m['msg_std_final']:.6f},"
                     f"{m['load_max_final']:.6f},{m['load_std_final']:.6f},"
                     f"{int(m['migrations_total'])}\n")
    for seed, msg in failures:
        print(f"seed {seed} failed: {msg}", file=sys.stderr)
    return 3 if failures else 0


# ------------------------------------------------------------------ argparse

def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file of config keys (flags override)")
    p.add_argument("--topology", choices=TOPOLOGIES)
    p.add_argument("--rows", type=int)
    p.add_argument("--cols", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--procedure", choices=PROCEDURES)
    p.add_argument("--samples", type=int)
    p.add_argument("--sample-interval", type=int, dest="sample_interval")
    p.add_argument("--migration-cadence", type=int, dest="migration_cadence")
    p.add_argument("--gossip-cadence", type=int, dest="gossip_idle_interval",
                   help="resend floor (rounds) for unchanged routing tables")
    p.add_argument("--gossip-dirty-interval", type=int, dest="gossip_dirty_interval")
    p.add_argument("--smooth-window", type=int, dest="smooth_window")
    p.add_argument("--stop-after-cycles", type=int, dest="stop_after_cycles")
    p.add_argument("--max-rounds", type=int, dest="max_rounds")
    p.add_argument("--history-capacity", type=int, dest="history_capacity")
    p.add_argument("--queue-soft-limit", type=int, dest="queue_soft_limit")
    p.add_argument("--workers", type=int)
    p.add_argument("--star-count", type=int, dest="star_count")
    p.add_argument("--star-fringes", type=int, dest="star_fringes")
    p.add_argument("--ring-size", type=int, dest="ring_size")
    p.add_argument("--ring-tokens", type=int, dest="ring_tokens")
    p.add_argument("--ring-laps", type=int, dest="ring_laps")
    p.add_argument("--chord-objects", type=int, dest="chord_objects")
    p.add_argument("--chord-bits", type=int, dest="chord_bits")
    p.add_argument("--chord-ops", type=int, dest="chord_ops")
    p.add_argument("--trace", action="store_true", default=None)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    cfg = RunConfig.from_dict(base)
    for key in RunConfig.__dataclass_fields__:
        if hasattr(args, key) and getattr(args, key) is not None:
            value = getattr(args, key)
            setattr(cfg, key, str(value) if isinstance(value, Path) else value)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="migsim",
        description="Deterministic simulator of object migration and "
                    "location-independent routing on node networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one seeded simulation")
    _add_run_flags(p_run)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out", type=Path, required=True)
    p_run.add_argument("--plots", action="store_true",
                       help="also render figures into the output directory")

    p_sweep = sub.add_parser("sweep", help="run one config over many seeds")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--seeds", required=True,
                         help="comma-separated list, e.g. 1,2,3")
    p_sweep.add_argument("--out", type=Path, required=True)
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_rep = sub.add_parser("report", help="render figures for a run directory")
    p_rep.add_argument("rundir", type=Path)
    p_rep.add_argument("--smooth-window", type=int, default=5, dest="smooth_window")
    p_rep.add_argument("--out", type=Path, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = _config_from_args(args)
            if args.seed is not None:
                cfg.seed = args.seed
            cfg.out = str(args.out)
            run_to_dir(cfg, args.out)
            if args.plots:
                from .plots import render_run
                render_run(args.out, cfg.smooth_window)
            return 0
        if args.command == "sweep":
            cfg = _config_from_args(args)
            try:
                seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad --seeds value: {args.seeds!r}") from exc
            return sweep(cfg, seeds, args.out, jobs=args.jobs)
        if args.command == "report":
            from .plots import render_run
            for path in render_run(args.rundir, args.smooth_window, args.out):
                print(path)
            return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
