"""Batch experiment driver.

Subcommands:
    run     seeded trials over planner variants -> metrics.csv, traces, SVGs
    render  trace CSV + mission JSON -> SVG
    oracle  flood-fill reachability report for one seed
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from .config import KEYS, ExperimentConfig, load_config, serialize_config
from .environment import (
    Environment,
    GroundTruth,
    departure_clearance,
    departure_point,
    generate_environment,
)
from .errors import HexCoverError
from .hexgrid import CubeCoord, GridParams, world_to_cube
from .planner import Occupancy, Variant, format_trace_log
from .render import render_svg, svg_document
from .simulator import CoverageRaster, run_mission, sweep_coverage, read_trace_csv, write_trace_csv

log = logging.getLogger("hexcover")

CSV_COLUMNS = [
    "trial",
    "variant",
    "env_kind",
    "seed",
    "coverage_pct",
    "sim_time_s",
    "avg_speed_m2_s",
    "path_length_m",
    "hexes_visited",
    "completed",
]
METRIC_COLUMNS = ["coverage_pct", "sim_time_s", "avg_speed_m2_s", "path_length_m", "hexes_visited"]


def make_environment(cfg: ExperimentConfig, seed: int) -> Environment:
    keep_clear = departure_clearance(cfg.bounds, cfg.r_t + cfg.l_r)
    if not isinstance(cfg.start, str):
        keep_clear.append((*cfg.start, cfg.r_t + cfg.l_r))
    return generate_environment(
        cfg.env_kind,
        bounds=cfg.bounds,
        n_obstacles=cfg.n_obstacles,
        radius_range=cfg.radius_range,
        seed=seed,
        keep_clear=keep_clear,
    )


def mission_dir(cfg: ExperimentConfig, variant: Variant, seed: int) -> Path:
    return Path(cfg.output_dir) / f"{cfg.env_kind.value}_{variant.value}_seed{seed}"


def run_trial(cfg: ExperimentConfig, variant: Variant, seed: int, write_files: bool = True) -> dict:
    env = make_environment(cfg, seed)
    result = run_mission(
        env,
        variant,
        cfg.path_params,
        dt=cfg.dt,
        start=cfg.start,
        cell_size=cfg.cell_size,
        observe_in_transit=cfg.observe_in_transit,
    )
    if write_files:
        out = mission_dir(cfg, variant, seed)
        out.mkdir(parents=True, exist_ok=True)
        write_trace_csv(result, out / "trace.csv")
        (out / "path.svg").write_text(render_svg(result, env))
        (out / "coverage.pgm").write_bytes(result.raster.to_pgm())
        (out / "planner.tsv").write_text(format_trace_log(result.state))
        (out / "mission.json").write_text(json.dumps(mission_record(cfg, variant, env, result), indent=1))
    return {
        "variant": variant.value,
        "env_kind": cfg.env_kind.value,
        "seed": seed,
        "coverage_pct": result.coverage_pct,
        "sim_time_s": result.sim_time,
        "avg_speed_m2_s": result.avg_speed,
        "path_length_m": result.path_length,
        "hexes_visited": result.hexes_visited,
        "completed": result.completed,
    }


def mission_record(cfg: ExperimentConfig, variant: Variant, env: Environment, result) -> dict:
    return {
        "variant": variant.value,
        "environment": env.to_dict(),
        "grid": {"r": result.grid.r, "origin": list(result.grid.origin)},
        "l_r": cfg.l_r,
        "cell_size": cfg.cell_size,
        "explored": [[c.x, c.y, c.z, int(s)] for c, s in sorted(result.state.explored.items())],
    }


def _run_trial_star(args):
    return run_trial(*args)


def _mean_std(values) -> str:
    values = [float(v) for v in values]
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return f"{mean:.2f}±{std:.2f}"


def aggregate_rows(rows: list[dict]) -> list[dict]:
    """One mean ± sample-standard-deviation row per variant."""
    out = []
    for variant in sorted({r["variant"] for r in rows}):
        sub = [r for r in rows if r["variant"] == variant]
        agg = {"trial": "mean±std", "variant": variant, "env_kind": sub[0]["env_kind"], "seed": ""}
        for col in METRIC_COLUMNS:
            agg[col] = _mean_std(r[col] for r in sub)
        agg["completed"] = f"{sum(bool(r['completed']) for r in sub)}/{len(sub)}"
        out.append(agg)
    return out


def run_experiments(cfg: ExperimentConfig, jobs: int = 1, write_files: bool = True) -> list[dict]:
    """Run every (variant, seed) trial; returns per-trial rows then aggregate rows."""
    tasks = [(cfg, v, s, write_files) for v in cfg.variant for s in cfg.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_trial_star, tasks))
    else:
        rows = [_run_trial_star(t) for t in tasks]
    rows.sort(key=lambda r: (r["variant"], r["seed"]))
    for k, row in enumerate(rows, 1):
        row["trial"] = k
    return rows + aggregate_rows(rows)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def format_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def oracle_report(cfg: ExperimentConfig, seed: int, variant: Variant = Variant.HDCP) -> dict:
    env = make_environment(cfg, seed)
    r = cfg.r_t + cfg.l_r
    g = GridParams(r, departure_point(env, cfg.start, r))
    truth = GroundTruth(env, g)
    start = world_to_cube(g.origin, g)
    reachable = truth.reachable_free(start)
    result = run_mission(
        env,
        variant,
        cfg.path_params,
        dt=cfg.dt,
        start=cfg.start,
        cell_size=cfg.cell_size,
        observe_in_transit=cfg.observe_in_transit,
    )
    visited = result.state.visited
    return {
        "seed": seed,
        "env_kind": cfg.env_kind.value,
        "variant": variant.value,
        "reachable_free": len(reachable),
        "visited": len(visited),
        "missed": sorted(map(tuple, reachable - visited)),
        "extra": sorted(map(tuple, visited - reachable)),
        "match": reachable == visited,
    }


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value configuration file")
    for key in KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="VALUE")


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in KEYS if getattr(args, k, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hexcover", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded experiments")
    _add_config_flags(run)
    run.add_argument("--jobs", type=int, default=1, help="worker processes")
    run.add_argument("--no-files", action="store_true", help="only write metrics.csv")

    render = sub.add_parser("render", help="render a trace to SVG")
    render.add_argument("--trace", required=True, help="trace.csv written by run")
    render.add_argument("--mission", required=True, help="mission.json written by run")
    render.add_argument("--out", required=True)

    oracle = sub.add_parser("oracle", help="flood-fill reachability report")
    _add_config_flags(oracle)
    oracle.add_argument("--seed", type=int, default=None, help="seed (default: first configured)")
    return parser


def cmd_run(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(serialize_config(cfg))
    rows = run_experiments(cfg, jobs=args.jobs, write_files=not args.no_files)
    text = format_csv(rows)
    (out / "metrics.csv").write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_render(args) -> int:
    record = json.loads(Path(args.mission).read_text())
    env = Environment.from_dict(record["environment"])
    g = GridParams(record["grid"]["r"], tuple(record["grid"]["origin"]))
    explored = {CubeCoord(x, y, z): Occupancy(s) for x, y, z, s in record["explored"]}
    poses, _ = read_trace_csv(args.trace)
    xy = poses[:, 1:3]
    raster = CoverageRaster.empty(env.bounds, record["cell_size"])
    sweep_coverage(raster, xy, record["l_r"])
    svg = svg_document(env, g, xy, raster.covered, raster.cell_size, explored, title=record["variant"])
    Path(args.out).write_text(svg)
    return 0


def cmd_oracle(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    report = oracle_report(cfg, seed)
    print(json.dumps(report))
    return 0 if report["match"] else 1


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": cmd_run, "render": cmd_render, "oracle": cmd_oracle}
    try:
        return handlers[args.command](args)
    except (HexCoverError, ValueError, OSError) as exc:
        print(f"hexcover: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
