"""Command line entry point: coverage missions, runway benchmark, zone preview."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import maps
from .config import ConfigError, RunConfig, load_config, parse_config
from .coverage import CoverageConfig, CoverageState, coverage_tick
from .export import (coverage_image, mission_report_items, write_metrics, write_ppm, write_report,
                     write_trajectory_log, zone_image)
from .gridmap import OccupancyGrid, load_map
from .planner import Mission
from .sim import NavPlan, PlanProgress, RobotState, advance
from .spatial import build_quadtree
from .zoning import ZoningError, make_zones

log = logging.getLogger(__name__)


def build_map(cfg: RunConfig) -> OccupancyGrid:
    if cfg.map_yaml is not None:
        return load_map(cfg.map_image, cfg.map_yaml)
    name = cfg.synthetic_map
    if name == "empty_room":
        return maps.empty_room(cfg.map_size)
    if name == "esquare":
        return maps.esquare(cfg.map_size)
    if name == "bungalow":
        return maps.bungalow()
    if name == "runway":
        return maps.runway(cfg.runway_length, cfg.runway_width)
    raise ConfigError(f"synthetic_map: unknown map {name!r}")


def _check_zones(cfg: RunConfig, grid: OccupancyGrid) -> None:
    if cfg.zones > grid.n_free:
        raise ConfigError(f"zones: {cfg.zones} zones requested but the map has only {grid.n_free} free cells")


# ---------------------------------------------------------------------------
# run


@dataclass
class RunArtifacts:
    report: object
    out: str
    files: dict


def cmd_run(cfg: RunConfig, on_tick=None) -> RunArtifacts:
    """Run one mission and export its artifacts; ``on_tick(mission, result)`` observes every coverage tick."""
    mcfg = cfg.mission_config()
    grid = build_map(cfg)
    _check_zones(cfg, grid)
    os.makedirs(cfg.out, exist_ok=True)

    wall0 = time.perf_counter()
    zt, ct = make_zones(grid, cfg.zones, cfg.seed)
    zone_rgb = zone_image(grid, ct.zid, zt.centroids)
    mission = Mission(grid, mcfg, zones=(zt, ct), on_tick=on_tick)
    report = mission.run()
    wall = time.perf_counter() - wall0

    files = {k: os.path.join(cfg.out, v) for k, v in dict(
        config="config.txt", trajectory="trajectory.csv", metrics="metrics.csv",
        coverage="coverage.ppm", zones="zones.ppm", report="report.txt").items()}
    with open(files["config"], "w") as fh:
        fh.write(cfg.to_text())
    write_trajectory_log(files["trajectory"], report.dispatches)
    write_metrics(files["metrics"], report.series)
    write_ppm(files["coverage"], coverage_image(grid, mission.coverage.cells.covered))
    write_ppm(files["zones"], zone_rgb)
    write_report(files["report"], mission_report_items(report, cfg))
    print(f"success={str(report.success).lower()} tc={report.tc:.3f}% ct={report.ct_minutes:.2f} min "
          f"hops={report.hops} sets={report.sets} wall={wall:.1f} s -> {cfg.out}")
    if report.message:
        print(f"note: {report.message}")
    return RunArtifacts(report, cfg.out, files)


# ---------------------------------------------------------------------------
# runway


@dataclass
class RunwayStats:
    v: float
    sr: float
    distances: np.ndarray  # distance traveled between successive worker calls
    accel_distance: float
    worker_seconds: np.ndarray

    @property
    def average(self) -> float:
        return float(self.distances.mean())

    @property
    def maximum(self) -> float:
        return float(self.distances.max())

    @property
    def minimum(self) -> float:
        return float(self.distances.min())

    @property
    def gap(self) -> bool:
        """Coverage gaps are expected when the sensor moves more than SR per update."""
        return self.average > self.sr

    def items(self) -> dict:
        return {
            "v_mps": f"{self.v:g}",
            "sr_m": f"{self.sr:g}",
            "samples": len(self.distances),
            "accel_distance_m": f"{self.accel_distance:.6f}",
            "average_m": f"{self.average:.6f}",
            "max_m": f"{self.maximum:.6f}",
            "min_m": f"{self.minimum:.6f}",
            "coverage_gap": str(self.gap).lower(),
        }


def cmd_runway(cfg: RunConfig, min_samples: int = 3, max_samples: int | None = None) -> RunwayStats:
    """Drive straight down a corridor at ``cfg.v`` and measure update spacing.

    The robot accelerates at ``runway_accel`` until it reaches ``v``; only then
    do coverage updates start. Each update runs the full worker; the distance
    traveled since the previous update is recorded, up to ``max_samples``.
    """
    cfg.validate()
    if cfg.runway_accel <= 0:
        raise ConfigError(f"runway_accel: must be > 0 (got {cfg.runway_accel})")
    grid = maps.runway(cfg.runway_length, cfg.runway_width) if cfg.map_yaml is None else build_map(cfg)
    _check_zones(cfg, grid)
    qt = build_quadtree(grid, cfg.quadtree_capacity)
    zt, ct = make_zones(grid, cfg.zones, cfg.seed)
    state = CoverageState.from_tables(zt, ct)
    cov = CoverageConfig(cfg.sr, tuple(cfg.fov), 100.0, cfg.partitions, cfg.mark_all)

    # straight line along the corridor center, clear of the end walls
    margin = cfg.robot_radius + grid.res
    y = grid.origin[1] + grid.height * grid.res / 2.0
    x0 = grid.origin[0] + grid.res + margin
    x1 = grid.origin[0] + (grid.width - 1) * grid.res - margin
    d_acc = cfg.v * cfg.v / (2.0 * cfg.runway_accel)
    step = cfg.v * cfg.scan_period
    usable = (x1 - x0) - d_acc
    if usable < min_samples * step:
        raise ConfigError(
            f"runway_length: corridor too short for steady state at v={cfg.v} m/s "
            f"({x1 - x0:.2f} m usable, need {d_acc + min_samples * step:.2f} m)")

    plan = NavPlan([(x0 + d_acc, y), (x1, y)])
    prog = PlanProgress(plan)
    robot = RobotState(x0 + d_acc, y, 0.0, 0.0, cfg.v, scan_period=cfg.scan_period)
    distances, timings = [], []
    since = 0.0

    def update():
        t0 = time.perf_counter()
        coverage_tick(robot.pose, robot.t, state, qt, grid, cov)
        timings.append(time.perf_counter() - t0)

    update()
    robot.scans = 1
    while prog.remaining > 0 and (max_samples is None or len(distances) < max_samples):
        before = robot.odometer
        _, events = advance(robot, prog, cfg.scan_period, 0.0)
        since += robot.odometer - before
        if "sensor_due" in events and prog.remaining > 0:
            update()
            distances.append(since)
            since = 0.0
        elif not events:
            break
    return RunwayStats(cfg.v, cfg.sr, np.asarray(distances), d_acc, np.asarray(timings))


# ---------------------------------------------------------------------------
# zones


def cmd_zones(cfg: RunConfig) -> str:
    cfg.validate()
    grid = build_map(cfg)
    _check_zones(cfg, grid)
    zt, ct = make_zones(grid, cfg.zones, cfg.seed)
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, "zones.ppm")
    write_ppm(path, zone_image(grid, ct.zid, zt.centroids))
    sizes = ", ".join(str(n) for n in zt.n_free)
    print(f"{cfg.zones} zones -> {path} (cells per zone: {sizes})")
    return path


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaoscover", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run a coverage mission and export artifacts"),
                       ("runway", "measure distance traveled between coverage updates"),
                       ("zones", "write the zone preview image")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", metavar="PATH", help="key = value configuration file")
        s.add_argument("--seed", type=int, metavar="N", help="override the configured seed")
        s.add_argument("--out", metavar="DIR", help="output directory")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration key (repeatable)")
    return p


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.set:
        cfg = parse_config("\n".join(args.set), base=cfg, source="--set")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = dataclasses.replace(cfg, out=args.out)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "run":
            return 0 if cmd_run(cfg).report.success else 1
        if args.command == "runway":
            stats = cmd_runway(cfg)
            for k, v in stats.items().items():
                print(f"{k} = {v}")
            w = stats.worker_seconds
            print(f"# worker wall time: mean {1e3 * w.mean():.3f} ms, max {1e3 * w.max():.3f} ms")
            if stats.gap:
                print("warning: average update spacing exceeds the sensor range; expect coverage gaps")
            return 0
        cmd_zones(cfg)
        return 0
    except (ConfigError, ZoningError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
