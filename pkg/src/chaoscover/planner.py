"""Chaotic trajectory planner and the mission loop.

A mission alternates two stages per set of ``ns`` iterations:

* generation: RK4 steps of the Arnold/kinematics system produce trajectory
  points; non-viable ones are shifted to the cheapest nearby free cell,
  falling back to alternate DS indices when the shift is too costly;
* execution: each point is re-checked against the tighter threshold (and
  replaced around the robot if needed) right before it becomes the goal.

Every ``n_iter`` iterations, or after repeated bad sets, the robot hops to
the least covered zone and restarts the chaotic evolution from there.
"""

from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .chaos import DEFAULT_IC, ArnoldParams, AugmentedState, DsIndex, rk4_step
from .cost import COST_MAX, CostedPoint, CostField, shift
from .coverage import CoverageConfig, CoverageState, coverage_tick
from .gridmap import MapPoint, OccupancyGrid, map_to_cell
from .sim import GOAL_REACHED, SENSOR_DUE, Navigator, PlanProgress, RobotState, Unreachable, advance
from .spatial import Quadtree, build_quadtree
from .zoning import ZoneUnusable, adjust_centroid, least_covered_zone, make_zones, zone_order

log = logging.getLogger(__name__)


class MissionAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class PlannerConfig:
    n_iter: int = 20
    ns: int = 20
    th1: float = 50.0
    th2: float = 25.0
    r: float = 19.0
    l: float = 6.0
    dc: float = 90.0
    ds_primary: DsIndex = DsIndex.X
    bad_run_limit: int = 3

    def __post_init__(self):
        errors = []
        if self.ns < 1:
            errors.append(f"ns must be >= 1 (got {self.ns})")
        if self.n_iter < self.ns:
            errors.append(f"n_iter must be >= ns (got {self.n_iter} < {self.ns})")
        if not 0 < self.th2 < self.th1:
            errors.append(f"need 0 < th2 < th1 (got th2={self.th2}, th1={self.th1})")
        if self.r < 1:
            errors.append(f"r must be >= 1 (got {self.r})")
        if self.l < 1:
            errors.append(f"l must be >= 1 (got {self.l})")
        if not 0 <= self.dc <= 100:
            errors.append(f"dc must be within [0, 100] (got {self.dc})")
        if self.bad_run_limit < 1:
            errors.append(f"bad_run_limit must be >= 1 (got {self.bad_run_limit})")
        if errors:
            raise ValueError("; ".join(errors))
        object.__setattr__(self, "ds_primary", DsIndex(self.ds_primary))


class SeedRecord(NamedTuple):
    ds: tuple[float, float, float]
    tp: MapPoint


class SetOutcome(enum.Enum):
    COMPLETE = "complete"
    BOUNDARY_BREAK = "boundary_break"


@dataclass(frozen=True)
class TrajectoryPoint:
    """One member of a generated set.

    ``cost`` is the cell cost for viable points and the shift cost for
    replaced ones (``COST_MAX`` when nothing could replace it).
    """

    tp: MapPoint
    cost: float
    ds: tuple[float, float, float]
    replaced: bool = False
    ds_index: DsIndex = DsIndex.X

    @property
    def irreplaceable(self) -> bool:
        return self.cost == COST_MAX


@dataclass
class GeneratedSet:
    points: list[TrajectoryPoint]
    next_seed: SeedRecord
    outcome: SetOutcome
    candidates: list[AugmentedState] = field(default_factory=list)

    @property
    def n_irreplaceable(self) -> int:
        return sum(p.irreplaceable for p in self.points)


def _evaluate(cand: AugmentedState, tp_prev, qt, field_: CostField, cfg: PlannerConfig):
    """Cost a fresh candidate: ``(CostedPoint, viable)`` or ``None`` if outside the map."""
    grid = field_.grid
    c = map_to_cell(cand.position, grid)
    if not grid.in_bounds(c.cx, c.cy):
        return None
    if grid.is_free(c.cx, c.cy):
        return CostedPoint(MapPoint(cand.X, cand.Y), field_.at(c.cx, c.cy)), True
    return shift(cand.position, tp_prev, 1, qt, field_, cfg.r), False


def generate_set(seed: SeedRecord, cfg: PlannerConfig, params: ArnoldParams, qt: Quadtree,
                 field_: CostField) -> GeneratedSet:
    """Generation stage: up to ``ns`` trajectory points from ``seed``."""
    state = AugmentedState(*seed.ds, *seed.tp)
    tp_prev = seed.tp
    points: list[TrajectoryPoint] = []
    candidates: list[AugmentedState] = []
    outcome = SetOutcome.COMPLETE
    primary = cfg.ds_primary

    for _ in range(cfg.ns):
        cand = rk4_step(state, params, primary)
        candidates.append(cand)
        evaluated = _evaluate(cand, tp_prev, qt, field_, cfg)
        if evaluated is None:
            outcome = SetOutcome.BOUNDARY_BREAK
            break
        best, viable = evaluated
        chosen_idx = primary
        if not viable and best.cost >= cfg.th1:
            options = [(best, False, primary)]
            for alt in primary.alternates():
                alt_cand = rk4_step(state, params, alt)
                alt_eval = _evaluate(alt_cand, tp_prev, qt, field_, cfg)
                if alt_eval is None:
                    continue
                alt_best, alt_viable = alt_eval
                options.append((alt_best, alt_viable, alt))
                if alt_viable or alt_best.cost < cfg.th1:
                    break
            last = options[-1]
            if last[1] or last[0].cost < cfg.th1:
                best, viable, chosen_idx = last
            else:
                # first option wins ties: min() is stable
                best, viable, chosen_idx = min(options, key=lambda o: o[0].cost)
        point = TrajectoryPoint(best.tp, best.cost, cand.ds, replaced=not viable, ds_index=chosen_idx)
        points.append(point)
        state = AugmentedState(*point.ds, *point.tp)
        tp_prev = point.tp

    return GeneratedSet(points, SeedRecord(state.ds, MapPoint(state.X, state.Y)), outcome, candidates)


@dataclass(frozen=True)
class Dispatch:
    """A goal handed to the navigator."""

    t: float
    goal: MapPoint
    replaced: bool
    stage: str  # gen | s1 | s2 | hop
    cost: float
    reached: bool


def execute_set(points, cfg: PlannerConfig, qt: Quadtree, field_: CostField, nav) -> list[Dispatch]:
    """Execution stage: check each point right before dispatching it.

    ``nav`` provides ``position`` (current robot point), ``goto(goal, ...)``
    returning whether the goal was reached, and ``done``.
    """
    grid = field_.grid
    out = []
    for p in points:
        if nav.done:
            break
        goal, cost = p.tp, p.cost
        stage = "s1" if p.replaced else "gen"
        replaced = p.replaced
        c = map_to_cell(goal, grid)
        if not grid.is_free(c.cx, c.cy) or cost >= cfg.th2:
            robot = nav.position
            sub = shift(robot, robot, 0, qt, field_, cfg.r)
            if not sub.irreplaceable:
                goal, cost, stage, replaced = sub.tp, sub.cost, "s2", True
        out.append(nav.goto(goal, stage=stage, replaced=replaced, cost=cost))
    return out


# ---------------------------------------------------------------------------
# mission


@dataclass(frozen=True)
class MissionConfig:
    planner: PlannerConfig = PlannerConfig()
    arnold: ArnoldParams = ArnoldParams()
    coverage: CoverageConfig = CoverageConfig()
    ic: tuple[float, float, float] = DEFAULT_IC
    zones: int = 20
    seed: int = 0
    goal_threshold: float = 0.2
    scan_period: float = 0.2
    robot_radius: float = 0.2
    start: tuple[float, float] | None = None
    max_sim_minutes: float = 600.0
    max_idle_sets: int = 200
    quadtree_capacity: int = 8


@dataclass
class MissionReport:
    success: bool
    ct_seconds: float
    tc: float
    zone_coverage: np.ndarray
    series: list[tuple[float, float]]
    hops: int
    sets: int
    replacements_stage1: int
    replacements_stage2: int
    nav_failures: int
    boundary_breaks: int
    bad_sets: int
    dispatches: list[Dispatch]
    message: str = ""

    @property
    def ct_minutes(self) -> float:
        return self.ct_seconds / 60.0


class Mission:
    """Owns the simulated robot, coverage state and planner loop."""

    def __init__(self, grid: OccupancyGrid, cfg: MissionConfig, qt: Quadtree | None = None,
                 zones=None, field_: CostField | None = None, on_tick=None):
        self.grid = grid
        self.cfg = cfg
        self.pcfg = cfg.planner
        self.qt = qt or build_quadtree(grid, cfg.quadtree_capacity)
        self.field = field_ or CostField(grid, cfg.planner.l)
        zt, ct = zones or make_zones(grid, cfg.zones, cfg.seed)
        self.coverage = CoverageState.from_tables(zt, ct)
        self.navigator = Navigator(grid, cfg.robot_radius)
        cov = cfg.coverage
        if cov.dc != cfg.planner.dc:
            cov = CoverageConfig(cov.sr, cov.fov, cfg.planner.dc, cov.partitions, cov.mark_all)
        self.cov_cfg = cov
        self._executor = ThreadPoolExecutor(cov.partitions) if cov.partitions > 1 else None

        start = cfg.start if cfg.start is not None else default_start(grid, self.field, self.navigator)
        if not self.navigator.point_passable(start):
            raise MissionAborted(f"start position {tuple(start)} is not in inflated free space")
        self.robot = RobotState(float(start[0]), float(start[1]), 0.0, 0.0, cfg.arnold.v,
                                scan_period=cfg.scan_period)
        self.on_tick = on_tick
        self.done = False
        self.aborted = ""
        self.series: list[tuple[float, float]] = []
        self.dispatches: list[Dispatch] = []
        self.last_tick = None
        self._max_t = cfg.max_sim_minutes * 60.0

    @property
    def position(self) -> MapPoint:
        return MapPoint(self.robot.x, self.robot.y)

    def tick(self):
        res = coverage_tick(self.robot.pose, self.robot.t, self.coverage, self.qt, self.grid,
                            self.cov_cfg, self._executor)
        self.last_tick = res
        self.series.append((self.robot.t, res.tc))
        if self.on_tick is not None:
            self.on_tick(self, res)
        if res.stop:
            self.done = True
        return res

    def goto(self, goal, stage="gen", replaced=False, cost=0.0) -> Dispatch:
        t0 = self.robot.t
        goal = MapPoint(float(goal[0]), float(goal[1]))
        try:
            plan = self.navigator.plan_path(self.position, goal)
        except Unreachable:
            d = Dispatch(t0, goal, replaced, stage, cost, False)
            self.dispatches.append(d)
            return d
        prog = PlanProgress(plan)
        while not self.done:
            _, events = advance(self.robot, prog, self.cfg.scan_period, self.cfg.goal_threshold)
            if SENSOR_DUE in events:
                self.tick()
            if GOAL_REACHED in events:
                break
            if self.robot.t > self._max_t:
                self.done = True
                self.aborted = f"simulated time limit of {self.cfg.max_sim_minutes} min reached"
        d = Dispatch(t0, goal, replaced, stage, cost, prog.remaining <= self.cfg.goal_threshold)
        self.dispatches.append(d)
        return d

    def hop(self) -> MapPoint | None:
        """Navigate to the least covered zone that can be reached."""
        first, _ = least_covered_zone(self.coverage.zones, self.position)
        order = [first] + [z for z in zone_order(self.coverage.zones, self.position) if z != first]
        for zid in order:
            centroid = self.coverage.zones.centroids[zid]
            try:
                target = adjust_centroid(centroid, self.qt, self.field, self.pcfg.r)
            except ZoneUnusable:
                log.debug("zone %d unusable", zid)
                continue
            d = self.goto(target, stage="hop", replaced=False, cost=0.0)
            if d.reached or self.done:
                return target
        return None

    def run(self) -> MissionReport:
        cfg, pcfg = self.cfg, self.pcfg
        x0 = tuple(cfg.ic)
        seed = SeedRecord(x0, self.position)
        iters = 0
        bad_runs = 0
        boundary_break = False
        counts = dict(hops=0, sets=0, s1=0, s2=0, fail=0, breaks=0, bad=0)
        idle = 0

        self.tick()
        while not self.done:
            if iters >= pcfg.n_iter or bad_runs >= pcfg.bad_run_limit:
                target = self.hop()
                if self.done:
                    break
                if target is None:
                    self.aborted = "no zone centroid is reachable"
                    break
                counts["hops"] += 1
                seed = SeedRecord(x0, target)
                iters = 0
                bad_runs = 0
                boundary_break = False
            elif boundary_break:
                robot = self.position
                sub = shift(robot, robot, 0, self.qt, self.field, pcfg.r)
                seed = SeedRecord(x0, sub.tp)
                boundary_break = False

            t_before = self.robot.t
            gen = generate_set(seed, pcfg, cfg.arnold, self.qt, self.field)
            n_before = len(self.dispatches)
            execute_set(gen.points, pcfg, self.qt, self.field, self)
            sent = self.dispatches[n_before:]

            counts["sets"] += 1
            counts["s1"] += sum(p.replaced and not p.irreplaceable for p in gen.points)
            counts["s2"] += sum(d.stage == "s2" for d in sent)
            failures = sum(not d.reached for d in sent)
            counts["fail"] += failures
            iters += pcfg.ns
            seed = gen.next_seed
            if gen.outcome is SetOutcome.BOUNDARY_BREAK:
                boundary_break = True
                counts["breaks"] += 1
            bad = not gen.points or 2 * (gen.n_irreplaceable + failures) > len(gen.points)
            bad_runs = bad_runs + 1 if bad else 0
            counts["bad"] += bad

            idle = idle + 1 if self.robot.t == t_before else 0
            if idle > cfg.max_idle_sets and not self.done:
                self.aborted = f"robot made no progress for {idle} consecutive sets"
                break

        if self._executor is not None:
            self._executor.shutdown()
        tc = self.coverage.tc
        success = tc >= pcfg.dc and not self.aborted
        return MissionReport(
            success=success,
            ct_seconds=self.robot.t,
            tc=tc,
            zone_coverage=self.coverage.zones.c_z.copy(),
            series=list(self.series),
            hops=counts["hops"],
            sets=counts["sets"],
            replacements_stage1=counts["s1"],
            replacements_stage2=counts["s2"],
            nav_failures=counts["fail"],
            boundary_breaks=counts["breaks"],
            bad_sets=counts["bad"],
            dispatches=list(self.dispatches),
            message=self.aborted,
        )


def default_start(grid: OccupancyGrid, field_: CostField, navigator: Navigator) -> MapPoint:
    """Lowest-cost passable cell, closest to the free-space mean on ties."""
    cy, cx = np.nonzero(navigator.passable & grid.free_mask)
    if len(cx) == 0:
        raise MissionAborted("map has no cell the robot can occupy")
    fy, fx = np.nonzero(grid.free_mask)
    mx, my = fx.mean(), fy.mean()
    g = field_.values[cy, cx]
    d = np.hypot(cx - mx, cy - my)
    i = np.lexsort((d, g))[0]
    return MapPoint(float(cx[i] * grid.res + grid.origin[0]), float(cy[i] * grid.res + grid.origin[1]))


def run_mission(grid: OccupancyGrid, cfg: MissionConfig, **kwargs) -> MissionReport:
    return Mission(grid, cfg, **kwargs).run()
