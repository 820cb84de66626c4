"""Deterministic robot simulation: global grid planner and path follower.

Stands in for a navigation stack. Paths are shortest 8-connected paths on
the obstacle-inflated grid, simplified by line of sight, and followed
exactly at constant speed.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .gridmap import OccupancyGrid, disc_offsets, map_to_cell

SQRT2 = math.sqrt(2.0)


class Unreachable(RuntimeError):
    """No path exists between start and goal on the inflated grid."""


def inflate(grid: OccupancyGrid, radius_m: float) -> np.ndarray:
    """``[cy, cx]`` mask of cells the robot center may occupy.

    A cell is blocked when any non-free cell (or the outside of the map) lies
    within ``radius_m`` of it, measured between cell indices.
    """
    k = int(math.ceil(radius_m / grid.res))
    r = radius_m / grid.res
    blocked = ~grid.free_mask
    padded = np.ones((grid.height + 2 * k, grid.width + 2 * k), dtype=bool)
    padded[k:k + grid.height, k:k + grid.width] = blocked
    out = np.zeros_like(blocked)
    for dx, dy in disc_offsets(r):
        out |= padded[k + dy:k + dy + grid.height, k + dx:k + dx + grid.width]
    return ~out


@dataclass
class NavPlan:
    points: np.ndarray  # (n, 2) map-frame polyline, start first

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        seg = np.diff(self.points, axis=0)
        self.seg_len = np.hypot(seg[:, 0], seg[:, 1])
        self.cum = np.concatenate(([0.0], np.cumsum(self.seg_len)))

    @property
    def length(self) -> float:
        return float(self.cum[-1])

    @property
    def goal(self):
        return tuple(self.points[-1])

    def point_at(self, s: float):
        """Position and heading at arc length ``s`` (clamped to the path)."""
        if len(self.points) == 1 or s <= 0:
            i = 0
        else:
            s = min(s, self.length)
            i = int(np.searchsorted(self.cum, s, side="right")) - 1
            i = min(i, len(self.seg_len) - 1)
        if len(self.points) == 1:
            return tuple(self.points[0]), None
        # skip zero-length segments for the heading
        j = i
        while j < len(self.seg_len) - 1 and self.seg_len[j] == 0:
            j += 1
        p0 = self.points[i]
        d = self.points[i + 1] - p0
        frac = 0.0 if self.seg_len[i] == 0 else (s - self.cum[i]) / self.seg_len[i]
        pos = (float(p0[0] + frac * d[0]), float(p0[1] + frac * d[1]))
        dj = self.points[j + 1] - self.points[j]
        heading = math.atan2(dj[1], dj[0]) if self.seg_len[j] > 0 else None
        return pos, heading


class Navigator:
    """Grid planner bound to one map and robot radius."""

    def __init__(self, grid: OccupancyGrid, robot_radius: float = 0.2):
        self.grid = grid
        self.robot_radius = robot_radius
        self.passable = inflate(grid, robot_radius)
        self._flat_passable = self.passable.ravel()

    def cell_passable(self, cx, cy) -> bool:
        return 0 <= cx < self.grid.width and 0 <= cy < self.grid.height and bool(self.passable[cy, cx])

    def point_passable(self, p) -> bool:
        c = map_to_cell(p, self.grid)
        return self.cell_passable(c.cx, c.cy)

    def line_of_sight(self, a, b) -> bool:
        """Conservative check that segment ``a -> b`` touches only passable cells."""
        g = self.grid
        ua = ((a[0] - g.origin[0]) / g.res, (a[1] - g.origin[1]) / g.res)
        ub = ((b[0] - g.origin[0]) / g.res, (b[1] - g.origin[1]) / g.res)
        length = math.hypot(ub[0] - ua[0], ub[1] - ua[1])
        step = 0.25
        n = max(1, int(math.ceil(length / step)))
        t = np.linspace(0.0, 1.0, n + 1)
        xs = ua[0] + t * (ub[0] - ua[0])
        ys = ua[1] + t * (ub[1] - ua[1])
        eps = step
        for ox in (-eps, 0.0, eps):
            for oy in (-eps, 0.0, eps):
                cx = np.floor(xs + ox).astype(np.int64)
                cy = np.floor(ys + oy).astype(np.int64)
                if np.any((cx < 0) | (cx >= g.width) | (cy < 0) | (cy >= g.height)):
                    return False
                if not np.all(self.passable[cy, cx]):
                    return False
        return True

    def grid_path(self, start_cell, goal_cell) -> list[tuple[int, int]]:
        """Shortest 8-connected cell path (A* with the octile heuristic).

        Diagonal moves require both adjacent orthogonal cells to be passable.
        """
        W = self.grid.width
        passable = self._flat_passable
        sx, sy = start_cell
        gx, gy = goal_cell
        if not self.cell_passable(sx, sy):
            raise Unreachable(f"start cell {start_cell} is blocked")
        if not self.cell_passable(gx, gy):
            raise Unreachable(f"goal cell {goal_cell} is blocked")
        start, goal = sy * W + sx, gy * W + gx
        if start == goal:
            return [(sx, sy)]

        def h(i):
            dx = abs(i % W - gx)
            dy = abs(i // W - gy)
            return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)

        H = self.grid.height
        g_cost = {start: 0.0}
        parent = {start: -1}
        closed = set()
        heap = [(h(start), 0.0, start)]
        moves = ((1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
                 (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2))
        while heap:
            _, gc, i = heapq.heappop(heap)
            if i in closed:
                continue
            if i == goal:
                break
            closed.add(i)
            x, y = i % W, i // W
            for dx, dy, c in moves:
                nx, ny = x + dx, y + dy
                if not (0 <= nx < W and 0 <= ny < H):
                    continue
                j = ny * W + nx
                if not passable[j] or j in closed:
                    continue
                if dx and dy and not (passable[y * W + nx] and passable[ny * W + x]):
                    continue
                ng = gc + c
                if ng < g_cost.get(j, math.inf):
                    g_cost[j] = ng
                    parent[j] = i
                    heapq.heappush(heap, (ng + h(j), ng, j))
        else:
            raise Unreachable(f"no path from {start_cell} to {goal_cell}")
        path = []
        i = goal
        while i != -1:
            path.append((i % W, i // W))
            i = parent[i]
        path.reverse()
        return path

    def plan_path(self, start, goal) -> NavPlan:
        """Plan from map point ``start`` to map point ``goal``."""
        start = (float(start[0]), float(start[1]))
        goal = (float(goal[0]), float(goal[1]))
        if start == goal:
            return NavPlan([start])
        if not self.point_passable(start):
            raise Unreachable(f"start {start} is not in inflated free space")
        if not self.point_passable(goal):
            raise Unreachable(f"goal {goal} is not in inflated free space")
        if self.line_of_sight(start, goal):
            return NavPlan([start, goal])
        g = self.grid
        cells = self.grid_path(map_to_cell(start, g), map_to_cell(goal, g))
        centers = [start] + [((cx + 0.5) * g.res + g.origin[0], (cy + 0.5) * g.res + g.origin[1])
                             for cx, cy in cells] + [goal]
        return NavPlan(self._simplify(centers))

    def _simplify(self, pts):
        out = [pts[0]]
        anchor = 0
        i = 1
        while i < len(pts) - 1:
            if self.line_of_sight(pts[anchor], pts[i + 1]):
                i += 1
                continue
            out.append(pts[i])
            anchor = i
            i += 1
        out.append(pts[-1])
        return out


def plan_path(start, goal, grid: OccupancyGrid, robot_radius: float = 0.2) -> NavPlan:
    return Navigator(grid, robot_radius).plan_path(start, goal)


# ---------------------------------------------------------------------------
# robot state and stepping

GOAL_REACHED = "goal_reached"
SENSOR_DUE = "sensor_due"


@dataclass
class RobotState:
    x: float
    y: float
    theta: float = 0.0
    t: float = 0.0
    v: float = 0.22
    odometer: float = 0.0
    scan_period: float = 0.2
    scans: int = 0  # sensor ticks issued so far; tick k is due at k * scan_period

    @property
    def next_scan(self) -> float:
        return self.scans * self.scan_period

    @property
    def pose(self):
        return (self.x, self.y, self.theta)

    @property
    def position(self):
        return (self.x, self.y)


@dataclass
class PlanProgress:
    plan: NavPlan
    s: float = 0.0

    @property
    def remaining(self) -> float:
        return self.plan.length - self.s


def advance(state: RobotState, progress: PlanProgress, dt: float, goal_threshold: float = 0.2):
    """Move along the plan for up to ``dt`` seconds.

    Returns ``(state, events)``. Motion stops early at the end of the plan,
    in which case only the time actually spent moving elapses. A goal counts
    as reached once the remaining path length is within ``goal_threshold``.
    """
    events = []
    if progress.remaining <= goal_threshold:
        events.append(GOAL_REACHED)
        return state, events
    step = min(state.v * dt, progress.remaining)
    elapsed = dt if step == state.v * dt else step / state.v
    progress.s += step
    (x, y), heading = progress.plan.point_at(progress.s)
    state.x, state.y = x, y
    if heading is not None:
        state.theta = heading
    state.t += elapsed
    state.odometer += step
    if state.t + 1e-9 >= state.next_scan:
        events.append(SENSOR_DUE)
        while state.next_scan <= state.t + 1e-9:
            state.scans += 1
    if progress.remaining <= goal_threshold:
        events.append(GOAL_REACHED)
    return state, events
