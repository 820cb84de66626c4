"""Real-time coverage computation from simulated range scans.

Each tick queries the free cells within sensing range from the quadtree,
maps them into the sensor frame and marks those that fall inside a scan
beam (integer-degree orientation) closer than the beam's range.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gridmap import OccupancyGrid, cells_to_map, map_to_cell
from .spatial import Quadtree
from .zoning import CellTable, ZoneTable, least_covered_zone

FULL_CIRCLE = (0.0, 6.28)


class SensorPoseError(ValueError):
    """The sensor pose is not in free space."""


def fov_angles(fov) -> np.ndarray:
    """Integer degrees covered by a field of view given in radians.

    Both limits are converted to degrees and rounded down; the result is the
    sorted set of angles in ``[0, 360)``.
    """
    lo = math.floor(math.degrees(fov[0]))
    hi = math.floor(math.degrees(fov[1]))
    if hi < lo:
        raise ValueError(f"field of view {fov} has max < min")
    return np.unique(np.arange(lo, hi + 1) % 360)


@dataclass(frozen=True)
class Transform2D:
    """Rigid map -> sensor transform: ``p_s = R(rotation) @ p_m + translation``."""

    rotation: float
    translation: tuple[float, float]
    stamp: float = 0.0

    @classmethod
    def from_sensor_pose(cls, x, y, heading, stamp=0.0) -> "Transform2D":
        c, s = math.cos(-heading), math.sin(-heading)
        return cls(-heading, (-(c * x - s * y), -(s * x + c * y)), stamp)

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        tx, ty = self.translation
        return np.array([[c, -s, tx], [s, c, ty], [0.0, 0.0, 1.0]])

    def apply(self, pts: np.ndarray) -> np.ndarray:
        m = self.matrix
        pts = np.asarray(pts, dtype=float)
        return pts @ m[:2, :2].T + m[:2, 2]


@dataclass(frozen=True)
class SensorScan:
    """A range scan: ``ranges[a]`` is the range at integer degree ``a``.

    Only angles in ``angles`` carry a beam; ``ranges`` is 0 elsewhere.
    """

    angles: np.ndarray
    ranges: np.ndarray  # (360,)
    stamp: float
    max_range: float
    fov: tuple[float, float]

    @property
    def beam_mask(self) -> np.ndarray:
        m = np.zeros(360, dtype=bool)
        m[self.angles] = True
        return m

    def range_at(self, angle: int) -> float:
        return float(self.ranges[angle % 360])


def cell_angle(p_sensor) -> int:
    """Orientation of a sensor-frame point as integer degrees in ``[0, 360)``."""
    xs, ys = p_sensor
    if xs == 0 and ys == 0:
        raise ValueError("orientation of the sensor origin is undefined")
    return math.floor(math.degrees(math.atan2(ys, xs))) % 360


def cell_angles(p_sensor: np.ndarray) -> np.ndarray:
    """Vectorized :func:`cell_angle`; the origin maps to 0."""
    return np.floor(np.degrees(np.arctan2(p_sensor[:, 1], p_sensor[:, 0]))).astype(np.int64) % 360


def cast_rays(grid: OccupancyGrid, x, y, world_angles: np.ndarray, max_range: float) -> np.ndarray:
    """Exact ray/grid traversal for many rays from one point.

    Returns, per ray, the distance at which it enters the first occupied or
    unknown cell, capped at ``max_range``. Rays leaving the map return
    ``max_range``.
    """
    res = grid.res
    u = (x - grid.origin[0]) / res
    w = (y - grid.origin[1]) / res
    n = int(math.ceil(max_range / res)) + 2
    k = np.arange(n, dtype=float)
    dx = np.cos(world_angles)[:, None]
    dy = np.sin(world_angles)[:, None]
    ix0, iy0 = math.floor(u), math.floor(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(dx > 0, (ix0 + 1 + k - u) * res / dx,
                      np.where(dx < 0, (ix0 - k - u) * res / dx, np.inf))
        ty = np.where(dy > 0, (iy0 + 1 + k - w) * res / dy,
                      np.where(dy < 0, (iy0 - k - w) * res / dy, np.inf))
    t = np.concatenate([np.zeros((len(world_angles), 1)), tx, ty], axis=1)
    t = np.minimum(t, max_range)
    t.sort(axis=1)
    t0 = t[:, :-1]
    t1 = t[:, 1:]
    seg = t1 > t0
    mid = 0.5 * (t0 + t1)
    cx = np.floor(u + mid * dx / res).astype(np.int64)
    cy = np.floor(w + mid * dy / res).astype(np.int64)
    inb = (cx >= 0) & (cx < grid.width) & (cy >= 0) & (cy < grid.height)
    vals = np.zeros(cx.shape, dtype=np.int64)
    vals[inb] = grid.pda[cy[inb] * grid.width + cx[inb]]
    blocked = seg & inb & (vals != 0)
    first = np.argmax(blocked, axis=1)
    hit = blocked[np.arange(len(first)), first]
    return np.where(hit, t0[np.arange(len(first)), first], max_range)


def simulate_scan(pose, grid: OccupancyGrid, max_range: float, fov=FULL_CIRCLE, stamp=0.0):
    """Simulated scan and matching map -> sensor transform for a sensor pose
    ``(x, y, heading)``."""
    x, y, heading = pose
    c = map_to_cell((x, y), grid)
    if not grid.is_free(c.cx, c.cy):
        raise SensorPoseError(f"sensor pose ({x:.3f}, {y:.3f}) is not in free space")
    angles = fov_angles(fov)
    ranges = np.zeros(360)
    ranges[angles] = cast_rays(grid, x, y, heading + np.radians(angles), max_range)
    scan = SensorScan(angles, ranges, stamp, max_range, tuple(fov))
    return scan, Transform2D.from_sensor_pose(x, y, heading, stamp)


@dataclass
class CoverageState:
    """Coverage bookkeeping: per-cell table, per-zone table and total rate."""

    cells: CellTable
    zones: ZoneTable
    total_free: int
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @classmethod
    def from_tables(cls, zones: ZoneTable, cells: CellTable) -> "CoverageState":
        return cls(cells, zones, int(zones.n_free.sum()))

    @property
    def tc(self) -> float:
        return 100.0 * float(self.zones.n_covered.sum()) / self.total_free

    def mark(self, flat: np.ndarray) -> int:
        """Flag cells as covered and update zone counters; returns the number
        of newly covered cells. Serialized across threads."""
        with self._lock:
            flat = np.unique(flat)
            flat = flat[self.cells.covered[flat] == 0]
            if flat.size == 0:
                return 0
            self.cells.covered[flat] = 1
            zids = self.cells.zid[flat]
            counts = np.bincount(zids, minlength=self.zones.k)
            touched = np.flatnonzero(counts)
            self.zones.n_covered[touched] += counts[touched]
            for z in touched:
                self.zones.recompute_rate(z)
            return int(flat.size)

    def snapshot(self) -> "CoverageState":
        with self._lock:
            return CoverageState(self.cells.copy(), self.zones.copy(), self.total_free)


def match_cells(tf: Transform2D, cells: np.ndarray, scan: SensorScan, grid: OccupancyGrid,
                mark_all=False) -> np.ndarray:
    """Boolean mask of the cells a scan sees (pure; no state change)."""
    if len(cells) == 0:
        return np.zeros(0, dtype=bool)
    if mark_all:
        return np.ones(len(cells), dtype=bool)
    ps = tf.apply(cells_to_map(cells, grid))
    alpha = cell_angles(ps)
    dist = np.hypot(ps[:, 0], ps[:, 1])
    return scan.beam_mask[alpha] & (dist < scan.ranges[alpha])


def worker(tf: Transform2D, cells: np.ndarray, scan: SensorScan, state: CoverageState,
           grid: OccupancyGrid, mark_all=False) -> int:
    """Mark the not-yet-covered cells in ``cells`` that the scan sees.

    ``mark_all`` skips the sensor-matching step and marks every given cell
    (stress mode for the runway benchmark).
    """
    if tf.stamp != scan.stamp:
        raise ValueError(f"transform stamp {tf.stamp} != scan stamp {scan.stamp}")
    cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
    flat = cells[:, 1] * grid.width + cells[:, 0]
    todo = state.cells.covered[flat] == 0
    cells, flat = cells[todo], flat[todo]
    seen = match_cells(tf, cells, scan, grid, mark_all)
    return state.mark(flat[seen])


def parallel_worker(tf, cells, scan, state, grid, partitions: int, mark_all=False,
                    executor: ThreadPoolExecutor | None = None) -> int:
    """Run :func:`worker` over ``partitions`` disjoint slices of ``cells`` in threads."""
    cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
    if partitions <= 1:
        return worker(tf, cells, scan, state, grid, mark_all)
    chunks = np.array_split(cells, partitions)
    own = executor is None
    ex = executor or ThreadPoolExecutor(max_workers=partitions)
    try:
        futures = [ex.submit(worker, tf, c, scan, state, grid, mark_all) for c in chunks]
        return sum(f.result() for f in futures)
    finally:
        if own:
            ex.shutdown()


@dataclass(frozen=True)
class CoverageConfig:
    sr: float = 3.5
    fov: tuple[float, float] = FULL_CIRCLE
    dc: float = 90.0
    partitions: int = 1
    mark_all: bool = False


@dataclass(frozen=True)
class TickResult:
    tc: float
    least_zone: int
    least_zone_centroid: tuple[float, float]
    stop: bool
    newly_covered: int
    n_queried: int


def coverage_tick(pose, stamp, state: CoverageState, qt: Quadtree, grid: OccupancyGrid,
                  cfg: CoverageConfig, executor=None) -> TickResult:
    """One coverage update at ``stamp`` for a sensor at ``pose = (x, y, heading)``."""
    scan, tf = simulate_scan(pose, grid, cfg.sr, cfg.fov, stamp)
    c = map_to_cell(pose[:2], grid)
    cells = qt.query(c, cfg.sr / grid.res)
    n = parallel_worker(tf, cells, scan, state, grid, cfg.partitions, cfg.mark_all, executor)
    zid, centroid = least_covered_zone(state.zones, pose[:2])
    tc = state.tc
    return TickResult(tc, zid, tuple(centroid), tc >= cfg.dc, n, len(cells))
