"""Obstacle-proximity cost of a cell and the replacement search around a point."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .gridmap import MapPoint, OccupancyGrid, cells_to_map, disc_offsets, map_to_cell
from .spatial import Quadtree

OUT_OF_BOUNDS_VALUE = 500

# Ordered above every finite cost; marks a point no free cell could replace.
COST_MAX = math.inf


class CostedPoint(NamedTuple):
    tp: MapPoint
    cost: float

    @property
    def irreplaceable(self) -> bool:
        return self.cost == COST_MAX


def _assigned_values(grid: OccupancyGrid) -> np.ndarray:
    # |occupancy|: free 0, unknown 1, occupied 100
    return np.abs(grid.as_array().astype(np.int64))


def cost_g(c, grid: OccupancyGrid, l: float) -> float:
    """Mean assigned value over every integer coordinate within ``l`` of ``c``.

    In-bounds coordinates contribute the absolute occupancy value, those
    outside the map contribute 500.
    """
    cx, cy = int(c[0]), int(c[1])
    k = int(math.floor(l))
    total = 0
    n = 0
    for dy in range(-k, k + 1):
        for dx in range(-k, k + 1):
            if dx * dx + dy * dy > l * l:
                continue
            n += 1
            x, y = cx + dx, cy + dy
            if grid.in_bounds(x, y):
                total += abs(grid.value(x, y))
            else:
                total += OUT_OF_BOUNDS_VALUE
    return total / n


class CostField:
    """``cost_g`` precomputed for every cell of a grid.

    Sums are accumulated in integers, so the values equal :func:`cost_g`
    exactly.
    """

    def __init__(self, grid: OccupancyGrid, l: float):
        self.grid = grid
        self.l = l
        offs = disc_offsets(l)
        k = int(math.floor(l))
        vals = _assigned_values(grid)
        padded = np.full((grid.height + 2 * k, grid.width + 2 * k), OUT_OF_BOUNDS_VALUE, dtype=np.int64)
        padded[k:k + grid.height, k:k + grid.width] = vals
        acc = np.zeros((grid.height, grid.width), dtype=np.int64)
        for dx, dy in offs:
            acc += padded[k + dy:k + dy + grid.height, k + dx:k + dx + grid.width]
        self.n = len(offs)
        self.values = acc / self.n
        self.values.setflags(write=False)
        self._flat = self.values.ravel()

    def at(self, cx, cy) -> float:
        return float(self.values[cy, cx])

    def at_flat(self, flat: np.ndarray) -> np.ndarray:
        return self._flat[flat]


def shift(tp, tp_prev, lam: float, qt: Quadtree, field: CostField, r: float) -> CostedPoint:
    """Replace ``tp`` by the cheapest free cell within ``r`` cells of it.

    Cost of a candidate is ``g + lam * |candidate - tp_prev|`` (meters). Ties
    go to the first candidate in quadtree order. An empty query returns
    ``(tp, COST_MAX)``.
    """
    grid = field.grid
    center = map_to_cell(tp, grid)
    idx = qt.query_indices(center.cx, center.cy, r)
    if idx.size == 0:
        return CostedPoint(MapPoint(float(tp[0]), float(tp[1])), COST_MAX)
    cost = field.at_flat(qt.flat[idx])
    pts = cells_to_map(qt.points[idx], grid)
    if lam:
        cost = cost + lam * np.hypot(pts[:, 0] - tp_prev[0], pts[:, 1] - tp_prev[1])
    best = int(np.argmin(cost))
    return CostedPoint(MapPoint(float(pts[best, 0]), float(pts[best, 1])), float(cost[best]))


def shift_candidates(tp, tp_prev, lam, qt: Quadtree, field: CostField, r):
    """All ``(cell, cost)`` pairs :func:`shift` evaluates, in evaluation order."""
    grid = field.grid
    center = map_to_cell(tp, grid)
    cells = qt.query(center, r)
    pts = cells_to_map(cells, grid)
    cost = field.at_flat(cells[:, 1] * grid.width + cells[:, 0])
    if lam:
        cost = cost + lam * np.hypot(pts[:, 0] - tp_prev[0], pts[:, 1] - tp_prev[1])
    return cells, cost
