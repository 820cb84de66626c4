"""Map zoning: k-means over free cells and the per-zone / per-cell tables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from .cost import CostField, shift
from .gridmap import MapPoint, OccupancyGrid, cells_to_map, map_to_cell
from .spatial import Quadtree

NO_ZONE = -1
DIST_TIE_TOL = 1e-9  # meters


class ZoningError(ValueError):
    pass


class ZoneUnusable(RuntimeError):
    """No free cell lies within the search radius of a zone centroid."""


@dataclass
class ZoneTable:
    """Per-zone centroid (meters) and coverage counters."""

    centroids: np.ndarray  # (k, 2)
    n_free: np.ndarray  # (k,) int
    n_covered: np.ndarray  # (k,) int
    c_z: np.ndarray  # (k,) percent

    @property
    def k(self) -> int:
        return len(self.n_free)

    def recompute_rate(self, zid=None):
        if zid is None:
            self.c_z[:] = 100.0 * self.n_covered / self.n_free
        else:
            self.c_z[zid] = 100.0 * self.n_covered[zid] / self.n_free[zid]

    def copy(self) -> "ZoneTable":
        return ZoneTable(self.centroids.copy(), self.n_free.copy(), self.n_covered.copy(), self.c_z.copy())


@dataclass
class CellTable:
    """Zone id (``NO_ZONE`` for non-free cells) and covered flag per flat index."""

    zid: np.ndarray  # (W*H,) int32
    covered: np.ndarray  # (W*H,) uint8

    def copy(self) -> "CellTable":
        return CellTable(self.zid.copy(), self.covered.copy())


def free_cell_points(grid: OccupancyGrid):
    """Flat indices (ascending) and map-frame points of all free cells."""
    flat = np.flatnonzero(grid.pda == 0)
    cells = np.stack([flat % grid.width, flat // grid.width], axis=1)
    return flat, cells_to_map(cells, grid)


def make_zones(grid: OccupancyGrid, k: int, seed: int = 0, max_iter: int = 300):
    """Cluster the free cells' map coordinates into ``k`` zones."""
    if k < 1:
        raise ZoningError(f"number of zones must be >= 1, got {k}")
    flat, pts = free_cell_points(grid)
    if len(flat) == 0:
        raise ZoningError("map has no free cells")
    if len(flat) < k:
        raise ZoningError(f"{k} zones requested but the map has only {len(flat)} free cells")

    km = KMeans(
        n_clusters=k,
        init="k-means++",
        n_init=1,
        max_iter=max_iter,
        tol=0.0,
        algorithm="lloyd",
        random_state=seed,
    )
    labels = km.fit_predict(pts).astype(np.int32)
    # sklearn may leave a cluster empty when points coincide; repair explicitly
    labels = _repair_empty(pts, labels, k)

    n_free = np.bincount(labels, minlength=k).astype(np.int64)
    centroids = np.empty((k, 2))
    for j in range(k):
        centroids[j] = pts[labels == j].mean(axis=0)

    zt = ZoneTable(centroids, n_free, np.zeros(k, dtype=np.int64), np.zeros(k))
    zid = np.full(grid.width * grid.height, NO_ZONE, dtype=np.int32)
    zid[flat] = labels
    ct = CellTable(zid, np.zeros(grid.width * grid.height, dtype=np.uint8))
    return zt, ct


def _repair_empty(pts, labels, k):
    for _ in range(k):
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            return labels
        centers = np.array([pts[labels == j].mean(axis=0) if counts[j] else (np.nan, np.nan)
                            for j in range(k)])
        d = np.full(len(pts), np.inf)
        for j in np.flatnonzero(counts):
            d = np.minimum(d, np.hypot(*(pts - centers[j]).T))
        # never steal the only member of a cluster
        d[counts[labels] <= 1] = -1
        labels = labels.copy()
        labels[int(np.argmax(d))] = empty[0]
    return labels


def zone_order(zt: ZoneTable, robot) -> list[int]:
    """Zone ids sorted by (coverage, distance to robot, zid)."""
    d = np.hypot(zt.centroids[:, 0] - robot[0], zt.centroids[:, 1] - robot[1])
    return sorted(range(zt.k), key=lambda j: (zt.c_z[j], d[j], j))


def least_covered_zone(zt: ZoneTable, robot) -> tuple[int, MapPoint]:
    """Zone with minimal coverage; ties by distance to ``robot`` (within
    ``DIST_TIE_TOL``), then by smallest zid."""
    if zt.k == 0:
        raise ZoningError("empty zone table")
    lowest = np.flatnonzero(zt.c_z == zt.c_z.min())
    d = np.hypot(zt.centroids[lowest, 0] - robot[0], zt.centroids[lowest, 1] - robot[1])
    j = int(lowest[np.flatnonzero(d <= d.min() + DIST_TIE_TOL)[0]])
    return j, MapPoint(float(zt.centroids[j, 0]), float(zt.centroids[j, 1]))


def adjust_centroid(centroid, qt: Quadtree, field: CostField, r: float) -> MapPoint:
    """Move a zone centroid off obstacles.

    The centroid itself is kept when its cell is free with cost 0; otherwise
    the cheapest free cell within ``r`` cells wins (first zero-cost cell in
    query order, if any).
    """
    grid = field.grid
    c = map_to_cell(centroid, grid)
    if grid.is_free(c.cx, c.cy) and field.at(c.cx, c.cy) == 0:
        return MapPoint(float(centroid[0]), float(centroid[1]))
    best = shift(centroid, centroid, 0, qt, field, r)
    if math.isinf(best.cost):
        raise ZoneUnusable(f"no free cell within {r} cells of centroid {tuple(centroid)}")
    return best.tp
