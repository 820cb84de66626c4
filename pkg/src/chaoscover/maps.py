"""Synthetic occupancy grids used by tests, scripts and the runway benchmark."""

from __future__ import annotations

import numpy as np

from .gridmap import OCCUPIED, UNKNOWN, OccupancyGrid


def _cells(size_m, res):
    return int(round(size_m / res))


def empty_room(width_m=20.0, height_m=None, res=0.05, wall=1, origin=(0.0, 0.0)) -> OccupancyGrid:
    """Free rectangle enclosed by a ``wall``-cell thick occupied border."""
    height_m = width_m if height_m is None else height_m
    w, h = _cells(width_m, res), _cells(height_m, res)
    a = np.zeros((h, w), dtype=np.int16)
    a[:wall, :] = OCCUPIED
    a[-wall:, :] = OCCUPIED
    a[:, :wall] = OCCUPIED
    a[:, -wall:] = OCCUPIED
    return OccupancyGrid.from_array(a, res=res, origin=origin)


def esquare(size_m=32.0, res=0.05, wall_frac=0.5, wall_thickness_m=0.2) -> OccupancyGrid:
    """Square room with one interior wall.

    The wall runs vertically from the bottom edge through ``wall_frac`` of the
    room height, at one third of the width.
    """
    g = empty_room(size_m, res=res)
    a = g.as_array().copy()
    n = a.shape[0]
    t = max(1, _cells(wall_thickness_m, res))
    x = n // 3
    a[: int(n * wall_frac), x:x + t] = OCCUPIED
    return OccupancyGrid.from_array(a, res=res, origin=g.origin)


def bungalow(res=0.05) -> OccupancyGrid:
    """Multi-room house-like layout, about 20 m x 18 m with doorways."""
    w, h = _cells(20.0, res), _cells(18.0, res)
    a = np.zeros((h, w), dtype=np.int16)
    a[:2, :] = a[-2:, :] = OCCUPIED
    a[:, :2] = a[:, -2:] = OCCUPIED
    t = max(1, _cells(0.15, res))
    door = _cells(1.2, res)
    # interior walls: one vertical, two horizontal segments, each with a doorway
    xv = _cells(9.0, res)
    a[:, xv:xv + t] = OCCUPIED
    a[_cells(4.0, res):_cells(4.0, res) + door, xv:xv + t] = 0
    a[_cells(13.0, res):_cells(13.0, res) + door, xv:xv + t] = 0
    yh = _cells(9.0, res)
    a[yh:yh + t, :xv] = OCCUPIED
    a[yh:yh + t, _cells(4.0, res):_cells(4.0, res) + door] = 0
    yh2 = _cells(11.0, res)
    a[yh2:yh2 + t, xv:] = OCCUPIED
    a[yh2:yh2 + t, _cells(15.0, res):_cells(15.0, res) + door] = 0
    # furniture blocks
    a[_cells(2.0, res):_cells(3.5, res), _cells(2.5, res):_cells(5.0, res)] = OCCUPIED
    a[_cells(14.0, res):_cells(15.5, res), _cells(13.0, res):_cells(16.0, res)] = OCCUPIED
    return OccupancyGrid.from_array(a, res=res)


def runway(length_m=60.0, width_m=4.0, res=0.05) -> OccupancyGrid:
    """Long corridor along +x, closed at both ends."""
    return empty_room(length_m, width_m, res=res)


def two_blobs(res=0.05, size=12, gap=20, blob=4) -> OccupancyGrid:
    """Two ``blob`` x ``blob`` free squares separated by ``gap`` unknown cells."""
    w = 2 * blob + gap + 2
    a = np.full((size, w), UNKNOWN, dtype=np.int16)
    y0 = (size - blob) // 2
    a[y0:y0 + blob, 1:1 + blob] = 0
    a[y0:y0 + blob, 1 + blob + gap:1 + 2 * blob + gap] = 0
    return OccupancyGrid.from_array(a, res=res)


def random_grid(rng: np.random.Generator, max_side=64, density=None, min_side=2) -> OccupancyGrid:
    """Random grid of occupied/unknown/free cells (obstacle density 0-60%)."""
    w = int(rng.integers(min_side, max_side + 1))
    h = int(rng.integers(min_side, max_side + 1))
    d = rng.uniform(0.0, 0.6) if density is None else density
    u = rng.random((h, w))
    a = np.zeros((h, w), dtype=np.int16)
    a[u < d] = OCCUPIED
    a[(u < d) & (rng.random((h, w)) < 0.2)] = UNKNOWN
    return OccupancyGrid.from_array(a, res=0.05, origin=(float(rng.uniform(-5, 5)), float(rng.uniform(-5, 5))))
