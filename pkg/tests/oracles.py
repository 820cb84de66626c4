"""Brute-force reference implementations used by the tests.

These deliberately avoid the package's vectorized code paths: plain loops
over every cell, textbook formulas, nothing shared but the grid container.
"""

from __future__ import annotations

import math

import numpy as np


def free_cells(grid):
    """Free cells in row-major order."""
    a = grid.as_array()
    return [(cx, cy) for cy in range(grid.height) for cx in range(grid.width) if a[cy, cx] == 0]


def linear_scan(grid, center, r):
    """Every free cell within Euclidean distance ``r`` (cells) of ``center``."""
    cx0, cy0 = center
    return sorted((cx, cy) for cx, cy in free_cells(grid) if (cx - cx0) ** 2 + (cy - cy0) ** 2 <= r * r)


def brute_g(grid, c, l):
    """Mean |occupancy| over integer coordinates within ``l`` of ``c``; 500 outside the map."""
    a = grid.as_array()
    vals = []
    span = int(l) + 1
    for y in range(c[1] - span, c[1] + span + 1):
        for x in range(c[0] - span, c[0] + span + 1):
            if math.hypot(x - c[0], y - c[1]) <= l:
                if 0 <= x < grid.width and 0 <= y < grid.height:
                    vals.append(abs(int(a[y, x])))
                else:
                    vals.append(500)
    return sum(vals) / len(vals)


def cell_min_corner(grid, c):
    return (c[0] * grid.res + grid.origin[0], c[1] * grid.res + grid.origin[1])


def brute_shift_costs(grid, tp, tp_prev, lam, r, l):
    """``{cell: cost}`` for every free cell the shift query can return."""
    c = (math.floor((tp[0] - grid.origin[0]) / grid.res + 1e-9),
         math.floor((tp[1] - grid.origin[1]) / grid.res + 1e-9))
    out = {}
    for cell in linear_scan(grid, c, r):
        px, py = cell_min_corner(grid, cell)
        out[cell] = brute_g(grid, cell, l) + lam * math.hypot(px - tp_prev[0], py - tp_prev[1])
    return out


def worker_oracle(grid, pose, scan, r_cells):
    """Cells a scan covers, checked one at a time.

    For every free cell within ``r_cells`` of the sensor cell: rotate its
    map point into the sensor frame, take the integer-degree orientation
    (floor, mod 360) and accept it when that angle carries a beam and the
    cell is strictly closer than the beam's range.
    """
    x, y, th = pose
    c = (math.floor((x - grid.origin[0]) / grid.res + 1e-9), math.floor((y - grid.origin[1]) / grid.res + 1e-9))
    beams = set(int(a) for a in scan.angles)
    covered = set()
    for cell in linear_scan(grid, c, r_cells):
        px, py = cell_min_corner(grid, cell)
        dx, dy = px - x, py - y
        xs = math.cos(th) * dx + math.sin(th) * dy
        ys = -math.sin(th) * dx + math.cos(th) * dy
        alpha = 0 if (xs == 0 and ys == 0) else math.floor(math.degrees(math.atan2(ys, xs))) % 360
        if alpha in beams and math.hypot(xs, ys) < scan.ranges[alpha]:
            covered.add(cell)
    return covered


def march_ray(grid, x, y, angle, max_range, step=1e-3):
    """Range to the first non-free cell by small fixed steps (approximate)."""
    a = grid.as_array()
    t = 0.0
    while t < max_range:
        cx = math.floor((x + t * math.cos(angle) - grid.origin[0]) / grid.res)
        cy = math.floor((y + t * math.sin(angle) - grid.origin[1]) / grid.res)
        if not (0 <= cx < grid.width and 0 <= cy < grid.height):
            return max_range
        if a[cy, cx] != 0:
            return t
        t += step
    return max_range


def arnold_rhs(s, A, B, C, v, idx):
    x, y, z = s[0], s[1], s[2]
    th = s[idx]
    return np.array([A * np.sin(z) + C * np.cos(y), B * np.sin(x) + C * np.cos(z),
                     C * np.sin(y) + B * np.cos(x), v * np.cos(th), v * np.sin(th)])


def rk4_reference(s0, A, B, C, v, idx, dt, n):
    """Textbook RK4 with numpy vectors."""
    s = np.array(s0, dtype=float)
    out = [s.copy()]
    for _ in range(n):
        k1 = arnold_rhs(s, A, B, C, v, idx)
        k2 = arnold_rhs(s + dt / 2 * k1, A, B, C, v, idx)
        k3 = arnold_rhs(s + dt / 2 * k2, A, B, C, v, idx)
        k4 = arnold_rhs(s + dt * k3, A, B, C, v, idx)
        s = s + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out.append(s.copy())
    return np.array(out)


def best_two_means(points):
    """Optimal 2-partition (minimum within-cluster SSE) of 2-D points.

    An optimal 2-means split is separable by a line, so it suffices to sort
    the points along every critical direction (normals to point pairs,
    nudged both ways) and try each prefix split. Returns a frozenset of two
    frozensets of point indices.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    dirs = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
    for i in range(n):
        for j in range(i + 1, n):
            d = pts[j] - pts[i]
            base = math.atan2(d[1], d[0]) + math.pi / 2
            for eps in (-1e-7, 1e-7):
                dirs.append(np.array([math.cos(base + eps), math.sin(base + eps)]))
    best, best_sse = None, math.inf
    for u in dirs:
        order = np.argsort(pts @ u, kind="stable")
        for k in range(1, n):
            a, b = pts[order[:k]], pts[order[k:]]
            sse = ((a - a.mean(axis=0)) ** 2).sum() + ((b - b.mean(axis=0)) ** 2).sum()
            if sse < best_sse - 1e-9:
                best_sse = sse
                best = (frozenset(order[:k].tolist()), frozenset(order[k:].tolist()))
    return frozenset(best)
