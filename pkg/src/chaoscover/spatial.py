"""Point-region quadtree over free-cell coordinates.

Points are stored once, sorted by Morton (Z-order) code. Every node of the
tree then owns a contiguous slice of that array, so a radius query only has
to decide, node by node, whether the slice is fully inside the disc, fully
outside, or needs a per-point test at the leaves.
"""

from __future__ import annotations

from bisect import bisect_left

import numpy as np

from .gridmap import OccupancyGrid


def _spread_bits(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & np.uint64(0xFFFFFFFF)
    v = (v | (v << np.uint64(16))) & np.uint64(0x0000FFFF0000FFFF)
    v = (v | (v << np.uint64(8))) & np.uint64(0x00FF00FF00FF00FF)
    v = (v | (v << np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    v = (v | (v << np.uint64(2))) & np.uint64(0x3333333333333333)
    v = (v | (v << np.uint64(1))) & np.uint64(0x5555555555555555)
    return v


def morton_codes(cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
    """Interleave bits: x in even positions, y in odd positions."""
    return _spread_bits(cx) | (_spread_bits(cy) << np.uint64(1))


class Quadtree:
    """Static quadtree holding integer cell coordinates.

    Nodes are kept in flat lists (``x0``, ``y0``, ``size``, ``lo``, ``hi``,
    ``child``); ``child[n]`` is the index of the first of four consecutive
    children or -1 for a leaf. Node ``n`` covers cells
    ``[x0, x0 + size) x [y0, y0 + size)`` and owns points ``lo:hi``.
    """

    def __init__(self, points, width, height, capacity=8, row_stride=None):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        pts = np.asarray(points, dtype=np.int64).reshape(-1, 2)
        if pts.size and (pts.min() < 0 or pts[:, 0].max() >= width or pts[:, 1].max() >= height):
            raise ValueError("points must lie inside the root region")
        self.width = int(width)
        self.height = int(height)
        self.capacity = int(capacity)
        size = 1
        while size < max(self.width, self.height):
            size *= 2
        self.root_size = size

        codes = morton_codes(pts[:, 0], pts[:, 1])
        order = np.argsort(codes, kind="stable")
        self.codes = codes[order]
        if np.any(self.codes[1:] == self.codes[:-1]):
            raise ValueError("duplicate points")
        self.points = pts[order]
        self.points.setflags(write=False)
        stride = self.width if row_stride is None else row_stride
        self.flat = self.points[:, 1] * stride + self.points[:, 0]
        self.flat.setflags(write=False)

        self.x0: list[int] = []
        self.y0: list[int] = []
        self.size: list[int] = []
        self.lo: list[int] = []
        self.hi: list[int] = []
        self.child: list[int] = []
        self._build()

    def __len__(self):
        return len(self.points)

    @property
    def n_nodes(self) -> int:
        return len(self.x0)

    def _new_node(self, x0, y0, size, lo, hi):
        self.x0.append(x0)
        self.y0.append(y0)
        self.size.append(size)
        self.lo.append(lo)
        self.hi.append(hi)
        self.child.append(-1)
        return len(self.x0) - 1

    def _build(self):
        codes = self.codes.tolist()
        self._new_node(0, 0, self.root_size, 0, len(codes))
        pending = [0]
        while pending:
            n = pending.pop()
            lo, hi, size = self.lo[n], self.hi[n], self.size[n]
            if hi - lo <= self.capacity or size == 1:
                continue
            half = size // 2
            quarter = half * half
            x0, y0 = self.x0[n], self.y0[n]
            base = int(morton_codes(np.array([x0]), np.array([y0]))[0])
            bounds = [lo]
            for k in (1, 2, 3):
                bounds.append(bisect_left(codes, base + k * quarter, lo, hi))
            bounds.append(hi)
            first = len(self.x0)
            self.child[n] = first
            # Morton child order: (x lo, y lo), (x hi, y lo), (x lo, y hi), (x hi, y hi)
            for k, (dx, dy) in enumerate(((0, 0), (1, 0), (0, 1), (1, 1))):
                self._new_node(x0 + dx * half, y0 + dy * half, half, bounds[k], bounds[k + 1])
            pending.extend(range(first, first + 4))

    def query_indices(self, cx, cy, r) -> np.ndarray:
        """Indices into :attr:`points` of all points within Euclidean ``r`` of
        ``(cx, cy)``, ascending (i.e. in Morton order)."""
        if r < 0 or len(self.points) == 0:
            return np.empty(0, dtype=np.int64)
        r2 = r * r
        x0s, y0s, sizes, los, his, childs = self.x0, self.y0, self.size, self.lo, self.hi, self.child
        full_lo, full_hi, part_lo, part_hi = [], [], [], []
        stack = [0]
        pop, push = stack.pop, stack.append
        while stack:
            n = pop()
            lo = los[n]
            hi = his[n]
            if lo == hi:
                continue
            x0 = x0s[n]
            y0 = y0s[n]
            x1 = x0 + sizes[n] - 1
            y1 = y0 + sizes[n] - 1
            dx = x0 - cx if cx < x0 else (cx - x1 if cx > x1 else 0)
            dy = y0 - cy if cy < y0 else (cy - y1 if cy > y1 else 0)
            if dx * dx + dy * dy > r2:
                continue
            fx = cx - x0 if cx - x0 > x1 - cx else x1 - cx
            fy = cy - y0 if cy - y0 > y1 - cy else y1 - cy
            if fx * fx + fy * fy <= r2:
                full_lo.append(lo)
                full_hi.append(hi)
                continue
            c = childs[n]
            if c < 0:
                part_lo.append(lo)
                part_hi.append(hi)
            else:
                push(c)
                push(c + 1)
                push(c + 2)
                push(c + 3)

        full = _expand_ranges(full_lo, full_hi)
        part = _expand_ranges(part_lo, part_hi)
        if part.size:
            p = self.points[part]
            ddx = p[:, 0] - cx
            ddy = p[:, 1] - cy
            part = part[ddx * ddx + ddy * ddy <= r2]
        out = np.concatenate([full, part])
        out.sort()
        return out

    def query(self, center, r) -> np.ndarray:
        """``(n, 2)`` array of stored cells within ``r`` of ``center``."""
        return self.points[self.query_indices(center[0], center[1], r)]

    def node_regions(self):
        """Yield ``(x0, y0, size, points)`` for every node (used by tests)."""
        for n in range(self.n_nodes):
            yield self.x0[n], self.y0[n], self.size[n], self.points[self.lo[n]:self.hi[n]]

    def is_leaf(self, n) -> bool:
        return self.child[n] < 0


def _expand_ranges(los, his) -> np.ndarray:
    if not los:
        return np.empty(0, dtype=np.int64)
    lo = np.asarray(los, dtype=np.int64)
    hi = np.asarray(his, dtype=np.int64)
    lens = hi - lo
    total = int(lens.sum())
    offsets = np.repeat(lo - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    return offsets + np.arange(total, dtype=np.int64)


def build_quadtree(grid: OccupancyGrid, capacity: int = 8) -> Quadtree:
    """Quadtree over exactly the free cells of ``grid``."""
    cy, cx = np.nonzero(grid.free_mask)
    return Quadtree(np.stack([cx, cy], axis=1), grid.width, grid.height, capacity=capacity)


def query_radius(qt: Quadtree, center, r) -> np.ndarray:
    return qt.query(center, r)
