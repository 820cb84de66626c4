"""Occupancy-grid map: loading, index and coordinate conversions.

Cells are addressed as ``(cx, cy)`` with ``cx`` the column and ``cy`` the row
counted upward from the bottom edge of the map. The flat data array is
row-major: ``ind = cy * W + cx``.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import yaml

FREE = 0
OCCUPIED = 100
UNKNOWN = -1


class MapFormatError(ValueError):
    """Raised when a map image or its metadata cannot be parsed."""


class CellClass(enum.Enum):
    FREE = "free"
    OCCUPIED = "occupied"
    UNKNOWN = "unknown"
    OUT_OF_BOUNDS = "out_of_bounds"


class CellCoord(NamedTuple):
    cx: int
    cy: int


class MapPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """A static 2D occupancy grid.

    ``pda`` is the flat occupancy array of length ``width * height`` holding
    -1 (unknown), 0 (free) or a positive occupancy value (occupied).
    """

    width: int
    height: int
    res: float
    origin: tuple[float, float]
    pda: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        if not self.res > 0:
            raise ValueError(f"resolution must be positive, got {self.res}")
        pda = np.asarray(self.pda, dtype=np.int16).ravel()
        if pda.size != self.width * self.height:
            raise ValueError(
                f"pda length {pda.size} does not match {self.width}x{self.height}"
            )
        if np.any((pda < 0) & (pda != UNKNOWN)) or np.any(pda > OCCUPIED):
            raise ValueError("occupancy values must be -1 or within [0, 100]")
        pda.setflags(write=False)
        object.__setattr__(self, "pda", pda)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @classmethod
    def from_array(cls, cells, res=0.05, origin=(0.0, 0.0)):
        """Build a grid from a 2D array indexed ``[cy, cx]`` (row 0 = bottom)."""
        arr = np.asarray(cells)
        if arr.ndim != 2:
            raise ValueError("expected a 2D array")
        h, w = arr.shape
        return cls(w, h, res, origin, arr.ravel())

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def as_array(self) -> np.ndarray:
        """Read-only ``[cy, cx]`` view of the occupancy data."""
        return self.pda.reshape(self.height, self.width)

    @property
    def free_mask(self) -> np.ndarray:
        return self.as_array() == FREE

    @property
    def n_free(self) -> int:
        return int(np.count_nonzero(self.pda == FREE))

    def in_bounds(self, cx, cy) -> bool:
        return 0 <= cx < self.width and 0 <= cy < self.height

    def value(self, cx, cy) -> int:
        return int(self.pda[cy * self.width + cx])

    def is_free(self, cx, cy) -> bool:
        return self.in_bounds(cx, cy) and self.pda[cy * self.width + cx] == FREE


def index_of(c, grid: OccupancyGrid) -> int:
    cx, cy = c
    if not grid.in_bounds(cx, cy):
        raise IndexError(f"cell {tuple(c)} outside {grid.width}x{grid.height} grid")
    return int(cy) * grid.width + int(cx)


def cell_of(ind, grid: OccupancyGrid) -> CellCoord:
    if not 0 <= ind < grid.width * grid.height:
        raise IndexError(f"index {ind} outside grid of {grid.width * grid.height} cells")
    cx = ind % grid.width
    return CellCoord(int(cx), int((ind - cx) // grid.width))


def cell_to_map(c, grid: OccupancyGrid) -> MapPoint:
    """Minimum-corner map-frame position of a cell."""
    return MapPoint(c[0] * grid.res + grid.origin[0], c[1] * grid.res + grid.origin[1])


# Absorbs round-off in (c*res + O - O) / res so corners map back to their own cell.
_FLOOR_EPS = 1e-9


def map_to_cell(p, grid: OccupancyGrid) -> CellCoord:
    fx = (p[0] - grid.origin[0]) / grid.res
    fy = (p[1] - grid.origin[1]) / grid.res
    return CellCoord(math.floor(fx + _FLOOR_EPS), math.floor(fy + _FLOOR_EPS))


def cells_to_map(cells: np.ndarray, grid: OccupancyGrid) -> np.ndarray:
    """Vectorized :func:`cell_to_map` for an ``(n, 2)`` integer array."""
    cells = np.asarray(cells)
    out = np.empty(cells.shape, dtype=float)
    out[..., 0] = cells[..., 0] * grid.res + grid.origin[0]
    out[..., 1] = cells[..., 1] * grid.res + grid.origin[1]
    return out


def occupancy_class(c, grid: OccupancyGrid) -> CellClass:
    cx, cy = c
    if not grid.in_bounds(cx, cy):
        return CellClass.OUT_OF_BOUNDS
    v = grid.value(cx, cy)
    if v == FREE:
        return CellClass.FREE
    if v > 0:
        return CellClass.OCCUPIED
    return CellClass.UNKNOWN


def disc_offsets(radius: float) -> np.ndarray:
    """Integer offsets ``(dx, dy)`` with ``dx**2 + dy**2 <= radius**2``, row-major order."""
    k = int(math.floor(radius))
    d = np.arange(-k, k + 1)
    dx, dy = np.meshgrid(d, d)
    keep = dx * dx + dy * dy <= radius * radius
    return np.stack([dx[keep], dy[keep]], axis=1)


# ---------------------------------------------------------------------------
# map_server-compatible IO


def _read_pgm(path) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise MapFormatError(f"cannot read map image {path}: {exc}") from exc

    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise MapFormatError(f"{path}: truncated PGM header")
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval

    if tokens[0] != b"P5":
        raise MapFormatError(f"{path}: expected binary PGM (P5), got {tokens[0]!r}")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MapFormatError(f"{path}: malformed PGM header") from exc
    if w < 1 or h < 1:
        raise MapFormatError(f"{path}: invalid dimensions {w}x{h}")
    if maxval != 255:
        raise MapFormatError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    payload = data[pos:]
    if len(payload) != w * h:
        raise MapFormatError(
            f"{path}: header says {w}x{h} = {w * h} bytes, payload has {len(payload)}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w)


def write_pgm(path, image: np.ndarray) -> None:
    """Write an 8-bit ``[row, col]`` image as binary PGM (row 0 = top)."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def load_map(image_path, metadata_path) -> OccupancyGrid:
    """Load a map_server style PGM + YAML map.

    Occupancy probability is ``(255 - gray) / 255`` (inverted when
    ``negate`` is set); probability >= ``occupied_thresh`` gives 100,
    <= ``free_thresh`` gives 0, anything else -1.
    """
    try:
        with open(metadata_path) as fh:
            meta = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise MapFormatError(f"cannot read map metadata {metadata_path}: {exc}") from exc
    if not isinstance(meta, dict):
        raise MapFormatError(f"{metadata_path}: expected a mapping")

    try:
        res = float(meta["resolution"])
        origin = [float(v) for v in meta["origin"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MapFormatError(f"{metadata_path}: missing or invalid resolution/origin") from exc
    if len(origin) not in (2, 3):
        raise MapFormatError(f"{metadata_path}: origin must be [x, y] or [x, y, yaw]")
    if len(origin) == 3 and origin[2] != 0.0:
        raise MapFormatError(f"{metadata_path}: rotated map origins are not supported")
    occ_t = float(meta.get("occupied_thresh", 0.65))
    free_t = float(meta.get("free_thresh", 0.196))
    negate = bool(int(meta.get("negate", 0)))

    if image_path is None:
        image_path = meta.get("image")
        if image_path is None:
            raise MapFormatError(f"{metadata_path}: no image given")
        image_path = os.path.join(os.path.dirname(os.path.abspath(metadata_path)), image_path)

    img = _read_pgm(image_path).astype(np.float64)
    p = img / 255.0 if negate else (255.0 - img) / 255.0
    occ = np.full(img.shape, UNKNOWN, dtype=np.int16)
    occ[p >= occ_t] = OCCUPIED
    occ[p <= free_t] = FREE
    # image row 0 is the top of the map
    return OccupancyGrid.from_array(occ[::-1], res=res, origin=(origin[0], origin[1]))


def save_map(grid: OccupancyGrid, stem) -> tuple[str, str]:
    """Write ``stem.pgm`` and ``stem.yaml`` that :func:`load_map` reads back exactly.

    Intermediate occupancy values are written as fully occupied.
    """
    arr = grid.as_array()[::-1]
    img = np.full(arr.shape, 205, dtype=np.uint8)
    img[arr == FREE] = 254
    img[arr > 0] = 0
    stem = os.fspath(stem)
    pgm, yml = stem + ".pgm", stem + ".yaml"
    write_pgm(pgm, img)
    meta = {
        "image": os.path.basename(pgm),
        "resolution": grid.res,
        "origin": [grid.origin[0], grid.origin[1], 0.0],
        "occupied_thresh": 0.65,
        "free_thresh": 0.196,
        "negate": 0,
    }
    with open(yml, "w") as fh:
        yaml.safe_dump(meta, fh, sort_keys=False)
    return pgm, yml
