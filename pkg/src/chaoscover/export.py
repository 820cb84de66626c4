"""Image, log and report writers for mission artifacts."""

from __future__ import annotations

import colorsys
import csv
import math
import re

import numpy as np

from .gridmap import OccupancyGrid, map_to_cell

COVERED = (40, 160, 60)
UNCOVERED = (255, 255, 255)
OBSTACLE = (0, 0, 0)
UNKNOWN_RGB = (128, 128, 128)
CENTROID = (220, 0, 0)


def write_ppm(path, rgb: np.ndarray) -> None:
    """Binary PPM (P6); ``rgb`` is ``[row, col, 3]`` with row 0 at the top."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    m = re.match(rb"P6\s+(\d+)\s+(\d+)\s+255\s", data)
    if m is None:
        raise ValueError(f"{path}: not an 8-bit binary PPM")
    w, h = int(m.group(1)), int(m.group(2))
    return np.frombuffer(data[m.end():m.end() + w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def _base_rgb(grid: OccupancyGrid) -> np.ndarray:
    a = grid.as_array()
    rgb = np.empty(a.shape + (3,), dtype=np.uint8)
    rgb[a == 0] = UNCOVERED
    rgb[a > 0] = OBSTACLE
    rgb[a < 0] = UNKNOWN_RGB
    return rgb


def coverage_image(grid: OccupancyGrid, covered: np.ndarray) -> np.ndarray:
    """Covered free cells green, uncovered free white, obstacles black, unknown gray."""
    rgb = _base_rgb(grid)
    cov = np.asarray(covered).reshape(grid.height, grid.width).astype(bool)
    rgb[cov & (grid.as_array() == 0)] = COVERED
    return rgb[::-1]


def tc_from_image(rgb: np.ndarray) -> float:
    """Total coverage recomputed from a :func:`coverage_image` rendering."""
    covered = np.all(rgb == COVERED, axis=-1).sum()
    uncovered = np.all(rgb == UNCOVERED, axis=-1).sum()
    return 100.0 * covered / (covered + uncovered)


def zone_palette(k: int) -> np.ndarray:
    """``k`` distinct pastel colors (golden-ratio hue walk)."""
    out = np.empty((k, 3), dtype=np.uint8)
    for j in range(k):
        h = (j * 0.618033988749895) % 1.0
        r, g, b = colorsys.hsv_to_rgb(h, 0.55, 0.92)
        out[j] = (round(r * 255), round(g * 255), round(b * 255))
    return out


def zone_image(grid: OccupancyGrid, zid: np.ndarray, centroids: np.ndarray, marker_radius=2) -> np.ndarray:
    """Free cells tinted by zone, centroids drawn as filled red discs."""
    rgb = _base_rgb(grid)
    z = np.asarray(zid).reshape(grid.height, grid.width)
    pal = zone_palette(len(centroids))
    mask = z >= 0
    rgb[mask] = pal[z[mask]]
    for cx, cy in (map_to_cell(c, grid) for c in centroids):
        for dy in range(-marker_radius, marker_radius + 1):
            for dx in range(-marker_radius, marker_radius + 1):
                if dx * dx + dy * dy <= marker_radius * marker_radius and grid.in_bounds(cx + dx, cy + dy):
                    rgb[cy + dy, cx + dx] = CENTROID
    return rgb[::-1]


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.6f}"


def write_trajectory_log(path, dispatches) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_s", "goal_x_m", "goal_y_m", "replaced", "stage", "cost", "reached"])
        for d in dispatches:
            w.writerow([_fmt(d.t), _fmt(d.goal[0]), _fmt(d.goal[1]), int(d.replaced), d.stage,
                        _fmt(float(d.cost)), int(d.reached)])


def write_metrics(path, series) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_s", "tc_percent"])
        for t, tc in series:
            w.writerow([_fmt(t), f"{tc:.9f}"])


def write_report(path, items: dict) -> None:
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k} = {v}\n")


def read_report(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                k, v = line.split("=", 1)
                out[k.strip()] = v.strip()
    return out


def mission_report_items(report, cfg) -> dict:
    return {
        "success": str(report.success).lower(),
        "ct_minutes": f"{report.ct_minutes:.6f}",
        "ct_kind": "idealized (exact path following, instantaneous rotation)",
        "tc_percent": f"{report.tc:.9f}",
        "dc_percent": f"{cfg.dc:g}",
        "hops": report.hops,
        "sets": report.sets,
        "replacements_stage1": report.replacements_stage1,
        "replacements_stage2": report.replacements_stage2,
        "nav_failures": report.nav_failures,
        "boundary_breaks": report.boundary_breaks,
        "bad_sets": report.bad_sets,
        "ticks": len(report.series),
        "zones": len(report.zone_coverage),
        "zone_coverage": ", ".join(f"{c:.4f}" for c in report.zone_coverage),
        "message": report.message or "ok",
    }
