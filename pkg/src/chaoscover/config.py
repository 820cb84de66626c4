"""Flat ``key = value`` run configuration."""

from __future__ import annotations

import ast
import dataclasses
import math
from dataclasses import dataclass, fields

from .chaos import ArnoldParams, DsIndex
from .coverage import FULL_CIRCLE, CoverageConfig
from .planner import MissionConfig, PlannerConfig


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    map_image: str | None = None
    map_yaml: str | None = None
    # builtin synthetic map used when no map files are given
    synthetic_map: str = "empty_room"
    map_size: float = 20.0

    A: float = 0.5
    B: float = 0.25
    C: float = 0.25
    v: float = 0.22
    dt: float = 2.75
    ic: tuple = (0.0, 1.0, 0.0)
    ds_primary: int = 0

    dc: float = 90.0
    sr: float = 3.5
    fov: tuple = FULL_CIRCLE
    zones: int = 20
    n_iter: int = 20
    ns: int = 20
    th1: float = 50.0
    th2: float = 25.0
    r: float = 19.0
    l: float = 6.0
    bad_run_limit: int = 3

    seed: int = 0
    goal_threshold: float = 0.2
    scan_period: float = 0.2
    robot_radius: float = 0.2
    start: tuple | None = None
    partitions: int = 1
    max_sim_minutes: float = 600.0
    quadtree_capacity: int = 8

    # runway benchmark
    runway_length: float = 60.0
    runway_width: float = 4.0
    runway_accel: float = 2.5
    mark_all: bool = True

    out: str = "out"

    def validate(self) -> None:
        errors = []

        def need(cond, msg):
            if not cond:
                errors.append(msg)

        need(self.dt > 0, f"dt: must be > 0 (got {self.dt})")
        need(self.v > 0, f"v: must be > 0 (got {self.v})")
        need(len(self.ic) == 3, f"ic: needs 3 values (got {self.ic})")
        need(self.ds_primary in (0, 1, 2), f"ds_primary: must be 0, 1 or 2 (got {self.ds_primary})")
        need(0 <= self.dc <= 100, f"dc: must be within [0, 100] (got {self.dc})")
        need(self.sr > 0, f"sr: must be > 0 (got {self.sr})")
        need(len(self.fov) == 2 and self.fov[0] <= self.fov[1], f"fov: needs (min, max) with min <= max (got {self.fov})")
        need(self.zones >= 1, f"zones: must be >= 1 (got {self.zones})")
        need(self.ns >= 1, f"ns: must be >= 1 (got {self.ns})")
        need(self.n_iter >= self.ns, f"n_iter: must be >= ns (got {self.n_iter} < {self.ns})")
        need(0 < self.th2 < self.th1, f"th1/th2: need 0 < th2 < th1 (got th1={self.th1}, th2={self.th2})")
        need(self.r >= 1, f"r: must be >= 1 (got {self.r})")
        need(self.l >= 1, f"l: must be >= 1 (got {self.l})")
        need(self.bad_run_limit >= 1, f"bad_run_limit: must be >= 1 (got {self.bad_run_limit})")
        need(self.goal_threshold >= 0, f"goal_threshold: must be >= 0 (got {self.goal_threshold})")
        need(self.scan_period > 0, f"scan_period: must be > 0 (got {self.scan_period})")
        need(self.robot_radius >= 0, f"robot_radius: must be >= 0 (got {self.robot_radius})")
        need(self.partitions >= 1, f"partitions: must be >= 1 (got {self.partitions})")
        need(self.start is None or len(self.start) == 2, f"start: needs (x, y) (got {self.start})")
        need(self.map_image is None or self.map_yaml is not None, "map_image: requires map_yaml")
        need(self.synthetic_map in SYNTHETIC_MAPS, f"synthetic_map: one of {sorted(SYNTHETIC_MAPS)} (got {self.synthetic_map!r})")
        for f in ("A", "B", "C", "dt", "v", "sr", "dc", "th1", "th2", "r", "l"):
            need(math.isfinite(getattr(self, f)), f"{f}: must be finite")
        if errors:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))

    def mission_config(self) -> MissionConfig:
        self.validate()
        return MissionConfig(
            planner=PlannerConfig(self.n_iter, self.ns, self.th1, self.th2, self.r, self.l, self.dc,
                                  DsIndex(self.ds_primary), self.bad_run_limit),
            arnold=ArnoldParams(self.A, self.B, self.C, self.v, self.dt),
            coverage=CoverageConfig(self.sr, tuple(self.fov), self.dc, self.partitions),
            ic=tuple(self.ic),
            zones=self.zones,
            seed=self.seed,
            goal_threshold=self.goal_threshold,
            scan_period=self.scan_period,
            robot_radius=self.robot_radius,
            start=None if self.start is None else tuple(self.start),
            max_sim_minutes=self.max_sim_minutes,
            quadtree_capacity=self.quadtree_capacity,
        )

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            lines.append(f"{f.name} = {format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"


SYNTHETIC_MAPS = {"empty_room", "esquare", "bungalow", "runway"}


def format_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ", ".join(format_value(x) for x in v)
    return str(v)


def _parse_scalar(text: str):
    low = text.lower()
    if low in ("none", "null", ""):
        return None
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _coerce(name, raw: str, ftype):
    if ftype == "str":
        return None if raw.strip().lower() in ("none", "null", "") else raw.strip()
    value = _parse_scalar(raw.strip())
    if ftype.startswith("tuple") and "," in raw and not isinstance(value, tuple):
        value = tuple(_parse_scalar(p.strip()) for p in raw.strip("()[] ").split(","))
    try:
        if value is None:
            return None
        if ftype in ("float",):
            return float(value)
        if ftype in ("int",):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if ftype in ("bool",):
            if not isinstance(value, bool):
                raise ValueError
            return value
        if ftype.startswith("tuple"):
            if not isinstance(value, (tuple, list)):
                value = (value,)
            return tuple(float(x) for x in value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {raw.strip()!r} as {ftype}") from None


def parse_config(text: str, base: RunConfig | None = None, source="<config>") -> RunConfig:
    cfg = dataclasses.replace(base) if base is not None else RunConfig()
    types = {f.name: str(f.type).replace(" | None", "") for f in fields(RunConfig)}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        setattr(cfg, key, _coerce(key, raw, types[key]))
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read(), source=str(path))
