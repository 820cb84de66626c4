"""Chaotic coverage path planning on 2D occupancy grids."""

from .chaos import DEFAULT_IC, ArnoldParams, AugmentedState, DsIndex, integrate, rk4_step
from .config import ConfigError, RunConfig, load_config, parse_config
from .cost import COST_MAX, CostedPoint, CostField, cost_g, shift
from .coverage import CoverageConfig, CoverageState, coverage_tick, parallel_worker, simulate_scan, worker
from .gridmap import OccupancyGrid, cell_to_map, load_map, map_to_cell, save_map
from .planner import Mission, MissionConfig, MissionReport, PlannerConfig, generate_set, run_mission
from .spatial import Quadtree, build_quadtree, query_radius
from .zoning import adjust_centroid, least_covered_zone, make_zones

__version__ = "0.1.0"

__all__ = [
    "COST_MAX", "DEFAULT_IC", "ArnoldParams", "AugmentedState", "ConfigError", "CostField",
    "CostedPoint", "CoverageConfig", "CoverageState", "DsIndex", "Mission", "MissionConfig",
    "MissionReport", "OccupancyGrid", "PlannerConfig", "Quadtree", "RunConfig", "adjust_centroid",
    "build_quadtree", "cell_to_map", "cost_g", "coverage_tick", "generate_set", "integrate",
    "least_covered_zone", "load_config", "load_map", "make_zones", "map_to_cell", "parallel_worker",
    "parse_config", "query_radius", "rk4_step", "run_mission", "save_map", "shift", "simulate_scan",
    "worker",
]
