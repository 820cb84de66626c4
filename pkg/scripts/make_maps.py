"""Write the synthetic maps as PGM + YAML pairs (loadable with map_yaml = ...)."""

import argparse
import os

from chaoscover import maps
from chaoscover.gridmap import save_map


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="maps", help="output directory")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    grids = {
        "empty_room_20m": maps.empty_room(20.0),
        "esquare_32m": maps.esquare(32.0),
        "bungalow": maps.bungalow(),
        "runway_60m": maps.runway(60.0, 4.0),
    }
    for name, grid in grids.items():
        pgm, yml = save_map(grid, os.path.join(args.out, name))
        print(f"{name}: {grid.width}x{grid.height} cells, {grid.n_free} free -> {yml}")


if __name__ == "__main__":
    main()
