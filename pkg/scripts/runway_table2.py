"""Runway benchmark: distance traveled between coverage updates.

Reproduces the rows of the computational-speed table with the simulator's
fixed update cadence; worker wall times are printed for reference.
"""

import argparse
import dataclasses

from chaoscover.cli import cmd_runway
from chaoscover.config import load_config

# (threads, v m/s, SR m, published average / max / min in m)
ROWS = [
    (1, 5.0, 5.0, (2.29, 3.16, 1.84)),
    (1, 5.0, 7.5, (17.76, 20.45, 15.45)),
    (20, 5.0, 7.5, (13.18, 20.99, 1.83)),
    (1, 3.0, 7.5, (6.08, 12.00, 2.15)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/runway.cfg")
    args = ap.parse_args()
    base = load_config(args.config)
    print(f"{'threads':>7} {'v':>4} {'SR':>4} {'avg':>6} {'max':>6} {'min':>6} {'gap':>5} "
          f"{'worker ms':>9}   published avg/max/min")
    for threads, v, sr, pub in ROWS:
        stats = cmd_runway(dataclasses.replace(base, partitions=threads, v=v, sr=sr))
        print(f"{threads:>7} {v:>4g} {sr:>4g} {stats.average:>6.3f} {stats.maximum:>6.3f} {stats.minimum:>6.3f} "
              f"{str(stats.gap):>5} {1e3 * stats.worker_seconds.mean():>9.2f}   {pub[0]}/{pub[1]}/{pub[2]}")


if __name__ == "__main__":
    main()
