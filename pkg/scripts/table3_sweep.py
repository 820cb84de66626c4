"""Parameter-influence sweep: coverage time versus n_iter, ns and zone count.

Runs the Bungalow and Esquare cases at dc = 90% and prints our idealized
coverage time next to the published one. Cases with n_iter = 1000 take
minutes each.
"""

import argparse

from chaoscover.cli import cmd_run
from chaoscover.config import RunConfig

# case: (map, n_iter, ns, zones, published CT in minutes)
CASES = {
    1: ("bungalow", 1000, 20, 15, 38.12),
    2: ("bungalow", 10, 10, 15, 9.01),
    3: ("bungalow", 1000, 20, 50, 65.72),
    4: ("bungalow", 10, 10, 50, 13.50),
    5: ("bungalow", 10, 10, 25, 12.06),
    10: ("esquare", 20, 20, 21, 24.88),
    11: ("esquare", 1000, 20, 21, 57.57),
    12: ("esquare", 20, 20, 45, 24.47),
    13: ("esquare", 1000, 20, 45, 61.44),
}

def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", type=int, nargs="+", default=[2, 4, 5, 10, 12])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/table3")
    args = ap.parse_args()
    print(f"{'case':>4} {'map':>9} {'n_iter':>6} {'ns':>3} {'zones':>5} {'tc %':>7} {'CT min':>7} {'published':>9}")
    for case in args.cases:
        name, n_iter, ns, zones, published = CASES[case]
        cfg = RunConfig(synthetic_map=name, map_size=32.0, n_iter=n_iter, ns=ns, zones=zones, dc=90.0,
                        seed=args.seed, out=f"{args.out}/case{case}")
        rep = cmd_run(cfg).report
        print(f"{case:>4} {name:>9} {n_iter:>6} {ns:>3} {zones:>5} {rep.tc:>7.2f} {rep.ct_minutes:>7.2f} "
              f"{published:>9.2f}")

if __name__ == "__main__":
    main()
