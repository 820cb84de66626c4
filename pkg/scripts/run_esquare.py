"""Esquare analog at dc = 97% with the coverage-time comparison parameters.

The reference coverage time (39.28 min) came from a physics simulator with a
local planner; ours follows paths exactly, so only the order of magnitude is
comparable.
"""

import argparse
import dataclasses

from chaoscover.cli import cmd_run
from chaoscover.config import load_config

REFERENCE_CT_MIN = 39.28


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="configs/esquare_table1.cfg")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--out", default="out/esquare")
    args = ap.parse_args()
    base = load_config(args.config)
    for seed in args.seeds:
        cfg = dataclasses.replace(base, seed=seed, out=f"{args.out}/seed{seed}")
        rep = cmd_run(cfg).report
        print(f"seed {seed}: success={rep.success} tc={rep.tc:.3f}% CT={rep.ct_minutes:.2f} min "
              f"(reference {REFERENCE_CT_MIN} min, ratio {rep.ct_minutes / REFERENCE_CT_MIN:.2f})")


if __name__ == "__main__":
    main()
