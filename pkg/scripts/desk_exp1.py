#!/usr/bin/env python3
"""Desk-scale longitudinal run: reduced start-velocity grid, kinematic model.

Trains an MLP-[6,1,2] on 25 longitudinal tasks with the velocity-constraint
filter on, then prints the per-restart progress and writes the run artifacts
(bank, records, summary, report) to an output directory.

Usage:
    python scripts/desk_exp1.py [--seed N] [--workers N] [--out DIR]
"""

import argparse
import json
import sys

from primenc.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--out", default="runs/desk_exp1")
    args = ap.parse_args()

    cfg = {
        "preset": "exp1",
        "arch": "MLP",
        "tasks": {"kind": "exp1", "vx0_kmh": [0.0, 30.0, 60.0, 90.0, 120.0]},
        "n_restarts": 3,
        "n_iter_max": 20,
        "n_candidates": 64,
        "t_max": 500,
        "master_seed": args.seed,
        "workers": args.workers,
        "out_dir": args.out,
    }
    cfg_path = f"{args.out}.json"
    import os
    os.makedirs(os.path.dirname(cfg_path) or ".", exist_ok=True)
    with open(cfg_path, "w") as f:
        json.dump(cfg, f, indent=2)
    return cli_main(["train", "--config", cfg_path])


if __name__ == "__main__":
    sys.exit(main())
