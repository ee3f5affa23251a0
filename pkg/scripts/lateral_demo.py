#!/usr/bin/env python3
"""Small lateral-displacement training demo on the dynamic 16-state model.

Trains a tiny MLP-[4,1,2] (with the learned velocity-filter gain) on a
reduced lateral grid for one start velocity, then rolls the result out on a
sample task and writes the trajectory CSV.

Usage:
    python scripts/lateral_demo.py [--seed N] [--out DIR]
"""

import argparse
import json
import os
import sys

from primenc.cli import main as cli_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--out", default="runs/lateral_demo")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    cfg = {
        "preset": "exp2",
        "arch": "MLP",
        "tasks": {"kind": "lateral", "y_max_m": 3.5, "y_step_m": 0.5,
                  "vx0_kmh": [30.0], "dv_kmh": [0.0]},
        "n_restarts": 2,
        "n_iter_max": 10,
        "n_candidates": 32,
        "t_max": 500,
        "master_seed": args.seed,
        "workers": args.workers,
        "out_dir": args.out,
    }
    cfg_path = os.path.join(args.out, "demo_config.json")
    with open(cfg_path, "w") as f:
        json.dump(cfg, f, indent=2)
    rc = cli_main(["train", "--config", cfg_path])
    if rc != 0:
        return rc

    task = {"vx0_kmh": 30.0, "v_goal_kmh": 30.0, "y_goal_m": 2.0,
            "check": "lateral"}
    task_path = os.path.join(args.out, "demo_task.json")
    with open(task_path, "w") as f:
        json.dump(task, f, indent=2)
    return cli_main(["rollout",
                     "--bank", os.path.join(args.out, "bank.txt"),
                     "--task", task_path,
                     "--out", os.path.join(args.out, "trajectory.csv")])


if __name__ == "__main__":
    sys.exit(main())
