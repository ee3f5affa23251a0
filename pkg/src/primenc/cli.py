"""Operator surface: train runs, bank rollouts, task-grid audits, reports.

Commands:
    primenc train  --config RUN.json | --preset NAME  [--seed N] [--workers N] [--out DIR]
    primenc rollout --bank BANK --task TASK.json --out CSV [--config RUN.json]
    primenc tasks list --config RUN.json | --preset NAME  --out CSV
    primenc report RUN_DIR

The config file is the single source of truth; --seed/--workers/--out are
recorded into the resolved config that gets written next to the run
artifacts, so every run directory is self-describing.
"""

import argparse
import json
import math
import os
import sys

from . import report as rpt
from .config import ConfigError, RunSetup, load_config_file, resolve_run
from .models import VehicleParams
from .tasks import CHECK_LATERAL, CHECK_POSE3, Task, mirror_task
from .tshc import BankEntry, bank_lookup, load_bank, rollout, save_bank, \
    train, train_scheduled


def _setup_from_args(args) -> RunSetup:
    if getattr(args, "config", None):
        raw = load_config_file(args.config)
    elif getattr(args, "preset", None):
        raw = {"preset": args.preset}
    else:
        raise ConfigError("either --config or --preset is required")
    if getattr(args, "seed", None) is not None:
        raw["master_seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        raw["workers"] = args.workers
    if getattr(args, "out", None):
        raw["out_dir"] = args.out
    return resolve_run(raw)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def cmd_train(args) -> int:
    setup = _setup_from_args(args)
    out_dir = setup.out_dir
    os.makedirs(out_dir, exist_ok=True)
    _write(os.path.join(out_dir, "config.json"),
           json.dumps(setup.resolved, indent=2, sort_keys=True) + "\n")

    if setup.scheduling:
        bank, reports = train_scheduled(setup.tasks, setup.train_cfg,
                                        setup.subset_overrides)
        labeled = [(f"{key * 3.6:g}", reports[key]) for key in sorted(reports)]
    else:
        theta, report = train(setup.tasks, setup.train_cfg)
        bank = [BankEntry(0.0, setup.train_cfg.net_spec, tuple(theta))]
        labeled = [("all", report)]

    save_bank(os.path.join(out_dir, "bank.txt"), bank)
    rec_items = [(label, r) for label, rep in labeled for r in rep.records]
    _write(os.path.join(out_dir, "records.csv"), rpt.records_csv(rec_items))
    summaries = [rpt.summary_from_report(label, rep) for label, rep in labeled]
    _write(os.path.join(out_dir, "summary.csv"), rpt.summary_csv(summaries))
    _render_report(out_dir)
    best = max(s.n_solved for s in summaries)
    total = sum(s.n_tasks for s in summaries)
    solved = sum(s.n_solved for s in summaries)
    print(f"run complete: {solved}/{total} tasks solved; artifacts in {out_dir}")
    return 0


def _render_report(run_dir) -> None:
    with open(os.path.join(run_dir, "summary.csv"), encoding="utf-8") as f:
        rows = rpt.parse_summary_csv(f.read())
    _write(os.path.join(run_dir, "report.md"), rpt.render_markdown(rows))


def cmd_report(args) -> int:
    run_dir = args.run_dir
    records = os.path.join(run_dir, "records.csv")
    summary = os.path.join(run_dir, "summary.csv")
    if not (os.path.isfile(records) and os.path.isfile(summary)):
        print(f"error: {run_dir} is not a completed run directory",
              file=sys.stderr)
        return 2
    _render_report(run_dir)
    print(os.path.join(run_dir, "report.md"))
    return 0


def _load_task_json(path, params: VehicleParams) -> Task:
    with open(path, encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    allowed = {"vx0_kmh", "v_goal_kmh", "x_goal_m", "y_goal_m",
               "phi_goal_deg", "a0_init", "a1_init", "check"}
    for k in raw:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r} in task file")
    try:
        vx0 = float(raw["vx0_kmh"]) / 3.6
        v_goal = float(raw["v_goal_kmh"]) / 3.6
    except KeyError as e:
        raise ConfigError(f"task file missing key {e.args[0]!r}") from None
    a1_init = raw.get("a1_init")
    check = raw.get("check", CHECK_LATERAL)
    if check not in (CHECK_LATERAL, CHECK_POSE3):
        raise ConfigError(f"task check must be 'lateral' or 'pose3', got {check!r}")
    return Task(
        vx0=vx0, v_goal=v_goal,
        x_goal=float(raw.get("x_goal_m", 0.0)),
        y_goal=float(raw.get("y_goal_m", 0.0)),
        phi_goal=math.radians(float(raw.get("phi_goal_deg", 0.0))),
        a0_init=float(raw.get("a0_init", 0.0)),
        a1_init=params.a_v_thres if a1_init is None else float(a1_init),
        check_kind=check)


def cmd_rollout(args) -> int:
    config_path = args.config
    if config_path is None:
        sibling = os.path.join(os.path.dirname(os.path.abspath(args.bank)),
                               "config.json")
        if not os.path.isfile(sibling):
            raise ConfigError(
                "no --config given and no config.json next to the bank")
        config_path = sibling
    setup = resolve_run(load_config_file(config_path))
    cfg = setup.train_cfg
    bank = load_bank(args.bank)
    task = _load_task_json(args.task, cfg.params)

    mirrored = task.y_goal < 0.0
    run_task = mirror_task(task) if mirrored else task
    entry = bank_lookup(bank, run_task.vx0)
    if entry.spec != cfg.net_spec:
        raise ConfigError(
            f"bank nets {entry.spec} do not match the run config {cfg.net_spec}")
    result = rollout(list(entry.theta), run_task, cfg, record_trajectory=True)
    rows = result.trajectory
    if mirrored:
        rows = [(t, x, -y, -phi, vx, -vy, -a0, a1)
                for (t, x, y, phi, vx, vy, a0, a1) in rows]
    _write(args.out, rpt.trajectory_csv(rows, result.solved, result.pathlen))
    print(f"{args.out}: {result.steps} steps, solved={result.solved}")
    return 0


def cmd_tasks_list(args) -> int:
    setup = _setup_from_args(args)
    _write(args.out, rpt.tasks_csv(setup.tasks))
    print(f"{args.out}: {len(setup.tasks)} tasks")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="primenc",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run a training configuration")
    p.add_argument("--config", help="run configuration JSON")
    p.add_argument("--preset", help="named preset instead of a config file")
    p.add_argument("--seed", type=int, help="override master seed")
    p.add_argument("--workers", type=int, help="override worker count")
    p.add_argument("--out", help="override output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rollout", help="roll a trained bank out on one task")
    p.add_argument("--bank", required=True, help="bank.txt from a run")
    p.add_argument("--task", required=True, help="task JSON file")
    p.add_argument("--out", required=True, help="trajectory CSV to write")
    p.add_argument("--config", help="run config (default: next to the bank)")
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("tasks", help="task-grid utilities")
    tsub = p.add_subparsers(dest="tasks_command", required=True)
    pl = tsub.add_parser("list", help="dump the expanded grid as CSV")
    pl.add_argument("--config", help="run configuration JSON")
    pl.add_argument("--preset", help="named preset instead of a config file")
    pl.add_argument("--out", required=True, help="CSV path to write")
    pl.set_defaults(func=cmd_tasks_list)

    p = sub.add_parser("report", help="regenerate report.md from run CSVs")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
