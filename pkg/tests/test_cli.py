import json
import os

import pytest

from primenc import cli
from primenc.config import ConfigError, load_config_file, resolve_run
from primenc.models import DYNAMIC16, KINEMATIC
from primenc.report import parse_summary_csv, render_markdown


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=1)
    return str(path)


TINY_RUN = {
    "preset": "exp1",
    "tasks": {"kind": "exp1", "vx0_kmh": [0.0, 60.0], "dv_kmh": [0.0, 12.5]},
    "arch": "MLP",
    "n_restarts": 1, "n_iter_max": 2, "n_candidates": 4, "t_max": 120,
    "master_seed": 7, "workers": 1,
}


# -------------------------------------------------------------------- config

def test_presets_expand_to_printed_grids():
    for preset, count in (("exp1", 125), ("exp2", 585), ("exp3-arch", 585),
                          ("exp4", 14625)):
        setup = resolve_run({"preset": preset, "workers": 1})
        assert len(setup.tasks) == count, preset


def test_preset_exp4_schedules_on_velocity():
    setup = resolve_run({"preset": "exp4", "workers": 1})
    assert setup.scheduling
    assert setup.train_cfg.model_kind == DYNAMIC16
    assert setup.train_cfg.net_spec.arch == "MLP"
    assert setup.train_cfg.net_spec.layer_sizes == (4, 1, 2)
    assert setup.train_cfg.net_spec.with_vvc_param


def test_preset_exp1_defaults():
    setup = resolve_run({"preset": "exp1", "workers": 1})
    assert setup.train_cfg.model_kind == KINEMATIC
    assert setup.train_cfg.t_max == 500
    assert setup.train_cfg.n_restarts == 10
    assert not setup.train_cfg.net_spec.with_vvc_param


def test_explicit_keys_override_preset():
    setup = resolve_run({"preset": "exp1", "t_max": 77, "workers": 3})
    assert setup.train_cfg.t_max == 77
    assert setup.train_cfg.worker_count == 3


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        resolve_run({"preset": "exp1", "wat": 1})
    with pytest.raises(ConfigError, match="tolerances"):
        resolve_run({"preset": "exp1", "tolerances": {"eps_q": 1}})
    with pytest.raises(ConfigError, match="vehicle"):
        resolve_run({"preset": "exp1", "vehicle": {"mass": 1}})
    with pytest.raises(ConfigError):
        resolve_run({"preset": "nope"})


def test_vehicle_overrides_apply():
    setup = resolve_run({"preset": "exp1", "vehicle": {"vmax": 30.0},
                         "workers": 1})
    assert setup.train_cfg.params.vmax == 30.0


def test_config_syntax_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "preset": "exp1",\n "oops"\n}\n')
    with pytest.raises(ConfigError, match=r"bad\.json:4:1"):
        load_config_file(path)


def test_dynamic_vvc_flag_controls_trailing_gain():
    on = resolve_run({"preset": "exp2", "workers": 1})
    off = resolve_run({"preset": "exp2", "vvc": False, "workers": 1})
    assert on.train_cfg.net_spec.with_vvc_param
    assert not off.train_cfg.net_spec.with_vvc_param


def test_subset_override_keys_convert_to_mps():
    setup = resolve_run({"preset": "exp4",
                         "subset_overrides": {"80": {"t_max": 2000,
                                                     "n_iter_max": 10}},
                         "workers": 1})
    assert setup.subset_overrides == {80.0 / 3.6: {"t_max": 2000,
                                                   "n_iter_max": 10}}


# ----------------------------------------------------------------------- CLI

def test_cli_train_writes_artifacts(tmp_path):
    cfgp = write_json(tmp_path / "run.json", TINY_RUN)
    out = str(tmp_path / "out")
    rc = cli.main(["train", "--config", cfgp, "--out", out])
    assert rc == 0
    for name in ("config.json", "bank.txt", "records.csv", "summary.csv",
                 "report.md"):
        assert os.path.isfile(os.path.join(out, name)), name
    rows = parse_summary_csv(open(os.path.join(out, "summary.csv")).read())
    assert rows[0].n_tasks == 4
    assert rows[0].n_param == 11


def test_cli_train_is_deterministic_across_workers(tmp_path):
    outs = []
    for wc in (1, 2):
        cfgp = write_json(tmp_path / f"run{wc}.json",
                          {**TINY_RUN, "workers": wc})
        out = str(tmp_path / f"out{wc}")
        assert cli.main(["train", "--config", cfgp, "--out", out]) == 0
        outs.append(out)

    banks = [open(os.path.join(o, "bank.txt")).read() for o in outs]
    assert banks[0] == banks[1]

    def strip_wall(csv_text):
        rows = [r.split(",") for r in csv_text.splitlines()]
        return [r[:-1] for r in rows]  # wall_s is the last column

    recs = [strip_wall(open(os.path.join(o, "records.csv")).read()) for o in outs]
    assert recs[0] == recs[1]


def test_cli_malformed_config_exits_nonzero_without_outputs(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json }")
    out = str(tmp_path / "out")
    rc = cli.main(["train", "--config", str(bad), "--out", out])
    assert rc != 0
    assert not os.path.exists(out)


def test_cli_tasks_list_counts(tmp_path):
    for preset, count in (("exp1", 125), ("exp2", 585), ("exp4", 14625)):
        out = tmp_path / f"{preset}.csv"
        rc = cli.main(["tasks", "list", "--preset", preset, "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == count + 1  # header


def test_cli_tasks_list_matches_config_grid(tmp_path):
    cfgp = write_json(tmp_path / "run.json", TINY_RUN)
    out = tmp_path / "grid.csv"
    assert cli.main(["tasks", "list", "--config", cfgp, "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 5


def test_cli_report_regenerates_byte_stable(tmp_path):
    cfgp = write_json(tmp_path / "run.json", TINY_RUN)
    out = str(tmp_path / "out")
    assert cli.main(["train", "--config", cfgp, "--out", out]) == 0
    md = os.path.join(out, "report.md")
    first = open(md).read()
    assert cli.main(["report", out]) == 0
    assert open(md).read() == first
    assert cli.main(["report", out]) == 0
    assert open(md).read() == first


def test_cli_report_missing_dir(tmp_path):
    assert cli.main(["report", str(tmp_path / "nope")]) != 0


def test_cli_rollout_writes_trajectory(tmp_path):
    cfgp = write_json(tmp_path / "run.json", TINY_RUN)
    out = str(tmp_path / "out")
    assert cli.main(["train", "--config", cfgp, "--out", out]) == 0
    task = write_json(tmp_path / "task.json",
                      {"vx0_kmh": 60.0, "v_goal_kmh": 60.0, "x_goal_m": 0.0,
                       "check": "pose3"})
    csv_path = str(tmp_path / "traj.csv")
    rc = cli.main(["rollout", "--bank", os.path.join(out, "bank.txt"),
                   "--task", task, "--out", csv_path])
    assert rc == 0
    lines = open(csv_path).read().splitlines()
    assert lines[0] == "time,x,y,phi,vx,vy,a0,a1"
    assert lines[-1].startswith("# solved=")


def test_cli_rollout_mirrors_negative_lateral_goal(tmp_path):
    cfgp = write_json(tmp_path / "run.json", TINY_RUN)
    out = str(tmp_path / "out")
    assert cli.main(["train", "--config", cfgp, "--out", out]) == 0
    bank = os.path.join(out, "bank.txt")

    twin = {"vx0_kmh": 30.0, "v_goal_kmh": 30.0, "y_goal_m": 1.5,
            "a0_init": 0.1, "check": "lateral"}
    up = write_json(tmp_path / "up.json", twin)
    dn = write_json(tmp_path / "dn.json", {**twin, "y_goal_m": -1.5,
                                           "a0_init": -0.1})
    up_csv = tmp_path / "up.csv"
    dn_csv = tmp_path / "dn.csv"
    assert cli.main(["rollout", "--bank", bank, "--task", up,
                     "--out", str(up_csv)]) == 0
    assert cli.main(["rollout", "--bank", bank, "--task", dn,
                     "--out", str(dn_csv)]) == 0
    rows_up = up_csv.read_text().splitlines()
    rows_dn = dn_csv.read_text().splitlines()
    assert len(rows_up) == len(rows_dn)
    for a, b in zip(rows_up[1:-1], rows_dn[1:-1]):
        fa = [float(v) for v in a.split(",")]
        fb = [float(v) for v in b.split(",")]
        assert fa[1] == fb[1]          # x
        assert fa[2] == -fb[2]         # y mirrored
        assert fa[6] == -fb[6]         # steering mirrored


def test_cli_rollout_unsolved_task_flagged(tmp_path):
    cfgp = write_json(tmp_path / "run.json", TINY_RUN)
    out = str(tmp_path / "out")
    assert cli.main(["train", "--config", cfgp, "--out", out]) == 0
    task = write_json(tmp_path / "task.json",
                      {"vx0_kmh": 0.0, "v_goal_kmh": 120.0,
                       "x_goal_m": 5000.0, "check": "pose3"})
    csv_path = tmp_path / "traj.csv"
    rc = cli.main(["rollout", "--bank", os.path.join(out, "bank.txt"),
                   "--task", task, "--out", str(csv_path)])
    assert rc == 0
    lines = csv_path.read_text().splitlines()
    assert lines[-1].startswith("# solved=false")
    assert len(lines) == TINY_RUN["t_max"] + 3  # header + t_max+1 rows + flag


def test_render_markdown_dashes_for_undefined_gain():
    from primenc.report import SummaryRow
    md = render_markdown([SummaryRow("all", 10, 8, -100.0, 11, 0, None, 1.0)])
    assert "| -- |" in md
