"""Run configuration: one JSON file is the single source of truth for a run.

A config names a preset (exp1 | exp2 | exp3-arch | exp4 | custom) whose
defaults expand to the corresponding printed task grid and hyperparameters;
any explicitly given key overrides the preset.  Unknown keys anywhere are
rejected.  Decimal literals pass through json's exact float parsing.
"""

import json
import math
from dataclasses import dataclass, field, fields

from .models import DYNAMIC16, KINEMATIC, VehicleParams
from .nets import NetSpec
from .tasks import (FEATURE_DIMS, FeatureConfig, Tolerances, gen_tasks_exp1,
                    gen_tasks_lateral)
from .tshc import TrainConfig


class ConfigError(ValueError):
    """Invalid run configuration (message carries location when known)."""


_PRESETS = {
    "exp1": {
        "model": KINEMATIC, "arch": "FSCN", "hidden_layers": [1],
        "features": "s6", "vvc": True,
        "n_restarts": 10, "n_iter_max": 20, "n_candidates": 64, "t_max": 500,
        "scheduling": False, "tasks": {"kind": "exp1"},
    },
    "exp2": {
        "model": DYNAMIC16, "arch": "FSCN", "hidden_layers": [1],
        "features": "s4", "vvc": True,
        "n_restarts": 10, "n_iter_max": 20, "n_candidates": 64, "t_max": 500,
        "scheduling": False, "tasks": {"kind": "lateral"},
    },
    "exp3-arch": {
        "model": DYNAMIC16, "arch": "FSCN", "hidden_layers": [1],
        "features": "s4", "vvc": True,
        "n_restarts": 10, "n_iter_max": 20, "n_candidates": 64, "t_max": 1000,
        "scheduling": False, "tasks": {"kind": "lateral"},
    },
    "exp4": {
        "model": DYNAMIC16, "arch": "MLP", "hidden_layers": [1],
        "features": "s4", "vvc": True,
        "n_restarts": 5, "n_iter_max": 5, "n_candidates": 64, "t_max": 1500,
        "scheduling": True,
        "tasks": {
            "kind": "lateral",
            "a0_init": [-0.5, -0.25, 0.0, 0.25, 0.5],
            "a1_init_offsets": [-0.4, -0.2, 0.0, 0.2, 0.4],
        },
    },
    "custom": {},
}

_BASE_DEFAULTS = {
    "model": KINEMATIC, "arch": "MLP", "hidden_layers": [1],
    "features": "s6", "vvc": True,
    "n_restarts": 3, "n_iter_max": 20, "n_candidates": 64, "t_max": 500,
    "master_seed": 1, "workers": 0,
    "sigma_range": [10.0, 1000.0],
    "tolerances": {}, "vehicle": {}, "scheduling": False,
    "subset_overrides": {}, "tasks": {"kind": "exp1"},
    "out_dir": "run_out",
}

_TOP_KEYS = set(_BASE_DEFAULTS) | {"preset"}
_TOL_KEYS = {"eps_d_m", "eps_phi_deg", "eps_v_kmh"}
_TASK_KEYS = {"kind", "vx0_kmh", "dv_kmh", "y_max_m", "y_step_m",
              "a0_init", "a1_init_offsets"}
_OVERRIDE_KEYS = {"t_max", "n_iter_max", "n_restarts", "n_candidates"}
_VEHICLE_KEYS = {f.name for f in fields(VehicleParams) if f.init}


@dataclass
class RunSetup:
    """A fully resolved run: engine config, task list, scheduling choices."""

    train_cfg: TrainConfig
    tasks: list
    scheduling: bool
    subset_overrides: dict = field(default_factory=dict)
    out_dir: str = "run_out"
    resolved: dict = field(default_factory=dict)


def load_config_file(path) -> dict:
    """Parse the JSON config; syntax errors keep their line numbers."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return raw


def _check_keys(section: dict, allowed, where: str):
    for k in section:
        if k not in allowed:
            raise ConfigError(f"unknown key {k!r} in {where}")


def resolve_run(raw: dict) -> RunSetup:
    """Expand preset defaults, validate strictly, build the task grid."""
    _check_keys(raw, _TOP_KEYS, "config")
    preset = raw.get("preset", "custom")
    if preset not in _PRESETS:
        raise ConfigError(
            f"unknown preset {preset!r}, expected one of {sorted(_PRESETS)}")
    cfg = dict(_BASE_DEFAULTS)
    cfg.update(_PRESETS[preset])
    for k, v in raw.items():
        if k != "preset":
            cfg[k] = v
    cfg["preset"] = preset

    _check_keys(cfg["tolerances"], _TOL_KEYS, "tolerances")
    _check_keys(cfg["vehicle"], _VEHICLE_KEYS, "vehicle")
    _check_keys(cfg["tasks"], _TASK_KEYS, "tasks")
    for key, ov in cfg["subset_overrides"].items():
        _check_keys(ov, _OVERRIDE_KEYS, f"subset_overrides[{key!r}]")

    model = cfg["model"]
    if model not in (KINEMATIC, DYNAMIC16):
        raise ConfigError(f"model must be {KINEMATIC!r} or {DYNAMIC16!r}")
    if cfg["features"] not in FEATURE_DIMS:
        raise ConfigError(f"unknown feature variant {cfg['features']!r}")
    params = VehicleParams(**cfg["vehicle"])
    tol_raw = cfg["tolerances"]
    tol = Tolerances(
        eps_d=tol_raw.get("eps_d_m", 0.25),
        eps_phi=math.radians(tol_raw.get("eps_phi_deg", 5.0)),
        eps_v=tol_raw.get("eps_v_kmh", 5.0) / 3.6,
    )
    feature_cfg = FeatureConfig(variant=cfg["features"])
    layer_sizes = (feature_cfg.n_features, *cfg["hidden_layers"], 2)
    spec = NetSpec(cfg["arch"], layer_sizes,
                   with_vvc_param=(model == DYNAMIC16 and cfg["vvc"]))
    sig = cfg["sigma_range"]
    if len(sig) != 2 or not sig[0] < sig[1]:
        raise ConfigError("sigma_range must be [lo, hi] with lo < hi")
    workers = int(cfg["workers"])
    if workers == 0:
        import os
        workers = os.cpu_count() or 1
    try:
        train_cfg = TrainConfig(
            model_kind=model, net_spec=spec, feature_cfg=feature_cfg,
            n_restarts=int(cfg["n_restarts"]), n_iter_max=int(cfg["n_iter_max"]),
            n_candidates=int(cfg["n_candidates"]), t_max=int(cfg["t_max"]),
            tol=tol, vvc_enabled=bool(cfg["vvc"]),
            sigma_lo=float(sig[0]), sigma_hi=float(sig[1]),
            master_seed=int(cfg["master_seed"]), worker_count=workers,
            params=params)
    except ValueError as e:
        raise ConfigError(str(e)) from None

    tasks = build_tasks(cfg["tasks"], params)
    overrides = {}
    for key_kmh, ov in cfg["subset_overrides"].items():
        overrides[float(key_kmh) / 3.6] = {k: int(v) for k, v in ov.items()}

    return RunSetup(train_cfg=train_cfg, tasks=tasks,
                    scheduling=bool(cfg["scheduling"]),
                    subset_overrides=overrides,
                    out_dir=str(cfg["out_dir"]), resolved=cfg)


def build_tasks(spec: dict, params: VehicleParams) -> list:
    """Expand a task-grid spec dict into the task list."""
    kind = spec.get("kind")
    try:
        if kind == "exp1":
            return gen_tasks_exp1(
                params,
                vx0_list_kmh=spec.get("vx0_kmh"),
                dv_list_kmh=spec.get("dv_kmh", (-25.0, -12.5, 0.0, 12.5, 25.0)))
        if kind == "lateral":
            return gen_tasks_lateral(
                params,
                y_max=spec.get("y_max_m", 3.5),
                y_step=spec.get("y_step_m", 0.25),
                vx0_list_kmh=spec.get("vx0_kmh"),
                dv_list_kmh=spec.get("dv_kmh", (-10.0, 0.0, 10.0)),
                a0_inits=spec.get("a0_init", (0.0,)),
                a1_init_offsets=spec.get("a1_init_offsets", (0.0,)))
    except ValueError as e:
        raise ConfigError(f"tasks: {e}") from None
    raise ConfigError(f"tasks.kind must be 'exp1' or 'lateral', got {kind!r}")
