"""Training-task grids, feature vectors, goal tests and control mirroring.

A task is one motion primitive: start at the origin heading straight at
velocity vx0 with given initial controls, reach a goal.  Two goal tests
exist: "pose3" checks planar distance, heading and velocity (longitudinal
control grids), "lateral" checks only lateral offset and velocity (lateral
displacement grids, where x and heading goals are dismissed).

All task fields are stored in SI units; the generator arguments use km/h
where the printed grids do.  Grids are plain nested loops in a fixed
documented order, so coordinator and workers regenerate identical lists.

Left/right symmetry: a task with y_goal < 0 is handled at deployment by
mirroring the task (flip y_goal and the initial steering) and negating the
steering output of the controller.
"""

import math
from dataclasses import dataclass, replace

from .models import VehicleParams, wrap_pi

CHECK_POSE3 = "pose3"
CHECK_LATERAL = "lateral"

# Effective accelerations used to place longitudinal goals: derived from the
# emulated 0-100 km/h in 7.4 s and 100-0 km/h in 3.8 s.
ACCEL_FWD = 100.0 / (3.6 * 7.4)
ACCEL_BRK = -100.0 / (3.6 * 3.8)

FEATURE_DIMS = {"s4": 4, "s5": 5, "s5x": 5, "s6": 6, "s7": 7}


@dataclass(frozen=True)
class Task:
    """One motion primitive (SI units; initial pose is always the origin)."""

    vx0: float
    v_goal: float
    x_goal: float
    y_goal: float
    phi_goal: float
    a0_init: float
    a1_init: float
    check_kind: str


@dataclass(frozen=True)
class FeatureConfig:
    """Feature-vector variant plus the fixed normalization constants."""

    variant: str = "s6"
    dx_n: float = 50.0
    dy_n: float = 3.5
    dphi_n: float = math.pi / 2.0
    vx_n: float = 120.0 / 3.6

    def __post_init__(self):
        if self.variant not in FEATURE_DIMS:
            raise ValueError(f"unknown feature variant {self.variant!r}")

    @property
    def n_features(self) -> int:
        return FEATURE_DIMS[self.variant]


@dataclass(frozen=True)
class Tolerances:
    """Goal-reached tolerances: distance [m], heading [rad], velocity [m/s]."""

    eps_d: float = 0.25
    eps_phi: float = math.radians(5.0)
    eps_v: float = 5.0 / 3.6


def gen_tasks_exp1(p: VehicleParams,
                   vx0_list_kmh=None,
                   dv_list_kmh=(-25.0, -12.5, 0.0, 12.5, 25.0)) -> list[Task]:
    """Longitudinal grid: start velocities x goal-velocity offsets.

    Goal velocities are capped into [0, 120] km/h.  The x goal is placed
    where a ramp at 80% of the effective (de)acceleration reaches the goal
    velocity, with the distance integrated at 60% of it, which keeps every
    task reachable well inside the step budget.  y and heading goals are
    zero; the pose3 check applies.
    """
    if vx0_list_kmh is None:
        vx0_list_kmh = [5.0 * i for i in range(25)]
    if not vx0_list_kmh or not dv_list_kmh:
        raise ValueError("empty task grid")
    a_thres = p.a_v_thres
    tasks = []
    for vk in vx0_list_kmh:
        for dvk in dv_list_kmh:
            vgk = min(120.0, max(0.0, vk + dvk))
            vx0 = vk / 3.6
            vg = vgk / 3.6
            a = ACCEL_FWD if vg >= vx0 else ACCEL_BRK
            t_task = (vg - vx0) / (0.8 * a)
            x_goal = vx0 * t_task + 0.5 * 0.6 * a * t_task * t_task
            tasks.append(Task(vx0, vg, x_goal, 0.0, 0.0, 0.0, a_thres,
                              CHECK_POSE3))
    return tasks


def gen_tasks_lateral(p: VehicleParams,
                      y_max: float = 3.5,
                      y_step: float = 0.25,
                      vx0_list_kmh=None,
                      dv_list_kmh=(-10.0, 0.0, 10.0),
                      a0_inits=(0.0,),
                      a1_init_offsets=(0.0,)) -> list[Task]:
    """Lateral grid: y goals in [0, y_max], start velocities, velocity
    offsets (uncapped), initial steering values and initial longitudinal
    controls relative to the zero-torque point.  Lateral check; x and
    heading goals are unused."""
    if vx0_list_kmh is None:
        vx0_list_kmh = [10.0 * i for i in range(13)]
    n_y = round(y_max / y_step)
    if abs(n_y * y_step - y_max) > 1e-9 or n_y < 0:
        raise ValueError(f"y_step {y_step} does not divide y_max {y_max}")
    y_goals = [i * y_step for i in range(n_y + 1)]
    if not (vx0_list_kmh and dv_list_kmh and a0_inits and a1_init_offsets):
        raise ValueError("empty task grid")
    a_thres = p.a_v_thres
    tasks = []
    for vk in vx0_list_kmh:
        vx0 = vk / 3.6
        for yg in y_goals:
            for dvk in dv_list_kmh:
                vg = (vk + dvk) / 3.6
                for a0 in a0_inits:
                    for off in a1_init_offsets:
                        tasks.append(Task(vx0, vg, 0.0, yg, 0.0,
                                          a0, a_thres + off, CHECK_LATERAL))
    return tasks


def partition_by_velocity(tasks) -> dict[float, list[Task]]:
    """Split a task list into per-vx0 subsets, keys ascending."""
    groups: dict[float, list[Task]] = {}
    for t in tasks:
        groups.setdefault(t.vx0, []).append(t)
    return dict(sorted(groups.items()))


def compile_features(task: Task, cfg: FeatureConfig):
    """Per-task feature builder (x, y, phi, vx, a0_prev, a1_prev) -> list.

    s5: goal-relative pose plus current and goal velocity.
    s6/s7: s5 plus previous steering / plus both previous controls.
    s4: lateral offset, velocities and previous steering only.
    s5x: s4 plus the previous longitudinal control.
    """
    variant = cfg.variant
    dy_n = cfg.dy_n
    vx_n = cfg.vx_n
    yg = task.y_goal
    fvg = task.v_goal / vx_n
    if variant == "s4":
        return lambda x, y, phi, vx, a0p, a1p: \
            [(yg - y) / dy_n, vx / vx_n, fvg, a0p]
    if variant == "s5x":
        return lambda x, y, phi, vx, a0p, a1p: \
            [(yg - y) / dy_n, vx / vx_n, fvg, a0p, a1p]
    dx_n = cfg.dx_n
    dphi_n = cfg.dphi_n
    xg = task.x_goal
    pg = task.phi_goal
    if variant == "s5":
        return lambda x, y, phi, vx, a0p, a1p: \
            [(xg - x) / dx_n, (yg - y) / dy_n, wrap_pi(pg - phi) / dphi_n,
             vx / vx_n, fvg]
    if variant == "s6":
        return lambda x, y, phi, vx, a0p, a1p: \
            [(xg - x) / dx_n, (yg - y) / dy_n, wrap_pi(pg - phi) / dphi_n,
             vx / vx_n, fvg, a0p]
    return lambda x, y, phi, vx, a0p, a1p: \
        [(xg - x) / dx_n, (yg - y) / dy_n, wrap_pi(pg - phi) / dphi_n,
         vx / vx_n, fvg, a0p, a1p]


def features(x, y, phi, vx, a0_prev, a1_prev, task: Task,
             cfg: FeatureConfig) -> list[float]:
    """Feature vector relating the current state to the task goal."""
    return compile_features(task, cfg)(x, y, phi, vx, a0_prev, a1_prev)


def compile_goal(task: Task, tol: Tolerances):
    """Per-task goal test (x, y, phi, vx) -> bool."""
    eps_v = tol.eps_v
    eps_d = tol.eps_d
    vg = task.v_goal
    yg = task.y_goal
    if task.check_kind == CHECK_LATERAL:
        def reached(x, y, phi, vx):
            return abs(vx - vg) <= eps_v and abs(y - yg) <= eps_d
        return reached
    eps_d2 = eps_d * eps_d
    eps_phi = tol.eps_phi
    xg = task.x_goal
    pg = task.phi_goal

    def reached(x, y, phi, vx):
        if abs(vx - vg) > eps_v:
            return False
        dx = x - xg
        dy = y - yg
        return (dx * dx + dy * dy <= eps_d2
                and abs(wrap_pi(phi - pg)) <= eps_phi)

    return reached


def goal_reached(x, y, phi, vx, task: Task, tol: Tolerances) -> bool:
    """Goal test on the current state (velocity checked for both kinds)."""
    return compile_goal(task, tol)(x, y, phi, vx)


def mirror_controls(a0: float) -> float:
    """Steering sign flip; with mirror_task this covers y_goal < 0."""
    return -a0


def mirror_task(task: Task) -> Task:
    """Reflect a task about the x axis (y goal and initial steering flip)."""
    return replace(task, y_goal=-task.y_goal, a0_init=-task.a0_init)
