"""Training engine: deterministic parallel hill climbing over rollout scores.

One candidate evaluation rolls a parameter vector out against every task in
the set and returns a cumulative score: (tasks solved, negative accumulated
pathlength).  Scores order lexicographically, so once every task is solved
further accepted candidates can only shorten the driven paths (the
refinement phase falls out of the acceptance rule).

Per restart the search departs from a small Gaussian init; per iteration
one shared perturbation scale sigma ~ U(sigma_lo, sigma_hi) is drawn on
the coordinator and n candidates theta + sigma * xi_i are scored, with
each standard-normal direction xi_i reconstructed from a derived scalar
seed.  Workers receive (theta, sigma, seed) by value and return only the
score; the coordinator rebuilds the winning candidate from its seed, so
results are bitwise identical for any worker count.  The first iteration
of a restart always adopts its best candidate (the unperturbed init is a
perturbation base, not a scored incumbent); afterwards only strict
lexicographic improvements replace the incumbent.
"""

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

from . import models, nets
from .models import (DYNAMIC16, KINEMATIC, DivergenceError, VehicleParams,
                     dyn_initial_state, encode_velocity)
from .rng import ParkMillerRng, derive_seed
from .tasks import (FeatureConfig, Task, Tolerances, compile_features,
                    compile_goal, partition_by_velocity)
from .vvc import apply_vvc, make_context

# Stream tags for seed derivation.
_STREAM_INIT = 101
_STREAM_SIGMA = 102
_STREAM_CAND = 103
_STREAM_SUBSET = 104


class Score(NamedTuple):
    n_solved: int
    p_star: float


def score_better(a: Score, b: Score) -> bool:
    """Strict lexicographic improvement: more tasks, then shorter paths."""
    if a.n_solved != b.n_solved:
        return a.n_solved > b.n_solved
    return a.p_star > b.p_star


@dataclass
class TrainConfig:
    """Everything one training run depends on (all of it is hashed into the
    run's behavior; wall-clock fields in reports are the only exception)."""

    model_kind: str
    net_spec: nets.NetSpec
    feature_cfg: FeatureConfig
    n_restarts: int = 3
    n_iter_max: int = 20
    n_candidates: int = 64
    t_max: int = 500
    tol: Tolerances = field(default_factory=Tolerances)
    vvc_enabled: bool = True
    sigma_lo: float = 10.0
    sigma_hi: float = 1000.0
    master_seed: int = 1
    worker_count: int = 1
    params: VehicleParams = field(default_factory=VehicleParams)

    def __post_init__(self):
        if min(self.n_restarts, self.n_iter_max, self.n_candidates,
               self.t_max, self.worker_count) < 1:
            raise ValueError("all counts must be >= 1")
        if self.model_kind not in (KINEMATIC, DYNAMIC16):
            raise ValueError(f"unknown model kind {self.model_kind!r}")
        if self.net_spec.n_inputs != self.feature_cfg.n_features:
            raise ValueError(
                f"net expects {self.net_spec.n_inputs} inputs, feature variant "
                f"{self.feature_cfg.variant!r} produces {self.feature_cfg.n_features}")


@dataclass(frozen=True)
class IterRecord:
    restart: int
    iteration: int
    sigma: float
    cand_index: int
    cand_seed: int
    accepted: bool
    n_solved: int
    p_star: float
    wall_s: float


@dataclass
class TrainReport:
    n_tasks: int
    n_param: int
    records: list[IterRecord] = field(default_factory=list)
    best_n_solved: int = 0
    best_p_star: float = 0.0
    best_restart: int = 0
    n_rest_star: int = 0
    p_star_first_solve: Optional[float] = None
    dp_first_pct: Optional[float] = None
    wall_s: float = 0.0


class RolloutResult(NamedTuple):
    solved: bool
    pathlen: float
    steps: int
    trajectory: Optional[list]


class BankEntry(NamedTuple):
    key: float
    spec: nets.NetSpec
    theta: tuple


def rollout(theta, task: Task, cfg: TrainConfig,
            record_trajectory: bool = False,
            policy: Optional[Callable] = None) -> RolloutResult:
    """Simulate one task under a controller for at most t_max steps.

    Control pipeline per step: features -> network -> velocity-constraint
    filter on the longitudinal channel -> actuator rate/absolute limits ->
    model step.  Stops at the first step whose state passes the goal test;
    a diverged candidate simply counts as unsolved.  `policy` substitutes
    the network forward pass (used by scripted-controller oracles);
    trajectory rows are (t, x, y, phi, vx, vy, a0, a1).
    """
    p = cfg.params
    spec = cfg.net_spec
    fwd = nets.compile_forward(spec, theta) if policy is None else policy
    theta_vvc = nets.theta_vvc_of(spec, theta)
    ctx = make_context(task.v_goal, p) if cfg.vvc_enabled else None
    feat = compile_features(task, cfg.feature_cfg)
    reached = compile_goal(task, cfg.tol)
    model_kind = cfg.model_kind
    dynamic = model_kind == DYNAMIC16
    hypot = math.hypot
    limits = models.apply_actuator_limits
    step = models.step_dynamic16 if dynamic else models.step_kinematic
    vvc_filter = apply_vvc
    vmin = p.vmin
    half_span = 0.5 * (p.vmax - p.vmin)

    if dynamic:
        state = dyn_initial_state(task.vx0, p)
        a1p = task.a1_init
    else:
        state = models.KinState3(0.0, 0.0, 0.0)
        # The longitudinal channel is a velocity command here, so its rate
        # limits must anchor at the actual initial velocity.
        a1p = encode_velocity(task.vx0, p)
    a0p = task.a0_init
    x = 0.0
    y = 0.0
    phi = 0.0
    vx = task.vx0
    vy = 0.0
    traj = [(0.0, x, y, phi, vx, vy, a0p, a1p)] if record_trajectory else None

    if reached(x, y, phi, vx):
        return RolloutResult(True, 0.0, 0, traj)

    pathlen = 0.0
    for k in range(1, cfg.t_max + 1):
        a_raw = fwd(feat(x, y, phi, vx, a0p, a1p))
        a1r = a_raw[1]
        if ctx is not None:
            a1r = vvc_filter(a1r, vx, ctx, theta_vvc, model_kind)
        try:
            a0p, a1p = limits(a_raw[0], a1r, a0p, a1p, p, model_kind)
            new = step(state, a0p, a1p, p)
        except DivergenceError:
            return RolloutResult(False, pathlen, k, traj)
        nx = new[0]
        ny = new[1]
        pathlen += hypot(nx - x, ny - y)
        state = new
        x = nx
        y = ny
        phi = new[2]
        if dynamic:
            vx = new[3]
            vy = new[4]
        else:
            vx = vmin + (a1p + 1.0) * half_span
        if traj is not None:
            traj.append((k * p.ts, x, y, phi, vx, vy, a0p, a1p))
        if reached(x, y, phi, vx):
            return RolloutResult(True, pathlen, k, traj)
    return RolloutResult(False, pathlen, cfg.t_max, traj)


def evaluate(theta, tasks, cfg: TrainConfig) -> Score:
    """Cumulative score over a task list: solved count and negative total
    pathlength (unsolved tasks contribute the length they did travel)."""
    fwd = nets.compile_forward(cfg.net_spec, theta)
    n_solved = 0
    total = 0.0
    for task in tasks:
        solved, pathlen, _, _ = rollout(theta, task, cfg, policy=fwd)
        if solved:
            n_solved += 1
        total += pathlen
    return Score(n_solved, -total)


def make_candidate(theta, sigma: float, seed: int) -> list[float]:
    """Rebuild the candidate theta + sigma * xi from its scalar seed."""
    xi = ParkMillerRng(seed).fill_gaussian(len(theta))
    return [t + sigma * g for t, g in zip(theta, xi)]


# Worker-side state for the process pool: set once per worker, jobs then
# carry only (theta, sigma, seed).
_POOL_STATE = None


def _pool_init(cfg, tasks):
    global _POOL_STATE
    _POOL_STATE = (cfg, tasks)


def _pool_eval(job):
    cfg, tasks = _POOL_STATE
    theta, sigma, seed = job
    return evaluate(make_candidate(theta, sigma, seed), tasks, cfg)


class CandidatePool:
    """Evaluates candidate batches, inline or on a process pool.

    Results depend only on the jobs, never on scheduling, so any worker
    count yields identical scores.
    """

    def __init__(self, cfg: TrainConfig, tasks):
        self._cfg = cfg
        self._tasks = list(tasks)
        self._pool = None
        if cfg.worker_count > 1:
            import multiprocessing as mp
            try:
                ctx = mp.get_context("fork")
            except ValueError:  # non-POSIX fallback
                ctx = mp.get_context()
            self._pool = ctx.Pool(cfg.worker_count, initializer=_pool_init,
                                  initargs=(cfg, self._tasks))

    def evaluate_batch(self, theta, sigma, seeds) -> list[Score]:
        jobs = [(theta, sigma, seed) for seed in seeds]
        if self._pool is not None:
            return self._pool.map(_pool_eval, jobs, chunksize=1)
        cfg, tasks = self._cfg, self._tasks
        return [evaluate(make_candidate(theta, sigma, seed), tasks, cfg)
                for theta, sigma, seed in jobs]

    def close(self):
        if self._pool is not None:
            self._pool.close()
            self._pool.join()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def train(tasks, cfg: TrainConfig,
          progress: Optional[Callable] = None) -> tuple[list[float], TrainReport]:
    """Hill climbing with restarts; returns the best parameters found and a
    full per-iteration report.

    Per restart the perturbation base is reinitialized; the first
    iteration's best candidate is always adopted, after which only strictly
    better candidate scores replace the incumbent (ties keep it; among
    candidates the lowest index wins).  The returned best is the
    lexicographic best of the restart finals, earliest restart on ties.
    """
    tasks = list(tasks)
    n_tasks = len(tasks)
    spec = cfg.net_spec
    n_param = nets.param_count(spec)
    report = TrainReport(n_tasks=n_tasks, n_param=n_param)
    sigma_rng = ParkMillerRng(derive_seed(cfg.master_seed, _STREAM_SIGMA))
    best_theta = None
    best_score = None
    t_start = time.perf_counter()

    with CandidatePool(cfg, tasks) as pool:
        for r in range(cfg.n_restarts):
            theta = nets.init_params(
                spec, ParkMillerRng(derive_seed(cfg.master_seed, _STREAM_INIT, r)))
            inc = None
            for k in range(cfg.n_iter_max):
                t_iter = time.perf_counter()
                sigma = cfg.sigma_lo + sigma_rng.uniform() * (cfg.sigma_hi
                                                              - cfg.sigma_lo)
                seeds = [derive_seed(cfg.master_seed, _STREAM_CAND, r, k, i)
                         for i in range(cfg.n_candidates)]
                scores = pool.evaluate_batch(theta, sigma, seeds)
                best_i = 0
                best_cand = scores[0]
                for i in range(1, len(scores)):
                    if score_better(scores[i], best_cand):
                        best_i = i
                        best_cand = scores[i]
                accepted = inc is None or score_better(best_cand, inc)
                if accepted:
                    theta = make_candidate(theta, sigma, seeds[best_i])
                    inc = best_cand
                    if (report.p_star_first_solve is None
                            and inc.n_solved == n_tasks):
                        report.p_star_first_solve = inc.p_star
                report.records.append(IterRecord(
                    r, k, sigma, best_i, seeds[best_i], accepted,
                    inc.n_solved, inc.p_star, time.perf_counter() - t_iter))
                if progress is not None:
                    progress(r, k, inc)
            if inc.n_solved == n_tasks:
                report.n_rest_star += 1
            if best_score is None or score_better(inc, best_score):
                best_score = inc
                best_theta = theta
                report.best_restart = r

    report.best_n_solved = best_score.n_solved
    report.best_p_star = best_score.p_star
    if (report.p_star_first_solve is not None
            and report.best_n_solved == n_tasks):
        first = report.p_star_first_solve
        if first != 0.0:
            report.dp_first_pct = (report.best_p_star - first) / abs(first) * 100.0
        else:
            report.dp_first_pct = 0.0
    report.wall_s = time.perf_counter() - t_start
    return best_theta, report


def train_scheduled(tasks, cfg: TrainConfig, subset_overrides=None,
                    progress: Optional[Callable] = None
                    ) -> tuple[list[BankEntry], dict[float, TrainReport]]:
    """Train one network per vx0 subset of the task grid.

    subset_overrides maps a subset key [m/s] to TrainConfig field overrides
    (e.g. a larger t_max for a hard subset); seeds derive from the master
    seed and the key alone, so overriding one subset leaves every other
    subset's run unchanged.
    """
    subsets = partition_by_velocity(tasks)
    overrides = subset_overrides or {}
    bank = []
    reports = {}
    for key, subset in subsets.items():
        sub_cfg = replace(cfg,
                          master_seed=derive_seed(cfg.master_seed, _STREAM_SUBSET,
                                                  round(key * 3600.0)),
                          **overrides.get(key, {}))
        sub_progress = (lambda r, k, s, _key=key: progress(_key, r, k, s)) \
            if progress is not None else None
        theta, report = train(subset, sub_cfg, progress=sub_progress)
        bank.append(BankEntry(key, sub_cfg.net_spec, tuple(theta)))
        reports[key] = report
    return bank, reports


def bank_lookup(bank, vx: float) -> BankEntry:
    """Entry with the key nearest to vx; exact midpoint ties take the lower key."""
    if not bank:
        raise ValueError("empty network bank")
    return min(bank, key=lambda e: (abs(e.key - vx), e.key))


def save_bank(path, bank) -> None:
    """All bank entries concatenated in the parameter text format."""
    with open(path, "w", encoding="ascii", newline="\n") as f:
        for entry in bank:
            f.write(nets.format_params(entry.spec, entry.theta, key=entry.key))


def load_bank(path) -> list[BankEntry]:
    with open(path, encoding="ascii") as f:
        lines = f.read().splitlines()
    bank = []
    block: list[str] = []
    for ln in lines:
        if ln and not _is_number(ln):
            if block:
                bank.append(_entry_from_block(block))
            block = [ln]
        elif ln.strip():
            block.append(ln)
    if block:
        bank.append(_entry_from_block(block))
    if not bank:
        raise ValueError(f"no network entries in {path}")
    return bank


def _is_number(line: str) -> bool:
    try:
        float(line)
        return True
    except ValueError:
        return False


def _entry_from_block(block) -> BankEntry:
    spec, theta, key = nets.parse_params("\n".join(block))
    return BankEntry(0.0 if key is None else key, spec, tuple(theta))
