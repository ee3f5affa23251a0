"""Run artifacts: per-iteration CSV records, per-subset summary, markdown table.

CSV files use '.' decimals, '\n' line ends and shortest-round-trip floats,
so reruns diff bit-exactly (wall-clock columns are informational and are the
one part excluded from determinism comparisons).  The markdown report is a
pure function of the two CSVs, which makes regeneration idempotent.
"""

from dataclasses import dataclass
from typing import Optional

RECORD_FIELDS = ("subset", "restart", "iteration", "sigma", "cand_index",
                 "cand_seed", "accepted", "n_solved", "p_star", "wall_s")
SUMMARY_FIELDS = ("subset", "n_tasks", "n_solved", "p_star", "n_param",
                  "n_rest_star", "dp_first_pct", "wall_s")


@dataclass(frozen=True)
class SummaryRow:
    subset: str
    n_tasks: int
    n_solved: int
    p_star: float
    n_param: int
    n_rest_star: int
    dp_first_pct: Optional[float]
    wall_s: float


def summary_from_report(subset: str, report) -> SummaryRow:
    return SummaryRow(subset, report.n_tasks, report.best_n_solved,
                      report.best_p_star, report.n_param, report.n_rest_star,
                      report.dp_first_pct, report.wall_s)


def records_csv(items) -> str:
    """items: iterable of (subset_label, IterRecord)."""
    lines = [",".join(RECORD_FIELDS)]
    for subset, r in items:
        lines.append(",".join((
            subset, str(r.restart), str(r.iteration), repr(r.sigma),
            str(r.cand_index), str(r.cand_seed), str(int(r.accepted)),
            str(r.n_solved), repr(r.p_star), repr(r.wall_s))))
    return "\n".join(lines) + "\n"


def summary_csv(rows) -> str:
    lines = [",".join(SUMMARY_FIELDS)]
    for s in rows:
        dp = "" if s.dp_first_pct is None else repr(s.dp_first_pct)
        lines.append(",".join((
            s.subset, str(s.n_tasks), str(s.n_solved), repr(s.p_star),
            str(s.n_param), str(s.n_rest_star), dp, repr(s.wall_s))))
    return "\n".join(lines) + "\n"


def parse_summary_csv(text: str) -> list[SummaryRow]:
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != ",".join(SUMMARY_FIELDS):
        raise ValueError("not a summary csv")
    rows = []
    for ln in lines[1:]:
        f = ln.split(",")
        if len(f) != len(SUMMARY_FIELDS):
            raise ValueError(f"bad summary row: {ln!r}")
        rows.append(SummaryRow(f[0], int(f[1]), int(f[2]), float(f[3]),
                               int(f[4]), int(f[5]),
                               None if f[6] == "" else float(f[6]),
                               float(f[7])))
    return rows


def render_markdown(rows) -> str:
    """One table row per trained subset, columns matching the usual report
    layout: solved count, best pathlength score, parameter count, learning
    time, all-solving restarts, refinement gain."""
    out = ["# Training report", "",
           "| v_x0 | N_tasks* | P* [m] | N_param^netw | T_learn^tot [s] "
           "| N_rest* | dP*_1st |",
           "|---|---|---|---|---|---|---|"]
    for s in rows:
        dp = "--" if s.dp_first_pct is None else f"{s.dp_first_pct:.1f}%"
        out.append(f"| {s.subset} | {s.n_solved}/{s.n_tasks} | {s.p_star:.1f} "
                   f"| {s.n_param} | {s.wall_s:.1f} | {s.n_rest_star} | {dp} |")
    return "\n".join(out) + "\n"


def trajectory_csv(rows, solved: bool, pathlen: float) -> str:
    """Rollout trace: one row per step plus a trailing status comment."""
    lines = ["time,x,y,phi,vx,vy,a0,a1"]
    for r in rows:
        lines.append(",".join(repr(float(v)) for v in r))
    lines.append(f"# solved={'true' if solved else 'false'} pathlen={pathlen!r}")
    return "\n".join(lines) + "\n"


def tasks_csv(tasks) -> str:
    """Task-grid audit dump (SI units, one row per task)."""
    lines = ["index,vx0,v_goal,x_goal,y_goal,phi_goal,a0_init,a1_init,check_kind"]
    for i, t in enumerate(tasks):
        lines.append(",".join((
            str(i), repr(t.vx0), repr(t.v_goal), repr(t.x_goal),
            repr(t.y_goal), repr(t.phi_goal), repr(t.a0_init),
            repr(t.a1_init), t.check_kind)))
    return "\n".join(lines) + "\n"
