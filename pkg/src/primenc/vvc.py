"""Virtual velocity constraints: a per-step filter on the longitudinal channel.

The raw network output is read as a commanded velocity, clipped into a fixed
+-5/3.6 m/s corridor around the task's goal velocity, and mapped back to a
control.  On the kinematic model the back-map is the exact inverse of the
velocity map (a projection).  On the dynamic model, which has no velocity
channel, the filter instead emits a torque command through a one-parameter
saturating velocity-error law around the zero-torque point; that single gain
is learned alongside the network weights.

The filter runs every control step, independent of goal proximity, and its
output still passes through the actuator absolute/rate limits.
"""

from dataclasses import dataclass

from .models import DYNAMIC16, VehicleParams
from .nets import tanh_approx

VVC_MARGIN = 5.0 / 3.6

# Projection guard: clipped commands land this far inside the corridor, in
# m/s.  The corridor margin equals the velocity tolerance, so the filter
# must guarantee that an edge-clipped command still satisfies that
# tolerance after the normalize/denormalize round trip; plain clipping
# would leave that to rounding luck (the corridor bounds carry the rounding
# error of a ~35 m/s sum while the tolerance compares at ~1.4 m/s).  A
# picometer-per-second nudge is far above the round-trip error and far
# below anything physical.
_EDGE_GUARD = 1e-12


@dataclass(frozen=True)
class VvcContext:
    """Per-task constants of the filter."""

    v_goal: float
    vmin: float
    vmax: float
    a_v_thres: float
    margin: float = VVC_MARGIN


def make_context(v_goal: float, p: VehicleParams) -> VvcContext:
    return VvcContext(v_goal, p.vmin, p.vmax, p.a_v_thres)


def apply_vvc(a1_raw: float, vx: float, ctx: VvcContext,
              theta_vvc: float, model_kind: str) -> float:
    """Filter the raw longitudinal control.

    theta_vvc is only read for the dynamic model.  When the commanded
    velocity already sits inside the corridor the kinematic branch returns
    a1_raw unchanged (the back-map is the exact inverse there).
    """
    vmin = ctx.vmin
    span = ctx.vmax - vmin
    v_cmd = vmin + (a1_raw + 1.0) * 0.5 * span
    lo = ctx.v_goal - ctx.margin + _EDGE_GUARD
    hi = ctx.v_goal + ctx.margin - _EDGE_GUARD
    if model_kind == DYNAMIC16:
        if v_cmd > hi:
            v_cmd = hi
        elif v_cmd < lo:
            v_cmd = lo
        return ctx.a_v_thres + tanh_approx(theta_vvc * (vx - v_cmd))
    if v_cmd > hi:
        return 2.0 * (hi - vmin) / span - 1.0
    if v_cmd < lo:
        return 2.0 * (lo - vmin) / span - 1.0
    return a1_raw
