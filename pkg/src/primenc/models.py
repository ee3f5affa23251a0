"""Vehicle simulation: 3-state kinematic bicycle and 16-state dynamic model.

Both models step with explicit Euler at Ts = 0.01 s and take the same
normalized control pair a = (a[0], a[1]) in [-1, 1]^2 after actuator
limiting: a[0] is the steering channel, a[1] the longitudinal channel
(velocity for the kinematic model, lumped drive/brake torque for the
dynamic one).

Dynamic model state vector (index order is load-bearing and fixed):

    0  x        position [m]
    1  y        position [m]
    2  phi      yaw [rad], wrapped into [0, 2*pi]
    3  vx       longitudinal velocity [m/s]
    4  vy       lateral velocity [m/s]
    5  wphi     yaw rate [rad/s]
    6  psi      roll [rad], wrapped
    7  wpsi     roll rate [rad/s]
    8  phip     pitch [rad], wrapped
    9  wphip    pitch rate [rad/s]
    10 w1..w4   wheel speeds FL, FR, RL, RR [rad/s]
    14 eta      vertical CoG displacement [m]
    15 veta     vertical CoG velocity [m/s]

The dynamic stepper keeps a fixed order of operations: full-stop special
case, low-speed velocity reinitialization, torque split, slip/force
computation with the s > 0.001 singularity guard, sequential in-place Euler
update (the vy update reads the already-updated vx), then angle wrapping.
Tire forces follow the magic-formula law F = D*sin(C*atan(B*s)) scaled by
the vertical wheel load.

The kinematic heading is wrapped symmetrically into [-pi, pi] via IEEE
remainder, which is an exact operation; together with the sign symmetry of
libm this makes left/right mirrored kinematic rollouts bitwise-exact
mirror images.  The dynamic model wraps its three angles into [0, 2*pi]
with repeated subtraction, matching its reference formulation, so its
mirror symmetry is only exact to rounding (~1e-12 over hundreds of steps).
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

KINEMATIC = "kinematic"
DYNAMIC16 = "dynamic16"

_TWO_PI = 2.0 * math.pi


class DivergenceError(RuntimeError):
    """A rollout produced a non-finite control or state component."""


@dataclass(frozen=True)
class VehicleParams:
    """Physical and actuator parameters, defaults matching the 16-state model.

    Angles are stored in radians (delta_max is 40 deg, ddelta_max 20 deg/s).
    vmin/vmax bound the kinematic velocity channel and also define the
    normalized-to-velocity mapping used by the velocity-constraint filter
    for both models.  accel_time_s / brake_time_s are the 0-100 / 100-0 km/h
    durations the kinematic rate limits emulate.
    """

    ts: float = 0.01
    delta_max: float = math.radians(40.0)
    ddelta_max: float = math.radians(20.0)
    ta_max: float = 1700.0
    ta_min: float = -4000.0
    dta_max: float = 1700.0
    dta_min: float = -4000.0
    m: float = 1450.0
    iz: float = 2741.9
    iw: float = 1.8
    ix: float = 500.0
    iy: float = 2500.0
    lf: float = 1.1
    lr: float = 1.59
    lw: float = 0.81
    h: float = 0.4
    re: float = 0.3
    g: float = 9.81
    ks: float = 10000.0
    cs: float = 2000.0
    rho_af_cd_05: float = 0.5 * 1.225 * 0.7
    pac_b: float = 7.0
    pac_c: float = 1.6
    pac_d: float = 1.0
    wheelbase: float = 2.69
    vmin: float = 0.0
    vmax: float = 130.0 / 3.6
    accel_time_s: float = 7.4
    brake_time_s: float = 3.8

    # Derived once (hot loops read these as plain attributes):
    # a_v_thres       normalized longitudinal control with zero lumped torque
    # steer_rate_step per-step steering rate bound, normalized (symmetric)
    # dyn/kin rate    per-step (up, down) longitudinal bounds, normalized;
    #                 kinematic rates emulate the 0-100/100-0 km/h times
    a_v_thres: float = field(init=False, repr=False, compare=False, default=0.0)
    steer_rate_step: float = field(init=False, repr=False, compare=False, default=0.0)
    dyn_long_rate_steps: tuple = field(init=False, repr=False, compare=False, default=(0.0, 0.0))
    kin_long_rate_steps: tuple = field(init=False, repr=False, compare=False, default=(0.0, 0.0))

    def __post_init__(self):
        ta_span = self.ta_max - self.ta_min
        v_span = self.vmax - self.vmin
        sset = object.__setattr__
        sset(self, "a_v_thres", -1.0 - 2.0 * self.ta_min / ta_span)
        sset(self, "steer_rate_step", self.ts * self.ddelta_max / self.delta_max)
        sset(self, "dyn_long_rate_steps",
             (self.ts * self.dta_max * 2.0 / ta_span,
              self.ts * self.dta_min * 2.0 / ta_span))
        sset(self, "kin_long_rate_steps",
             (self.ts * ((100.0 / 3.6) / self.accel_time_s) * 2.0 / v_span,
              -self.ts * ((100.0 / 3.6) / self.brake_time_s) * 2.0 / v_span))


class KinState3(NamedTuple):
    x: float
    y: float
    phi: float


class DynState16(NamedTuple):
    x: float
    y: float
    phi: float
    vx: float
    vy: float
    wphi: float
    psi: float
    wpsi: float
    phip: float
    wphip: float
    w1: float
    w2: float
    w3: float
    w4: float
    eta: float
    veta: float


@dataclass(frozen=True)
class ForceBreakdown:
    """Per-wheel force diagnostics of one dynamic step (wheel order FL FR RL RR)."""

    fxw: tuple[float, float, float, float]
    fyw: tuple[float, float, float, float]
    feta: tuple[float, float, float, float]
    fx: tuple[float, float, float, float]
    fy: tuple[float, float, float, float]
    fxair: float
    fyair: float
    slip: tuple[float, float, float, float]
    beta: float


def wrap_signed(angle: float) -> float:
    """Wrap into [-pi, pi] exactly (IEEE remainder is an exact operation)."""
    return math.remainder(angle, _TWO_PI)


def wrap_pi(angle: float) -> float:
    """Signed angle difference convention (-pi, pi]."""
    r = math.remainder(angle, _TWO_PI)
    if r == -math.pi:
        r = math.pi
    return r


def _wrap_02pi(a: float) -> float:
    while a > _TWO_PI:
        a -= _TWO_PI
    while a < 0.0:
        a += _TWO_PI
    return a


def encode_velocity(v: float, p: VehicleParams) -> float:
    """Velocity to normalized longitudinal control, inverse of the kinematic map."""
    return 2.0 * (v - p.vmin) / (p.vmax - p.vmin) - 1.0


def map_controls_kinematic(a0: float, a1: float, p: VehicleParams) -> tuple[float, float]:
    """Normalized controls to (steering angle [rad], velocity [m/s])."""
    delta = p.delta_max * a0
    v = p.vmin + (a1 + 1.0) * 0.5 * (p.vmax - p.vmin)
    return delta, v


def map_controls_dynamic(a0: float, a1: float, p: VehicleParams) -> tuple[float, float]:
    """Normalized controls to (steering angle [rad], lumped torque [Nm])."""
    delta = p.delta_max * a0
    ta = p.ta_min + (a1 + 1.0) * 0.5 * (p.ta_max - p.ta_min)
    return delta, ta


def apply_actuator_limits(a0_raw: float, a1_raw: float,
                          a0_prev: float, a1_prev: float,
                          p: VehicleParams, model_kind: str) -> tuple[float, float]:
    """Clamp raw controls first to the per-step rate window, then to [-1, 1].

    Raises DivergenceError for non-finite raw controls (a diverged
    candidate, not a process error).
    """
    if not (math.isfinite(a0_raw) and math.isfinite(a1_raw)):
        raise DivergenceError("non-finite raw control")

    r = p.steer_rate_step
    lo = a0_prev - r
    hi = a0_prev + r
    a0 = lo if a0_raw < lo else hi if a0_raw > hi else a0_raw
    a0 = -1.0 if a0 < -1.0 else 1.0 if a0 > 1.0 else a0

    if model_kind == DYNAMIC16:
        up, down = p.dyn_long_rate_steps
    else:
        up, down = p.kin_long_rate_steps
    lo = a1_prev + down
    hi = a1_prev + up
    a1 = lo if a1_raw < lo else hi if a1_raw > hi else a1_raw
    a1 = -1.0 if a1 < -1.0 else 1.0 if a1 > 1.0 else a1
    return a0, a1


def step_kinematic(s: KinState3, a0: float, a1: float, p: VehicleParams) -> KinState3:
    """One Euler step of x' = v cos(phi), y' = v sin(phi), phi' = v/L tan(delta)."""
    delta = p.delta_max * a0
    v = p.vmin + (a1 + 1.0) * 0.5 * (p.vmax - p.vmin)
    x, y, phi = s
    ts = p.ts
    vts = v * ts
    return KinState3(
        x + vts * math.cos(phi),
        y + vts * math.sin(phi),
        math.remainder(phi + ts * (v / p.wheelbase) * math.tan(delta), _TWO_PI),
    )


def step_dynamic16(s: DynState16, a0: float, a1: float, p: VehicleParams) -> DynState16:
    """One Euler step of the 16-state model (forces discarded)."""
    return _step_dyn(s, a0, a1, p, False)


def step_dynamic16_forces(s: DynState16, a0: float, a1: float,
                          p: VehicleParams) -> tuple[DynState16, ForceBreakdown]:
    """One Euler step of the 16-state model plus its force breakdown."""
    return _step_dyn(s, a0, a1, p, True)


def _step_dyn(s, a0, a1, p, want_forces):
    (x, y, phi, vx, vy, wphi, psi, wpsi, phip, wphip,
     w1, w2, w3, w4, eta, veta) = s

    ta_min = p.ta_min
    ta_max = p.ta_max
    avthres = -1.0 - 2.0 * ta_min / (ta_max - ta_min)

    # Full stop is absorbing: below 1 km/h with a no-torque command the
    # motion states are zeroed and no dynamics are evaluated.
    if (1.0 / 3.6 > vx > -1.0 / 3.6
            and avthres + 0.001 > a1 > avthres - 0.001):
        out = DynState16(x, y, phi, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                         0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        if want_forces:
            zero4 = (0.0, 0.0, 0.0, 0.0)
            return out, ForceBreakdown(zero4, zero4, zero4, zero4, zero4,
                                       0.0, 0.0, zero4, 0.0)
        return out

    re = p.re
    # Near zero velocity with an active torque command, reinitialize vx away
    # from the pole in the slip denominators (wheels synced to vx).
    if 0.1 / 3.6 > vx > -0.1 / 3.6 and a1 > avthres:
        vx = 1.0 / 3.6
        w1 = w2 = w3 = w4 = vx / re
    elif 0.1 / 3.6 > vx > -0.1 / 3.6 and a1 < avthres:
        vx = -1.0 / 3.6
        w1 = w2 = w3 = w4 = vx / re

    sign_fb = 1.0
    if vx < 0.0:
        sign_fb = -1.0

    delta = p.delta_max * a0
    ta = ta_min + 0.5 * (ta_max - ta_min) * (a1 + 1.0)
    lf = p.lf
    lr = p.lr
    lf_frac = lf / (lf + lr)
    lr_frac = lr / (lf + lr)
    if ta >= 0.0:
        ta1 = 0.5 * ta
        ta2 = 0.5 * ta
        tb1 = tb2 = tb3 = tb4 = 0.0
    else:
        ta1 = ta2 = 0.0
        tb1 = -lf_frac * ta
        tb2 = -lf_frac * ta
        tb3 = -lr_frac * ta
        tb4 = -lr_frac * ta

    beta = math.atan2(vy, vx)
    fair = p.rho_af_cd_05 * (vx * vx + vy * vy)
    cos_beta = math.cos(beta)
    fxair = fair * cos_beta
    fyair = fair * math.sin(beta)

    mass = p.m
    grav = p.g
    lw = p.lw
    ks = p.ks
    cs = p.cs
    mg05lr = 0.5 * mass * grav * lr_frac
    mg05lf = 0.5 * mass * grav * lf_frac
    sin_psi = math.sin(psi)
    cos_psi = math.cos(psi)
    sin_phip = math.sin(phip)
    cos_phip = math.cos(phip)

    feta1 = (mg05lr - ks * (eta - lf * sin_phip + lw * sin_psi)
             - cs * (veta - wphip * lf * cos_phip + lw * wpsi * cos_psi))
    feta2 = (mg05lr - ks * (eta - lf * sin_phip - lw * sin_psi)
             - cs * (veta - wphip * lf * cos_phip - lw * wpsi * cos_psi))
    feta3 = (mg05lf - ks * (eta + lf * sin_phip + lw * sin_psi)
             - cs * (veta + wphip * lf * cos_phip + lw * wpsi * cos_psi))
    feta4 = (mg05lf - ks * (eta + lf * sin_phip - lw * sin_psi)
             - cs * (veta + wphip * lf * cos_phip - lw * wpsi * cos_psi))

    pb = p.pac_b
    pc = p.pac_c
    pd = p.pac_d
    cbd = math.cos(beta - delta)
    sbd = math.sin(beta - delta)
    sin_d = math.sin(delta)
    cos_d = math.cos(delta)

    # Front wheels: velocities in the tire-aligned frame, slip ratios, and
    # magic-formula forces; below slip 0.001 the force is zero by the
    # singularity rule.
    v1x = vx * cbd / cos_beta + wphi * lf * sin_d - wphi * lw * cbd / cos_beta
    s1x = (v1x - w1 * re) / v1x
    s1y = (vx * sbd / cos_beta + wphi * lf * cos_d
           + wphi * lw * sbd / cos_beta) / v1x
    s1 = math.sqrt(s1x * s1x + s1y * s1y)
    if s1 > 0.001:
        mag = pd * math.sin(pc * math.atan(pb * s1)) * feta1 / s1
        fxw1 = -sign_fb * s1x * mag
        fyw1 = -sign_fb * s1y * mag
    else:
        fxw1 = 0.0
        fyw1 = 0.0

    v2x = vx * cbd / cos_beta + wphi * lf * sin_d + wphi * lw * cbd / cos_beta
    s2x = (v2x - w2 * re) / v2x
    s2y = (vx * sbd / cos_beta + wphi * lf * cos_d
           - wphi * lw * sbd / cos_beta) / v2x
    s2 = math.sqrt(s2x * s2x + s2y * s2y)
    if s2 > 0.001:
        mag = pd * math.sin(pc * math.atan(pb * s2)) * feta2 / s2
        fxw2 = -sign_fb * s2x * mag
        fyw2 = -sign_fb * s2y * mag
    else:
        fxw2 = 0.0
        fyw2 = 0.0

    # Rear wheels.
    v3x = vx - wphi * lw
    s3x = (v3x - w3 * re) / v3x
    s3y = (vy - wphi * lr) / v3x
    s3 = math.sqrt(s3x * s3x + s3y * s3y)
    if s3 > 0.001:
        mag = pd * math.sin(pc * math.atan(pb * s3)) * feta3 / s3
        fxw3 = -sign_fb * s3x * mag
        fyw3 = -sign_fb * s3y * mag
    else:
        fxw3 = 0.0
        fyw3 = 0.0

    v4x = vx + wphi * lw
    s4x = (v4x - w4 * re) / v4x
    s4y = (vy - wphi * lr) / v4x
    s4 = math.sqrt(s4x * s4x + s4y * s4y)
    if s4 > 0.001:
        mag = pd * math.sin(pc * math.atan(pb * s4)) * feta4 / s4
        fxw4 = -sign_fb * s4x * mag
        fyw4 = -sign_fb * s4y * mag
    else:
        fxw4 = 0.0
        fyw4 = 0.0

    # Rotate into the vehicle-aligned frame (steering, then roll/pitch).
    fx1 = (fxw1 * cos_d - fyw1 * sin_d) * cos_phip - feta1 * sin_phip
    fx2 = (fxw2 * cos_d - fyw2 * sin_d) * cos_phip - feta2 * sin_phip
    fx3 = fxw3 * cos_phip - feta3 * sin_phip
    fx4 = fxw4 * cos_phip - feta4 * sin_phip
    fy1 = ((fxw1 * cos_d - fyw1 * sin_d) * sin_psi * sin_phip
           + (fyw1 * cos_d + fxw1 * sin_d) * cos_psi
           + feta1 * sin_psi * cos_phip)
    fy2 = ((fxw2 * cos_d - fyw2 * sin_d) * sin_psi * sin_phip
           + (fyw2 * cos_d + fxw2 * sin_d) * cos_psi
           + feta2 * sin_psi * cos_phip)
    fy3 = (fxw3 * sin_psi * sin_phip + fyw3 * cos_psi
           + feta3 * sin_psi * cos_phip)
    fy4 = (fxw4 * sin_psi * sin_phip + fyw4 * cos_psi
           + feta4 * sin_psi * cos_phip)

    # Sequential Euler update; the vy line intentionally reads the already
    # updated vx, matching the in-place reference update order.
    ts = p.ts
    sum_fx = fx1 + fx2 + fx3 + fx4
    sum_fy = fy1 + fy2 + fy3 + fy4
    sum_feta = feta1 + feta2 + feta3 + feta4
    x_n = x + ts * (vx * math.cos(phi) - vy * math.sin(phi))
    y_n = y + ts * (vx * math.sin(phi) + vy * math.cos(phi))
    phi_n = phi + ts * wphi
    vx_n = vx + ts * ((sum_fx - fxair) / mass + vy * wphi)
    vy_n = vy + ts * ((sum_fy - fyair) / mass - vx_n * wphi)
    wphi_n = wphi + ts * (lf * (fy1 + fy2) - lr * (fy3 + fy4)
                          + lw * (fx2 + fx4 - fx1 - fx3)) / p.iz
    psi_n = psi + ts * wpsi
    wpsi_n = wpsi + ts * (lw * (feta1 + feta3 - feta2 - feta4)
                          + p.h * sum_fy) / p.ix
    phip_n = phip + ts * wphip
    wphip_n = wphip + ts * (lr * (feta3 + feta4) - lf * (feta1 + feta2)
                            - p.h * sum_fx) / p.iy
    w1_n = w1 + ts * (ta1 - tb1 - re * fxw1) / p.iw
    w2_n = w2 + ts * (ta2 - tb2 - re * fxw2) / p.iw
    w3_n = w3 + ts * (-tb3 - re * fxw3) / p.iw
    w4_n = w4 + ts * (-tb4 - re * fxw4) / p.iw
    eta_n = eta + ts * veta
    veta_n = veta + ts * (sum_feta / mass - grav)

    total = (x_n + y_n + phi_n + vx_n + vy_n + wphi_n + psi_n + wpsi_n
             + phip_n + wphip_n + w1_n + w2_n + w3_n + w4_n + eta_n + veta_n)
    if not math.isfinite(total):
        raise DivergenceError("non-finite dynamic state")

    out = DynState16(x_n, y_n, _wrap_02pi(phi_n), vx_n, vy_n, wphi_n,
                     _wrap_02pi(psi_n), wpsi_n, _wrap_02pi(phip_n), wphip_n,
                     w1_n, w2_n, w3_n, w4_n, eta_n, veta_n)
    if want_forces:
        return out, ForceBreakdown(
            (fxw1, fxw2, fxw3, fxw4),
            (fyw1, fyw2, fyw3, fyw4),
            (feta1, feta2, feta3, feta4),
            (fx1, fx2, fx3, fx4),
            (fy1, fy2, fy3, fy4),
            fxair, fyair,
            (s1, s2, s3, s4),
            beta,
        )
    return out


def dyn_initial_state(vx0: float, p: VehicleParams) -> DynState16:
    """At-origin straight-ahead state at longitudinal velocity vx0, wheels synced."""
    w = vx0 / p.re
    return DynState16(0.0, 0.0, 0.0, vx0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                      w, w, w, w, 0.0, 0.0)


def pathlength_increment(s_from, s_to) -> float:
    """Euclidean planar distance between two states' (x, y)."""
    return math.hypot(s_to[0] - s_from[0], s_to[1] - s_from[1])
