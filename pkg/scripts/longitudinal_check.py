#!/usr/bin/env python3
"""Print the dynamic model's 0-100 and 100-0 km/h times under full commands.

A quick physics sanity check of the 16-state model and its actuator rate
limits: full throttle from standstill, then full brake from 100 km/h.
"""

from primenc.models import (DYNAMIC16, VehicleParams, apply_actuator_limits,
                            dyn_initial_state, step_dynamic16)


def time_to(p, vx0, command, predicate):
    s = dyn_initial_state(vx0, p)
    a0p, a1p = 0.0, p.a_v_thres
    for k in range(1, 3000):
        a0p, a1p = apply_actuator_limits(0.0, command, a0p, a1p, p, DYNAMIC16)
        s = step_dynamic16(s, a0p, a1p, p)
        if predicate(s.vx):
            return k * p.ts
    return float("nan")


def main():
    p = VehicleParams()
    t_up = time_to(p, 0.0, 1.0, lambda vx: vx >= 100.0 / 3.6)
    t_dn = time_to(p, 100.0 / 3.6, -1.0, lambda vx: vx <= 0.1 / 3.6)
    print(f"0-100 km/h at full throttle: {t_up:.2f} s")
    print(f"100-0 km/h at full brake:    {t_dn:.2f} s")


if __name__ == "__main__":
    main()
