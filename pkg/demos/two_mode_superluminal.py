"""
Superluminal instants of a two-mode field
=========================================

A rest mode plus one boosted mode (m = 1, w = 3, A = 2/3).  The guided
particle speeds up past light speed near beat phase pi, then the energy
-dS/dt reaches zero and the velocity diverges.
"""

import math

from kgbohm import PRESET, guidance_state, integrate
from kgbohm.trajectory import phase_time, position_from_phase, two_mode_closed_form

wf = PRESET.field()

# closed-form quantities as functions of the beat phase
for eta in (0.0, math.pi / 2, math.pi):
    R2, E, P, v = two_mode_closed_form(PRESET, eta)
    print(f"eta={eta:6.3f}  R2={R2:.5f}  E={E:+.5f}  P={P:+.5f}  v={v:+.5f}")

# the same numbers from the field itself
s = guidance_state(wf, 0.0, [position_from_phase(PRESET, 0.0, math.pi)])
print("direct evaluation at eta=pi:", s.v[0], s.causal_class, "E^2-P^2 =", s.E ** 2 - s.P[0] ** 2)

traj = integrate(wf, [0.0], 0.0, 200.0)
print("termination:", traj.termination, "at t =", traj.t[-1])
for ep in traj.superluminal_episodes:
    print(f"episode t in [{ep.t_start:.6f}, {ep.t_end:.6f}]  v_extreme={ep.v_extreme:.4g}")

# E = 0 where cos(eta) = -7/8; the beat phase runs downward from 0
eta_star = -math.acos(-7 / 8)
print("closed-form arrival time:", phase_time(PRESET, eta_star) - phase_time(PRESET, 0.0))
