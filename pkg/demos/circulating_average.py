"""
Average drift when the beat phase circulates
============================================

For A < m/w or A > 1 the energy never vanishes and the beat phase winds
forever.  The displacement per beat period then fixes the mean velocity
k A^2 / (m + A^2 w), even though single instants can be far above 1.
"""

import math

from kgbohm import IntegratorOptions, TwoModeParams, integrate, mean_two_mode_velocity
from kgbohm.analysis import averaged_speed_prediction, time_average_velocity
from kgbohm.trajectory import has_energy_collapse, phase_time

for A in (0.2, 0.3, 1.5, 2 / 3):
    p = TwoModeParams(1.0, 3.0, A)
    print(f"A={A:.4f}  energy collapse: {has_energy_collapse(p)}")

p = TwoModeParams(1.0, 3.0, 0.3)
period = abs(phase_time(p, 2 * math.pi) - phase_time(p, 0.0))
traj = integrate(p.field(), [0.0], 0.0, 40 * period, IntegratorOptions(rtol=1e-10))
print("beat period:", period)
print("largest instantaneous speed:", max(abs(ep.v_extreme) for ep in traj.superluminal_episodes))

for n in (1, 5, 20, 40):
    rep = time_average_velocity(traj, (0.0, n * period), predicted_v=mean_two_mode_velocity(p))
    print(f"{n:3d} periods: mean v = {rep.mean_v[0]:.8f}  (closed form {rep.predicted_v[0]:.8f})")

# the rest/boost phase velocity, for comparison
print("sqrt((w-m)/(w+m)) =", averaged_speed_prediction(p.m, p.omega))
