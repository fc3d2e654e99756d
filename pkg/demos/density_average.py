"""
Long-time density averages
==========================

At a fixed point, the time means of the energy density and the momentum
density over (-T/2, T/2) tend to  int |f|^2 w^2/k  and  int |f|^2 w  (up to
one shared factor 2 pi / T), so their ratio stays below 1.
"""

import math

from kgbohm import PacketSpec, long_time_density_average

spec = PacketSpec.gaussian(k0=1.0, sigma=0.2, n=128, support_positive=True)
m = 1.0

print(f"{'T':>8} {'ratio':>16} {'oracle':>16} {'error':>10} {'c T / 2pi':>10}")
for T in (2.0, 8.0, 32.0, 128.0, 1e4 / spec.sigma):
    rep = long_time_density_average(spec, m, [0.0], T)
    err = abs(rep.ratio - rep.oracle_ratio)
    print(f"{T:8.0f} {rep.ratio:16.12f} {rep.oracle_ratio:16.12f} {err:10.2e} {rep.prefactor * T / (2 * math.pi):10.6f}")

# a narrow packet moves at its central group velocity
narrow = PacketSpec.gaussian(k0=2.0, sigma=0.04, support_positive=True)
print("narrow packet ratio:", long_time_density_average(narrow, m, [0.0], 2000.0).ratio)
print("k0 / w(k0):", 2.0 / math.sqrt(5.0))
