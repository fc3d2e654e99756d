"""
Far-field velocity of a gaussian packet
=======================================

Averaged over a growing window |x| <= X, the packet's momentum-to-energy
ratio approaches  int |f|^2 k dk / int |f|^2 w dk,  which is below 1
because w > |k| at every mode.
"""

import numpy as np

from kgbohm import PacketSpec, far_field_scan, far_field_velocity_limit

spec = PacketSpec.gaussian(k0=1.0, sigma=0.2, n=128)
m = 1.0
print("bandwidth kappa:", spec.bandwidth)
print("limit velocity:", far_field_velocity_limit(spec, m))

probes = np.geomspace(0.1, 50, 12) / spec.bandwidth
print(f"{'x kappa':>9} {'window v':>12} {'deviation':>10} {'local v':>10}  status")
for r in far_field_scan(spec, m, 0.0, probes):
    print(f"{r.distance_in_bandwidths:9.3f} {r.exact_v:12.8f} {r.deviation:10.2e} {r.local_v:10.5f}  {r.status}")

# a degenerate packet is a single plane wave: no deviation anywhere
plane = PacketSpec.tophat(1.0, 1.0 + 1e-9, n=2)
print("plane-wave deviations:", [r.deviation for r in far_field_scan(plane, m, 0.0, [0.5, 5.0, 50.0])])
