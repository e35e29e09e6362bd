"""Where a sheared elastic interface is unstable, and how fast it grows.

Sweeps the Mach number M across the window (K, sqrt(K^2 + 2)) for a few
elastic numbers K and prints the growth constant X1 = tau / |eta|.
"""

import math

import numpy as np

from elastic_kh import BackgroundState, quartic_roots, stability_window

for K in (0.0, 0.5, 1.0):
    top = math.sqrt(K * K + 2.0)
    print(f"K = {K}: unstable for {K:.3f} < M < {top:.3f}")
    for M in np.linspace(max(K - 0.2, 0.0), top + 0.2, 9):
        st = BackgroundState.from_km(K, M)
        roots = quartic_roots(st)
        x1 = f"{roots.x1:.6f}" if roots.x1_sq > 0 else "-"
        print(f"  M = {M:6.3f}  {stability_window(st).classification.value:16s} X1 = {x1}")

# the Euler growth constant peaks at M = sqrt(3)/2 with X1 = 1/2
print("Euler peak:", quartic_roots(BackgroundState.from_km(0.0, math.sqrt(3) / 2)).x1)
