"""Build one unstable normal mode and check that it solves the linear problem exactly."""

import numpy as np

from elastic_kh import BackgroundState, boundary_residuals, build_mode, interior_residual

state = BackgroundState(1.0, 1.5, 0.6, 0.8, 1.0)  # K = 1, M = 1.5
mode = build_mode(state, eta=2.0)
print("tau =", mode.tau, " on shell:", mode.on_shell)
print("decay rates:", complex(mode.m_hat.upper.decay), complex(mode.m_hat.lower.decay))
print("interior residual:", interior_residual(state, mode, np.linspace(0, 5, 20)))
for name, r in boundary_residuals(state, mode).items():
    print(f"  {name:26s} {r:.2e}")

# off the dispersion relation the interior still holds but the front does not move with the fluid
off = build_mode(state, 2.0, tau=1.2 * mode.tau)
print("off-shell kinematic residual:", boundary_residuals(state, off)["kinematic_upper"])
