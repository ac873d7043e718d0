"""
Trajectories on the constraint surface
======================================

Start from a state with vanishing constraints, integrate with RK4 and watch
the constraints and the conserved momentum.
"""

import numpy as np

from cparticle import dynamics

rng = np.random.default_rng(1)
state = dynamics.null_initial_state(rng, 4, 0.8, g=1.0 + 0.3j)
print("initial constraints", dynamics.constraints(state))

traj = dynamics.integrate(state, tau_span=(0.0, 1.0), step=1e-3)
for k, v in traj.drift().items():
    print(f"{k:16s} {v:.2e}")

# the first rows of the trajectory table
print("\n".join(traj.to_csv().splitlines()[:4]))
