"""
A physical state in four dimensions
===================================

Build exp(i(k + kappa y).zb) (u^2)^(-alpha) h(u) with an eigenvalue-zero
angular field h and check the three physical-state conditions.
"""

import numpy as np

from cparticle import quantum, spectrum
from cparticle.coords import Domain
from cparticle.core import MINKOWSKI

rng = np.random.default_rng(3)
k = np.array([1.3, 0.4, -0.2, 0.7])

for sol in spectrum.solutions(4, MINKOWSKI, 2):
    if sol.lam != 0 or not sol.admissible:
        continue
    c = quantum.PhysicalStateCandidate(k=k, h=quantum.chart_field(sol.field, MINKOWSKI), D=4, sig=MINKOWSKI)
    for dom in (Domain.MPLUS, Domain.MMINUS, Domain.MZERO):
        res = quantum.physical_state_residuals(c, quantum.sample_z(rng, c, dom, 20))
        print(sol.ell, sol.kind.value, dom.name, {n: f"{v:.1e}" for n, v in res.items()})

# flipping the sign of the momentum shift breaks L0
c = quantum.PhysicalStateCandidate(k=k, h=lambda U: 1.0, D=4, sig=MINKOWSKI, shift=-1.0)
print(quantum.physical_state_residuals(c, quantum.sample_z(rng, c, Domain.MPLUS, 5))["L0"])
