"""
Three routes to the Laplace-Beltrami operator
=============================================

Compare the Cartesian form (box minus the radial part), the closed form in
pseudo-spherical coordinates and the Lorentz-generator sum on random
points of each chart domain.
"""

import numpy as np

from cparticle import coords, lbop
from cparticle.cli import lb_equivalence
from cparticle.core import EUCLID, MINKOWSKI

rng = np.random.default_rng(0)

for D in (3, 4, 5):
    for sig in (EUCLID, MINKOWSKI):
        for dom in coords.domains_for(sig):
            print(D, sig, dom.name, f"{lb_equivalence(rng, D, sig, dom, 100):.2e}")

# the generator sum, on one field
D, sig = 4, MINKOWSKI
pts = [coords.random_point(rng, D, sig, coords.Domain.MPLUS) for _ in range(5)]
U = np.array([coords.to_cartesian(p) for p in pts]).T
f = lbop.test_fields(D, sig)[3]
print(np.max(np.abs(lbop.lb_cartesian(f, U, sig) - lbop.lb_generator_sum(f, U, sig))))
