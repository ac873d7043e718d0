"""
Constraint algebra, classical and quantum
=========================================

The Poisson brackets of the constraints close into sl(2,R); the operator
version closes with a central term and the BRST charge squares to zero at
alpha = D/4.
"""

import numpy as np

from cparticle import poisson, quantum

print(poisson.pretty(poisson.verify_algebra()))

# the other normalization does not close on L0
print(poisson.pretty(poisson.algebra_identities(poisson.constraint_set("printed"))))

rng = np.random.default_rng(2)
A, B, C = (poisson.random_polynomial(rng) for _ in range(3))
print({k: v.is_zero() for k, v in poisson.bracket_axioms(A, B, C).items()})

print(quantum.commutator_check(6))
br = quantum.brst_nilpotency(4)
# every residual is a multiple of (alpha - D/4)
print(br["residuals"][:2], len(br["residuals"]))
print(br["divisible"], br["vanish_at_critical"])
