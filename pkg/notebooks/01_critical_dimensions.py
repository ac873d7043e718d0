"""
Critical dimensions from the angular spectrum
=============================================

The physical-state condition asks for an angular eigenvalue equal to
K = D(D-4)/4.  Here we list which dimensions admit one.
"""

from fractions import Fraction

from cparticle import quantum, spectrum

# K at alpha = D/4, exact
for D in range(2, 9):
    print(D, quantum.k_constant(D, Fraction(D, 4)))

# which D actually have an admissible eigenfunction with eigenvalue K
for sig in ("euclid", "minkowski"):
    res = spectrum.critical_dimensions(sig)
    print(sig, list(res.dims))
    for D, w in res.witnesses.items():
        print("   ", D, w)
