from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from cparticle import spectrum
from cparticle.coords import Domain, domains_for
from cparticle.core import EUCLID, MINKOWSKI, DimensionError
from cparticle.spectrum import Branch, FactorKind


def test_eigenvalue_table_frozen():
    got = [spectrum.eigenvalue(4, ell, b) for ell in range(4) for b in Branch]
    assert got == [0, 1, -3, 0, -8, -3, -15, -8]


def test_catalogs_frozen():
    assert sorted(spectrum.catalog(4, "euclid", 4)) == [-15, -8, -3, 0, 1]
    assert spectrum.catalog(5, "minkowski", 6) == {0}
    assert sorted(spectrum.catalog(2, "euclid", 3)) == [-9, -4, -1, 0]
    assert sorted(spectrum.catalog(2, "minkowski", 3)) == [0, 1, 4, 9]


def test_two_dimensional_families():
    mink = spectrum.eigenvalues_2d(MINKOWSKI)
    assert mink.contains(Fraction(9, 4)) and not mink.contains(-1)
    euc = spectrum.eigenvalues_2d(EUCLID)
    assert euc.contains(-4) and not euc.contains(Fraction(-1, 4)) and not euc.contains(1)


def test_chain_and_its_symmetry():
    ch = spectrum.solve_chain(4, EUCLID, 2)
    assert ch[Branch.PLUS].p == 2 and ch[Branch.PLUS].lam == -8
    assert ch[Branch.MINUS].p == -3 and ch[Branch.MINUS].lam == -3
    for b in Branch:
        assert all(r == 0 for r in ch[b].residuals().values())
    with pytest.raises(DimensionError):
        spectrum.solve_chain(2, EUCLID, 1)
    # the self relations are invariant under n_m -> -(n_m + m - 1)
    for name, diff in spectrum.chain_symmetry_residuals(5):
        if name.startswith("self"):
            assert sp.expand(diff) == 0


def test_admissibility_verdicts():
    assert spectrum.admissibility(4, MINKOWSKI, 1, Branch.MINUS, FactorKind.SECOND)
    assert not spectrum.admissibility(4, MINKOWSKI, 1, Branch.PLUS, FactorKind.FIRST)
    assert spectrum.admissibility(6, EUCLID, 0, Branch.MINUS, FactorKind.SECOND)
    assert not spectrum.admissibility(6, EUCLID, 1, Branch.MINUS, FactorKind.FIRST)


def test_critical_dimensions_and_witnesses():
    e = spectrum.critical_dimensions("euclid")
    m = spectrum.critical_dimensions("minkowski")
    assert e.dims == [2, 4, 6] and m.dims == [4]
    assert e.witnesses[6]["lambda"] == "3" and e.witnesses[6]["kind"] == "second"
    assert m.witnesses[4]["lambda"] == "0"


def test_d3_euclid_is_sphere_spectrum():
    assert spectrum.admissible_spectrum(3, "euclid", 10) == {-ell * (ell + 1) for ell in range(11)}


@pytest.mark.parametrize("D", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("sig", [EUCLID, MINKOWSKI])
def test_catalog_brackets_enumeration(D, sig):
    L = 8
    assert spectrum.catalog(D, sig, L) <= spectrum.admissible_spectrum(D, sig, L) <= spectrum.catalog(D, sig, L + 1)


@pytest.mark.parametrize("D", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("sig", [EUCLID, MINKOWSKI])
def test_admissible_eigenfunctions_solve_equation(D, sig, rng):
    for sol in spectrum.solutions(D, sig, 3):
        if not sol.admissible:
            continue
        for dom in domains_for(sig):
            if D == 2 and dom is Domain.MZERO:
                continue
            assert spectrum.residual(sol, rng, dom, n=20) < 1e-9, (sol.ell, sol.branch, sol.kind)


def test_second_kind_witness_blows_up_at_antipode():
    # bounded at the chart origin, as the growth exponent says, but not at theta_1 = pi
    w = [s for s in spectrum.solutions(6, EUCLID, 0) if s.admissible and s.kind is FactorKind.SECOND][0]
    probe = spectrum.boundedness_probe(w, Domain.EUCLID)
    near0, nearpi = sorted(probe)
    assert probe[near0] < 1.0 and probe[nearpi] > 1e12


def test_exhaustiveness_scan_inside_catalog():
    assert spectrum.exhaustiveness_scan(3, "euclid") == {-ell * (ell + 1) for ell in range(7)}
    assert spectrum.exhaustiveness_scan(4, "minkowski") == {0}
    assert spectrum.exhaustiveness_scan(4, "euclid") <= spectrum.catalog(4, "euclid", 12)


@given(st.integers(3, 8), st.integers(0, 12))
def test_branches_swap_under_reflection(D, ell):
    # p -> -p - D + 3 maps one branch onto the other with the same eigenvalue family
    lp = spectrum.eigenvalue(D, ell, Branch.PLUS)
    lm = spectrum.eigenvalue(D, ell + 1, Branch.MINUS)
    assert lp == lm
    assert Branch.PLUS.p(D, ell) + Branch.MINUS.p(D, ell) == 3 - D


@given(st.integers(2, 40))
def test_minkowski_critical_only_at_four(D):
    hit = Fraction(D * (D - 4), 4) in {Fraction(x) for x in spectrum.catalog(D, "minkowski", 4)}
    assert hit == (D == 4)
