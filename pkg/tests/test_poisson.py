import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from cparticle import dynamics, poisson
from cparticle.core import EUCLID, MINKOWSKI
from cparticle.poisson import KAPPA, PhasePolynomial, dsym, poisson as pb, scalar, vec


def test_canonical_pairs():
    assert pb(dsym("a", "z"), dsym("b", "pi")) == PhasePolynomial(dsym("a", "b"))
    assert pb(dsym("a", "zb"), dsym("b", "pib")) == PhasePolynomial(dsym("a", "b"))
    assert pb(dsym("a", "z"), dsym("b", "pib")).is_zero()
    assert pb(scalar("g"), scalar("pg")) == PhasePolynomial(1)
    assert pb(scalar("pgb"), scalar("gb")) == PhasePolynomial(-1)


def test_square_brackets_frozen():
    # {z.z, pi.pi} = 4 z.pi
    assert pb(dsym("z", "z"), dsym("pi", "pi")) == PhasePolynomial(4 * dsym("z", "pi"))
    # {z.pi, z.z} = -2 z.z
    assert pb(dsym("z", "pi"), dsym("z", "z")) == PhasePolynomial(-2 * dsym("z", "z"))


def test_parameters_ride_along():
    A = PhasePolynomial(dsym("z", "z") / KAPPA)
    B = PhasePolynomial(KAPPA**2 * dsym("pi", "pi") * scalar("g").expr)
    assert pb(A, B) == PhasePolynomial(4 * KAPPA * scalar("g").expr * dsym("z", "pi"))


def test_momentum_squared_constraint():
    P = poisson.P_vec()
    # P.P = pi.pi - 2 i kappa pi.zb - kappa^2 zb.zb
    expect = dsym("pi", "pi") - 2 * sp.I * KAPPA * dsym("pi", "zb") - KAPPA**2 * dsym("zb", "zb")
    assert P.dot(P) == PhasePolynomial(expect)
    # {P.a, Pbar.b} = -2 i kappa a.b
    assert pb(vec("a").dot(P), vec("b").dot(P.conj())) == PhasePolynomial(-2 * sp.I * KAPPA * dsym("a", "b"))


@pytest.mark.parametrize("ident", poisson.algebra_identities(), ids=lambda i: i.name)
def test_algebra_table(ident):
    assert ident.holds, ident.residual


def test_printed_normalization_breaks_l0_brackets():
    bad = [i.name for i in poisson.algebra_identities(poisson.constraint_set("printed")) if not i.holds]
    assert sorted(bad) == sorted(["{L1,L0}=i(1-0)L1", "{L0,L1}=i(0-1)L1",
                                  "{L0,L-1}=i(0--1)L-1", "{L-1,L0}=i(-1-0)L-1"])
    with pytest.raises(poisson.AlgebraViolation):
        poisson.verify_algebra(poisson.constraint_set("printed"))


def test_unknown_normalization():
    with pytest.raises(ValueError):
        poisson.constraint_set("other")


@pytest.mark.parametrize("ident", poisson.flow_identities() + poisson.momentum_bracket()
                         + poisson.gauge_generator_action(), ids=lambda i: i.name)
def test_flow_momentum_gauge(ident):
    assert ident.holds, ident.residual


def test_flow_negative_control():
    # dropping the 4 i kappa from the chi0 flow must be caught
    cs = poisson.constraint_set()
    wrong = poisson.mod_phi(poisson.hamiltonian_flow(cs.chi0)) - (scalar("g") * cs.chi - scalar("gb") * cs.chi_bar)
    assert not wrong.is_zero()


@given(st.integers(0, 2**32 - 1))
def test_bracket_axioms(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (poisson.random_polynomial(rng) for _ in range(3))
    for name, res in poisson.bracket_axioms(A, B, C).items():
        assert res.is_zero(), name


def test_random_polynomial_degree():
    rng = np.random.default_rng(3)
    for _ in range(20):
        e = poisson.random_polynomial(rng, max_degree=3).expr
        for term in sp.Add.make_args(sp.expand(e)):
            deg = 0
            for f, k in term.as_powers_dict().items():
                if isinstance(f, sp.Symbol) and f != KAPPA:
                    deg += k * (2 if f.name.startswith("(") else 1)
            assert deg <= 3


def test_pullback_matches_lagrangian_constraints(rng):
    cs = poisson.constraint_set()
    for sig in (EUCLID, MINKOWSKI):
        for D in (2, 4):
            z = rng.normal(size=D) + 1j * rng.normal(size=D)
            w = rng.normal(size=D) + 1j * rng.normal(size=D)
            g = complex(rng.normal(), rng.normal())
            k = 0.8
            ell, _, ell0 = dynamics.constraints(dynamics.LagrangianState(z, w, g, k, sig))
            chi = poisson.pullback(cs.chi, w, z, g, k, sig)
            chi0 = poisson.pullback(cs.chi0, w, z, g, k, sig)
            assert abs(chi - ell / (2 * g * g)) < 1e-12 * (1 + abs(chi))
            assert abs(chi0 - ell0 / abs(g) ** 2) < 1e-12 * (1 + abs(chi0))
            p = dynamics.conserved_momentum(dynamics.LagrangianState(z, w, g, k, sig))
            W = w / g + 1j * k * np.conj(z)
            for mu in range(D):
                a = np.zeros(D)
                a[mu] = 1.0
                vals = {"a": a, "z": z, "zb": np.conj(z), "pi": W, "pib": np.conj(W)}
                pa = vec("a").dot(poisson.momentum()).evaluate(vals, sig, {KAPPA: k})
                assert abs(pa - sig.metric(D)[mu] * p[mu]) < 1e-12


def test_json_and_pretty():
    ids = poisson.algebra_identities()
    data = json.loads(poisson.to_json(ids))
    assert len(data) == len(ids) == 13
    assert all(d["holds"] for d in data)
    text = poisson.pretty(poisson.algebra_identities(poisson.constraint_set("printed")))
    assert text.count("FAIL") == 4
    assert "residual:" in text
