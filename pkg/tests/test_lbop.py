import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from cparticle import coords, core, lbop
from cparticle.coords import Domain
from cparticle.core import EUCLID, MINKOWSKI
from cparticle.lbop import RadialDependenceError

CASES = [(D, sig, dom) for D in range(2, 7) for sig in (EUCLID, MINKOWSKI)
         for dom in coords.domains_for(sig) if not (D == 2 and dom is Domain.MZERO)]


def _batch(rng, D, sig, dom, n):
    pts = [coords.random_point(rng, D, sig, dom) for _ in range(n)]
    U = np.array([coords.to_cartesian(p) for p in pts]).T
    r = np.array([p.r for p in pts])
    angles = [np.array([p.angles[k] for p in pts]) for k in range(D - 1)]
    return U, r, angles


def _rt(u):
    return core.sqrt(sum(x * x for x in u))


@pytest.mark.parametrize("D", [3, 4, 5])
def test_sphere_harmonic_eigenvalue_frozen(D, rng):
    # degree-1 and degree-2 harmonics on S^{D-1}: -l(l+D-2)
    U, _, _ = _batch(rng, D, EUCLID, Domain.EUCLID, 10)
    f1 = lbop.cartesian(lambda u: u[D - 1] / _rt(u))
    f2 = lbop.cartesian(lambda u: u[0] * u[1] / _rt(u) ** 2)
    val1 = U[D - 1] / np.linalg.norm(U, axis=0)
    val2 = U[0] * U[1] / np.sum(U * U, axis=0)
    assert np.allclose(lbop.lb_cartesian(f1, U, EUCLID), -(D - 1) * val1)
    assert np.allclose(lbop.lb_cartesian(f2, U, EUCLID), -2 * D * val2)


@pytest.mark.parametrize("D,sig,dom", CASES)
def test_three_routes_agree(D, sig, dom, rng):
    U, r, angles = _batch(rng, D, sig, dom, 40)
    for f in lbop.test_fields(D, sig):
        a = lbop.lb_cartesian(f, U, sig)
        b = lbop.lb_spherical(lbop.pullback(f, dom), (r, angles, dom, sig))
        c = lbop.lb_generator_sum(f, U, sig)
        scale = np.maximum(1.0, np.abs(a))
        assert np.max(np.abs(a - b) / scale) < 1e-8, f.name
        assert np.max(np.abs(a - c) / scale) < 1e-8, f.name


@pytest.mark.parametrize("D,sig,dom", [c for c in CASES if c[0] <= 4])
def test_box_split(D, sig, dom, rng):
    U, _, _ = _batch(rng, D, sig, dom, 20)
    f = lbop.cartesian(lambda u: core.exp(0.2 * u[0]) * u[D - 1] + u[0] * u[0])
    assert np.max(lbop.box_split_residual(f, U, sig)) < 1e-8


def test_radial_dependence_rejected():
    p = coords.SphericalPoint(1.3, (0.7, 0.4), Domain.EUCLID, EUCLID)
    with pytest.raises(RadialDependenceError):
        lbop.lb_spherical(lambda r, a: r * core.cos(a[0]), p)


def test_light_cone_rejected():
    with pytest.raises(coords.LightConeError):
        lbop.lb_cartesian(lbop.test_fields(2, MINKOWSKI)[0], np.array([1.0, 1.0]), MINKOWSKI)


@pytest.mark.parametrize("sig", [EUCLID, MINKOWSKI])
def test_generators_close_and_commute_with_casimir(sig):
    D = 3
    u = lbop.coordinate_symbols(D)
    p = u[0] ** 3 + 2 * u[0] * u[1] * u[2] - u[2] ** 2 * u[1]
    pairs = [(a, b) for a in range(D) for b in range(a + 1, D)]

    def G(m, n, e):
        return lbop.generator_poly(m, n, e, D, sig)

    lb = lbop.lb_poly(p, D, sig)
    for mu, nu in pairs:
        assert sp.expand(lbop.lb_poly(G(mu, nu, p), D, sig) - G(mu, nu, lb)) == 0
        for rho, sg in pairs:
            lhs = G(mu, nu, G(rho, sg, p)) - G(rho, sg, G(mu, nu, p))
            rhs = sum(c * G(a, b, p) for c, a, b in lbop.lorentz_commutator_rhs(mu, nu, rho, sg, D, sig))
            assert sp.expand(lhs - rhs) == 0


@given(st.integers(2, 5), st.sampled_from(["euclid", "minkowski"]), st.integers(0, 10**6))
def test_lb_invariant_under_scaling(D, sname, seed):
    # homogeneous-degree-zero fields: Delta_LB f(u) = Delta_LB f(lambda u)
    sig = core.Signature.parse(sname)
    rng = np.random.default_rng(seed)
    p = coords.random_point(rng, D, sig)
    if D == 2 and p.domain is Domain.MZERO:
        return
    u = coords.to_cartesian(p)
    f = lbop.test_fields(D, sig)[int(rng.integers(10))]
    a = lbop.lb_cartesian(f, u, sig)
    b = lbop.lb_cartesian(f, 2.5 * u, sig)
    assert abs(complex(a) - complex(b)) < 1e-8 * max(1.0, abs(complex(a)))


@given(st.integers(0, 10**6))
def test_generator_antisymmetry(seed):
    rng = np.random.default_rng(seed)
    u = rng.normal(size=4)
    f = lbop.test_fields(4, EUCLID)[5]
    assert np.isclose(lbop.generator_apply(1, 3, f, u, EUCLID), -lbop.generator_apply(3, 1, f, u, EUCLID))
