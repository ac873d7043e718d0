import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cparticle import coords, lbop
from cparticle.coords import Domain, LightConeError, OriginError, SphericalPoint
from cparticle.core import EUCLID, MINKOWSKI

CASES = [(D, sig, dom) for D in range(2, 7) for sig in (EUCLID, MINKOWSKI)
         for dom in coords.domains_for(sig) if not (D == 2 and dom is Domain.MZERO)]


def test_frozen_chart_values():
    u = coords.to_cartesian(SphericalPoint(2.0, (math.pi / 2,), Domain.EUCLID, EUCLID))
    assert np.allclose(u, [0.0, 2.0])
    u = coords.to_cartesian(SphericalPoint(1.0, (0.5,), Domain.MPLUS, MINKOWSKI))
    assert np.allclose(u, [math.cosh(0.5), math.sinh(0.5)])
    u = coords.to_cartesian(SphericalPoint(1.0, (0.5,), Domain.MZERO, MINKOWSKI))
    assert np.allclose(u, [math.sinh(0.5), -math.cosh(0.5)])
    p = coords.from_cartesian([2.0, 1.0], MINKOWSKI)
    assert p.domain is Domain.MPLUS
    assert math.isclose(p.r, math.sqrt(3.0))
    assert math.isclose(p.angles[0], math.atanh(0.5))


def test_domain_sign():
    assert Domain.MPLUS.s == Domain.MMINUS.s == -1
    assert Domain.MZERO.s == Domain.EUCLID.s == 1
    assert coords.classify_domain([-2.0, 1.0], MINKOWSKI) is Domain.MMINUS
    assert coords.classify_domain([1.0, 2.0], MINKOWSKI) is Domain.MZERO


def test_chart_errors():
    with pytest.raises(LightConeError):
        coords.from_cartesian([1.0, 1.0], MINKOWSKI)
    with pytest.raises(OriginError):
        coords.from_cartesian([0.0, 0.0, 0.0], EUCLID)
    with pytest.raises(ValueError):
        SphericalPoint(1.0, (0.1,), Domain.EUCLID, MINKOWSKI)
    with pytest.raises(ValueError):
        SphericalPoint(-1.0, (0.1,), Domain.EUCLID, EUCLID)


@pytest.mark.parametrize("D,sig,dom", CASES)
def test_roundtrip_and_identities(D, sig, dom, rng):
    for _ in range(20):
        p = coords.random_point(rng, D, sig, dom)
        u = coords.to_cartesian(p)
        q = coords.from_cartesian(u, sig)
        assert q.domain is dom
        assert np.allclose(coords.to_cartesian(q), u, atol=1e-10)
        assert math.isclose(abs(coords.core.dot(u, u, sig)), p.r**2, rel_tol=1e-10)
        res = coords.identity_residuals(p)
        assert res["first_pair"] < 1e-12 and res["partial_sum"] < 1e-10


@pytest.mark.parametrize("D,sig,dom", [c for c in CASES if c[0] <= 4])
def test_partial_u_matches_chain_rule(D, sig, dom, rng):
    g = lbop.pullback(lbop.test_fields(D, sig)[6], dom)

    def f(r, a):
        return r * r * r * g(r, a)

    for _ in range(10):
        p = coords.random_point(rng, D, sig, dom)
        for m in range(D):
            a = complex(coords.partial_u(f, m, p))
            b = complex(coords.partial_u_oracle(f, m, p))
            assert abs(a - b) <= 1e-9 * max(1.0, abs(b))


@given(st.integers(2, 6), st.sampled_from(["euclid", "minkowski"]), st.integers(0, 10**6))
def test_chart_is_isometric_in_radius(D, sname, seed):
    # scaling r scales u linearly and leaves the domain and angles alone
    sig = coords.core.Signature.parse(sname)
    rng = np.random.default_rng(seed)
    p = coords.random_point(rng, D, sig)
    if D == 2 and p.domain is Domain.MZERO:
        return
    q = SphericalPoint(3.0 * p.r, p.angles, p.domain, sig)
    assert np.allclose(coords.to_cartesian(q), 3.0 * coords.to_cartesian(p))
    assert coords.classify_domain(coords.to_cartesian(q), sig) is p.domain
