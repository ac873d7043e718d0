import csv
import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cparticle import core, dynamics
from cparticle.core import EUCLID, MINKOWSKI
from cparticle.dynamics import LagrangianState


def test_lagrangian_frozen():
    assert dynamics.lagrangian(LagrangianState([1, 0], [2, 0], 1.0, 0.5, EUCLID)) == 4.0
    assert dynamics.lagrangian(LagrangianState([1, 0], [1, 1j], 1.0, 0.5, EUCLID)) == 0.0


def test_kinetic_split_frozen():
    # (1+2i)^2 / 2(1+i) + c.c. = 1/2
    k = dynamics.kinetic_split(LagrangianState([1, 0], [1 + 2j, 0], 1 + 1j, 0.0, EUCLID))
    assert k == {"value": 0.5, "coef_real": 0.5, "coef_imag": -0.5, "coef_cross": 1.0}


@given(st.integers(0, 10**6))
def test_kinetic_split_matches_lagrangian(seed):
    rng = np.random.default_rng(seed)
    D = int(rng.integers(2, 6))
    sig = EUCLID if seed % 2 else MINKOWSKI
    s = LagrangianState(rng.normal(size=D), rng.normal(size=D) + 1j * rng.normal(size=D),
                        complex(rng.normal(), rng.normal()) + 0.1, 0.0, sig)
    assert np.isclose(dynamics.kinetic_split(s)["value"], dynamics.lagrangian(s))


def test_state_validation():
    with pytest.raises(dynamics.ZeroEinbein):
        LagrangianState([1, 0], [1, 0], 0.0, 1.0, EUCLID)
    with pytest.raises(core.DimensionError):
        LagrangianState([1, 0], [1, 0, 0], 1.0, 1.0, EUCLID)
    st0 = LagrangianState([1, 0], [1, 0], 1.0, 1.0, EUCLID)
    with pytest.raises(dynamics.StepError):
        dynamics.integrate(st0, step=0.0)
    with pytest.raises(dynamics.TimeComponentZero):
        dynamics.velocity_conditions([0, 1, 0], 1.0)


@given(st.integers(0, 10**6))
def test_global_charge_two_readings_are_negatives(seed):
    rng = np.random.default_rng(seed)
    s = LagrangianState(rng.normal(size=3) + 1j * rng.normal(size=3), rng.normal(size=3) + 1j * rng.normal(size=3),
                        complex(1.0, rng.normal()), float(rng.uniform(0.1, 2)), MINKOWSKI)
    assert np.isclose(dynamics.global_charge(s), -dynamics.global_charge_canonical(s))


def test_null_state_constraints_preserved(rng):
    st0 = dynamics.null_initial_state(rng, 4, 0.8, g=1.0 + 0.2j)
    ell, _, ell0 = dynamics.constraints(st0)
    assert abs(ell) < 1e-12 and abs(ell0) < 1e-12
    tr = dynamics.integrate(st0)
    d = tr.drift()
    assert max(d.values()) < 1e-10


def test_varying_einbein(rng):
    st0 = dynamics.null_initial_state(rng, 4, 0.8, g=1.0 + 0.2j)
    tr = dynamics.integrate(st0, lambda t: (1.0 + 0.2j) * (1 + 0.3 * core.sin(2 * t)))
    d = tr.drift()
    assert d["ell"] < 1e-10 and d["ell0"] < 1e-10 and d["momentum"] < 1e-10


def test_closed_form_against_rk4():
    sol = dynamics.closed_form(np.array([0.3, 0, 1j, 0]), np.array([1.0, 1.0, 0, 0]), 1 + 0.5j, 0.7, MINKOWSKI)
    s0 = LagrangianState(sol.z(0.0), sol.w(0.0), sol.g, sol.kappa, MINKOWSKI)
    tr = dynamics.integrate(s0)
    err = max(np.max(np.abs(tr.z[i] - sol.z(t))) for i, t in enumerate(tr.tau))
    assert err < 1e-10
    assert sol.el_residual(0.4) < 1e-12
    vc = dynamics.velocity_conditions(sol.z0, sol.kappa)
    assert vc["pass"]


def test_velocity_conditions_fail_off_cone():
    assert not dynamics.velocity_conditions([1.0, 0.5, 0.0], 1.0)["pass"]


def test_free_particle_kappa_zero(rng):
    st0 = dynamics.null_initial_state(rng, 3, 0.0)
    tr = dynamics.integrate(st0, tau_span=(0.0, 0.5))
    assert "first_integral" not in tr.drift()
    assert np.allclose(tr.w, tr.w[0])


def test_csv_export(rng):
    tr = dynamics.integrate(dynamics.null_initial_state(rng, 3, 0.5), tau_span=(0.0, 0.01), step=1e-3)
    rows = list(csv.reader(io.StringIO(tr.to_csv())))
    assert rows[0][0] == "tau" and rows[0][-1] == "p_drift"
    assert len(rows) == 12


@given(st.integers(0, 10**6))
def test_gauge_identity_on_random_paths(seed):
    rng = np.random.default_rng(seed)
    sig = EUCLID if seed % 2 else MINKOWSKI
    path = dynamics.random_path(rng, int(rng.integers(2, 6)), sig, float(rng.uniform(0.1, 2.0)))
    rep = dynamics.gauge_variation(path, dynamics.random_params(rng))
    assert rep.residual <= 1e-9 * max(1.0, abs(rep.deltaL_direct))


@given(st.integers(0, 10**6))
def test_gauge_conditions_make_variation_total(seed):
    rng = np.random.default_rng(seed)
    path = dynamics.random_path(rng, 4, MINKOWSKI, float(rng.uniform(0.1, 2.0)))
    eps = rng.normal(size=7) + 1j * rng.normal(size=7)
    rep = dynamics.gauge_variation(path, dynamics.gauge_params(path, eps, float(rng.normal())))
    assert rep.non_total <= 1e-9 * max(1.0, abs(rep.deltaL_direct))


def test_random_params_not_total(rng):
    # negative control: arbitrary (eps0, xi) leave a non-total remainder
    path = dynamics.random_path(rng, 4, MINKOWSKI, 1.0)
    rep = dynamics.gauge_variation(path, dynamics.random_params(rng))
    assert rep.non_total > 1e-3
