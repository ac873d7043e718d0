"""Acceptance criteria 1-10.

Each test records one PASS/FAIL line, printed in the terminal summary.  The
report-based criteria read checks produced by two full ``cparticle all`` runs
(which criterion 10 compares byte for byte) and also assert that the check
inputs cover what the criterion asks for.
"""

import json
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from cparticle import poisson, quantum, spectrum
from cparticle.coords import Domain, domains_for
from cparticle.core import EUCLID, MINKOWSKI

SEED = 20240611
DIMS = range(2, 7)

# pinned tolerances
TOL_LB = 1e-6
TOL_EIGEN = 1e-8
TOL_DRIFT = 1e-8
TOL_VELOCITY = 1e-6
TOL_GAUGE = 1e-7
TOL_PHYSICAL = 1e-7


@pytest.fixture(scope="module")
def all_runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("all")
    env = {k: v for k, v in os.environ.items() if k != "CP_SEED"}
    out = []
    for name in ("a.json", "b.json"):
        path = d / name
        r = subprocess.run([sys.executable, "-m", "cparticle", "all", "--seed", str(SEED), "--output", str(path)],
                           env=env, capture_output=True, timeout=300)
        assert r.returncode in (0, 1), r.stderr.decode()
        out.append(path.read_bytes())
    return out


@pytest.fixture(scope="module")
def report(all_runs):
    return {c["id"]: c for c in json.loads(all_runs[0])["checks"]}


def _record(log, n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    log[n] = line
    print(line)
    assert ok, line


def _worst(checks):
    return max(c["actual"] for c in checks)


def test_criterion_01_critical_dimensions(acceptance_log):
    e = spectrum.critical_dimensions(EUCLID).dims
    m = spectrum.critical_dimensions(MINKOWSKI).dims
    ok = list(e) == [2, 4, 6] and list(m) == [4]
    _record(acceptance_log, 1, ok, f"euclid {list(e)}, minkowski {list(m)} (exact)")


def test_criterion_02_lb_equivalence(report, acceptance_log):
    checks = []
    for D in DIMS:
        for sig in (EUCLID, MINKOWSKI):
            for dom in domains_for(sig):
                c = report[f"lb.equivalence.D{D}.{sig}.{dom.name}"]
                assert c["inputs"]["n"] >= 100 and c["inputs"]["fields"] >= 10
                checks.append(c)
    worst = _worst(checks)
    ok = worst <= TOL_LB and all(c["pass"] for c in checks)
    _record(acceptance_log, 2, ok, f"{len(checks)} (D, signature, domain) cases, max rel diff {worst:.2e} <= {TOL_LB:g}")


def test_criterion_03_eigenfunction_residuals(acceptance_log):
    rng = np.random.default_rng(SEED)
    worst, count = 0.0, 0
    for D in DIMS:
        for sig in (EUCLID, MINKOWSKI):
            for sol in spectrum.solutions(D, sig, 5):
                if not sol.admissible:
                    continue
                for dom in domains_for(sig):
                    worst = max(worst, spectrum.residual(sol, rng, dom, 50))
                    count += 1
    ok = worst <= TOL_EIGEN and count > 0
    _record(acceptance_log, 3, ok, f"{count} solution x domain cases, 50 points each, max residual {worst:.2e} <= {TOL_EIGEN:g}")


def test_criterion_04_d3_euclid_spectrum(acceptance_log):
    got = spectrum.admissible_spectrum(3, EUCLID, 10)
    want = {-ell * (ell + 1) for ell in range(11)}
    _record(acceptance_log, 4, got == want, f"{sorted(got, reverse=True)} (exact)")


def test_criterion_05_poisson_algebra(report, acceptance_log):
    table = poisson.algebra_identities()
    mom = poisson.momentum_bracket()
    bad = [i.name for i in table + mom if not i.holds]
    assert not report["poisson.bracket_axioms"]["actual"]
    rng = np.random.default_rng(SEED)
    failed = 0
    for _ in range(50):
        res = poisson.bracket_axioms(*(poisson.random_polynomial(rng) for _ in range(3)))
        failed += sum(not v.is_zero() for v in res.values())
    ok = not bad and failed == 0
    _record(acceptance_log, 5, ok, f"{len(table) + len(mom)} identities exact, {len(bad)} failing; "
                                   f"50 random triples, {failed} axiom failures")


def test_criterion_06_commutators_and_brst(acceptance_log):
    table = quantum.commutator_check(6)
    br = quantum.brst_nilpotency(6)
    bad = [k for k, v in table.items() if v != 0]
    ok = not bad and br["divisible"] and br["vanish_at_critical"] and br["nonzero"]
    _record(acceptance_log, 6, ok, f"{len(table)} commutators on {len(quantum.basis_states(6))} states, {len(bad)} nonzero; "
                                   f"Q^2 divisible={br['divisible']} zero at D/4={br['vanish_at_critical']}")


def test_criterion_07_k_formula(acceptance_log):
    bad = [D for D in range(2, 33) if quantum.k_constant(D, Fraction(D, 4)) != Fraction(D * (D - 4), 4)]
    _record(acceptance_log, 7, not bad, f"D = 2..32, {len(bad)} mismatches (exact)")


def test_criterion_08_dynamics(report, acceptance_log):
    drift = report["dynamics.constraint_drift"]
    mom = report["dynamics.momentum_drift"]
    vel = report["dynamics.velocity_conditions"]
    gauge = report["dynamics.gauge_identity"]
    assert drift["inputs"]["step"] == 1e-3 and drift["inputs"]["tau"] == [0, 1]
    assert vel["inputs"]["states"] == 20 and gauge["inputs"]["pairs"] == 20
    ok = (drift["actual"] <= TOL_DRIFT and mom["actual"] <= TOL_DRIFT
          and vel["actual"] <= TOL_VELOCITY and gauge["actual"] <= TOL_GAUGE)
    _record(acceptance_log, 8, ok, f"constraint drift {drift['actual']:.1e}, momentum drift {mom['actual']:.1e}, "
                                   f"velocity {vel['actual']:.1e}, gauge {gauge['actual']:.1e}")


def test_criterion_09_physical_state(acceptance_log):
    rng = np.random.default_rng(SEED)
    k = np.array([1.3, 0.4, -0.2, 0.7])
    sols = [s for s in spectrum.solutions(4, MINKOWSKI, 3) if s.lam == 0 and s.admissible]
    worst = {"L1": 0.0, "L0": 0.0, "P": 0.0}
    for sol in sols:
        c = quantum.PhysicalStateCandidate(k=k, h=quantum.chart_field(sol.field, MINKOWSKI), D=4, sig=MINKOWSKI, kappa=0.9)
        for dom in (Domain.MPLUS, Domain.MMINUS, Domain.MZERO):
            res = quantum.physical_state_residuals(c, quantum.sample_z(rng, c, dom, 50))
            for key in worst:
                worst[key] = max(worst[key], res[key])
    ok = len(sols) >= 1 and max(worst.values()) <= TOL_PHYSICAL
    _record(acceptance_log, 9, ok, f"{len(sols)} lambda=0 states x 3 domains x 50 points, "
                                   + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_10_determinism(all_runs, acceptance_log):
    a, b = all_runs
    _record(acceptance_log, 10, a == b, f"two 'all' runs, seed {SEED}: {len(a)} bytes, identical={a == b}")
