"""Laplace-Beltrami operator on S^{D-1} and S^{1,D-2}.

Two independent realisations:

* :func:`lb_cartesian` -- the expanded Cartesian form
  ``s r^2 box f - (D-1) u.grad f - u.Hess(f).u``;
* :func:`lb_spherical` -- the angular closed form
  ``sum_n sigma_n / P_{n-1}^2  S_n^{n+1-D} d_n S_n^{D-n-1} d_n f``.

plus the sum over rotation generators (:func:`lb_generator_sum`), used as an
oracle for both, and the residual of the d'Alembert/LB split.

Generators are handled as real operators L^{mu nu} = u^mu d^nu - u^nu d^mu;
the physical ell^{mu nu} = -i L^{mu nu}, so Delta_LB = +1/2 L_{mu nu} L^{mu nu}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy as sp

from . import core
from .coords import (
    Domain,
    LightConeError,
    SingularChartError,
    SphericalPoint,
    d_first_sine,
    trig,
)
from .core import DEFAULT_TOL, Dual, Signature, Tolerances


class RadialDependenceError(ValueError):
    pass


@dataclass(frozen=True)
class ScalarField:
    """A field given by an evaluator written with :mod:`cparticle.core` math.

    ``representation`` is ``"cartesian"`` (evaluator(u_list)) or
    ``"spherical"`` (evaluator(r, angles)).
    """

    evaluator: Callable
    representation: str = "cartesian"
    name: str = ""

    def __call__(self, *args):
        return self.evaluator(*args)


def cartesian(fn, name="") -> ScalarField:
    return ScalarField(fn, "cartesian", name)


def spherical(fn, name="") -> ScalarField:
    return ScalarField(fn, "spherical", name)


def pullback(f: ScalarField, domain: Domain) -> ScalarField:
    """Cartesian field composed with the chart of ``domain``."""
    from .coords import cartesian_components

    return spherical(lambda r, a: f(cartesian_components(r, a, domain)), f.name)


def _evaluate(f, u) -> Dual:
    """Seed duals at u (shape (D,) or (D, N)) and evaluate f."""
    U = Dual.variables(list(u))
    F = f(U)
    if not isinstance(F, Dual):
        F = U[0]._const(np.broadcast_to(F, np.shape(U[0].v)))
    return F


def _check_off_cone(u, sig, tol):
    q = np.einsum("i...,i...->...", sig.metric(u.shape[0]).reshape((-1,) + (1,) * (u.ndim - 1)) * u, u)
    if np.any(np.abs(q) < tol.abs_tol):
        raise LightConeError("point on the light cone")
    return np.sign(q)


def generator_apply(mu: int, nu: int, f, u, sig: Signature):
    """Coefficient c with ell^{mu nu} f = i c at u (f real)."""
    if mu == nu:
        raise ValueError("mu == nu")
    u = np.asarray(u, dtype=float)
    F = _evaluate(f, u)
    e = sig.metric(u.shape[0])
    G = np.moveaxis(F.g, -1, 0)
    Lf = u[mu] * e[nu] * G[nu] - u[nu] * e[mu] * G[mu]
    return -Lf


def _generator_squares(G, H, u, e):
    """Array L^{mu nu}(L^{mu nu} f) for all mu < nu, from gradient/Hessian."""
    D = u.shape[0]
    out = {}
    for mu in range(D):
        for nu in range(mu + 1, D):
            # d_a (L f) for every a
            dL = [
                (a == mu) * e[nu] * G[nu]
                + u[mu] * e[nu] * H[nu][a]
                - (a == nu) * e[mu] * G[mu]
                - u[nu] * e[mu] * H[mu][a]
                for a in range(D)
            ]
            out[mu, nu] = u[mu] * e[nu] * dL[nu] - u[nu] * e[mu] * dL[mu]
    return out


def lb_generator_sum(f, u, sig: Signature):
    """-1/2 ell_{mu nu} ell^{mu nu} f by explicit double generator application."""
    u = np.asarray(u, dtype=float)
    F = _evaluate(f, u)
    e = sig.metric(u.shape[0])
    G = np.moveaxis(F.g, -1, 0)
    H = np.moveaxis(np.moveaxis(F.h, -1, 0), -1, 0)
    total = 0
    for (mu, nu), val in _generator_squares(G, H, u, e).items():
        total = total + e[mu] * e[nu] * val
    return total


def lb_cartesian(f, u, sig: Signature, tol: Tolerances = DEFAULT_TOL):
    """Delta_LB f at u by the expanded Cartesian form.  ``u`` may be batched
    with shape (D, N)."""
    u = np.asarray(u, dtype=float)
    _check_off_cone(u, sig, tol)
    F = _evaluate(f, u)
    e = sig.metric(u.shape[0])
    G = np.moveaxis(F.g, -1, 0)
    H = np.moveaxis(np.moveaxis(F.h, -1, 0), -1, 0)
    D = u.shape[0]
    uu = sum(e[m] * u[m] ** 2 for m in range(D))  # = s r^2
    box = sum(e[m] * H[m][m] for m in range(D))
    radial1 = sum(u[m] * G[m] for m in range(D))
    radial2 = sum(u[m] * u[n] * H[m][n] for m in range(D) for n in range(D))
    return uu * box - (D - 1) * radial1 - radial2


def radial_parts(f, u, sig: Signature):
    """(r, d_r f, d_r^2 f) with d_r = u^mu d_mu / r."""
    u = np.asarray(u, dtype=float)
    F = _evaluate(f, u)
    e = sig.metric(u.shape[0])
    D = u.shape[0]
    G = np.moveaxis(F.g, -1, 0)
    H = np.moveaxis(np.moveaxis(F.h, -1, 0), -1, 0)
    r = np.sqrt(np.abs(sum(e[m] * u[m] ** 2 for m in range(D))))
    d1 = sum(u[m] * G[m] for m in range(D)) / r
    d2 = sum(u[m] * u[n] * H[m][n] for m in range(D) for n in range(D)) / r**2
    return r, d1, d2


def box(f, u, sig: Signature):
    u = np.asarray(u, dtype=float)
    F = _evaluate(f, u)
    e = sig.metric(u.shape[0])
    H = np.moveaxis(np.moveaxis(F.h, -1, 0), -1, 0)
    return sum(e[m] * H[m][m] for m in range(u.shape[0]))


def box_split_residual(f, u, sig: Signature, tol: Tolerances = DEFAULT_TOL):
    """|s box f - Delta_LB f / r^2 - r^{1-D} d_r (r^{D-1} d_r f)|.

    Delta_LB comes from the generator sum so the two sides are computed
    along different routes.
    """
    u = np.asarray(u, dtype=float)
    s = _check_off_cone(u, sig, tol)
    D = u.shape[0]
    r, d1, d2 = radial_parts(f, u, sig)
    lhs = s * box(f, u, sig)
    rhs = lb_generator_sum(f, u, sig) / r**2 + (D - 1) / r * d1 + d2
    return np.abs(lhs - rhs)


def lb_spherical(f, p, tol: Tolerances = DEFAULT_TOL, check_radial: bool = True):
    """Delta_LB f from the angular closed form.

    ``p`` is a :class:`SphericalPoint`, or a tuple ``(r, angles, domain, sig)``
    whose entries may be arrays for batched evaluation.  ``f`` is called as
    ``f(r, angles)`` and must not depend on r.
    """
    if isinstance(p, SphericalPoint):
        r, angles, domain, sig = p.r, list(p.angles), p.domain, p.sig
    else:
        r, angles, domain, sig = p
        angles = list(angles)
    D = len(angles) + 1
    X = Dual.variables([r, *angles])
    F = f(X[0], X[1:])
    if not isinstance(F, Dual):
        return np.zeros(np.shape(r))
    fr = F.g[..., 0]
    if check_radial and np.any(np.abs(fr) > tol.abs_tol * (1 + np.abs(F.v))):
        raise RadialDependenceError("field depends on r")
    tc = trig(angles, domain)
    s = domain.s
    total = 0
    for n in range(1, D):
        Pn = tc.P[n - 1]
        if D - n - 1 and np.any(np.abs(tc.S[n]) < tol.abs_tol):
            raise SingularChartError(f"S_{n} vanishes")
        dS = d_first_sine(angles[0], domain) if n == 1 else tc.C[n]
        sigma = sig.eta00 if n == 1 else s
        fn = F.g[..., n]
        fnn = F.h[..., n, n]
        total = total + sigma / Pn**2 * (fnn + (D - n - 1) * dS / tc.S[n] * fn)
    return total


# ---------------------------------------------------------------------------
# exact polynomial fields (sympy) for commutator and Casimir checks


def coordinate_symbols(D: int):
    return sp.symbols(f"u0:{D}", real=True)


def generator_poly(mu: int, nu: int, expr, D: int, sig: Signature):
    """Real generator L^{mu nu} applied to a sympy expression."""
    u = coordinate_symbols(D)
    e = sig.metric(D)
    return sp.expand(u[mu] * int(e[nu]) * sp.diff(expr, u[nu]) - u[nu] * int(e[mu]) * sp.diff(expr, u[mu]))


def lb_poly(expr, D: int, sig: Signature):
    """Generator-sum Laplace-Beltrami operator applied symbolically."""
    e = sig.metric(D)
    total = 0
    for mu in range(D):
        for nu in range(mu + 1, D):
            inner = generator_poly(mu, nu, expr, D, sig)
            total += int(e[mu] * e[nu]) * generator_poly(mu, nu, inner, D, sig)
    return sp.expand(total)


def poly_field(expr, D: int) -> ScalarField:
    """Evaluate a sympy polynomial on dual/array components."""
    u = coordinate_symbols(D)
    fn = sp.lambdify([u], expr, modules=[{"sqrt": core.sqrt, "exp": core.exp}, "math"])
    return cartesian(lambda comps: fn(list(comps)), str(expr))


def lorentz_commutator_rhs(mu, nu, rho, sig_, D, sig: Signature):
    """[L^{mu nu}, L^{rho sigma}] as a linear combination of generators:
    eta^{nu rho} L^{mu sigma} - eta^{mu rho} L^{nu sigma}
    - eta^{nu sigma} L^{mu rho} + eta^{mu sigma} L^{nu rho}.
    Returns a list of (coefficient, a, b) meaning coefficient * L^{ab}."""
    e = sig.metric(D)

    def eta(a, b):
        return float(e[a]) if a == b else 0.0

    terms = [
        (eta(nu, rho), mu, sig_),
        (-eta(mu, rho), nu, sig_),
        (-eta(nu, sig_), mu, rho),
        (eta(mu, sig_), nu, rho),
    ]
    return [(c, a, b) for c, a, b in terms if c != 0 and a != b]


# ---------------------------------------------------------------------------
# battery of r-independent test fields


def test_fields(D: int, sig: Signature) -> list[ScalarField]:
    """Ten smooth, homogeneous-of-degree-zero fields on R^D."""

    def rt(u):
        q = sig.eta00 * u[0] * u[0]
        for x in u[1:]:
            q = q + x * x
        return core.sqrt(q * np.sign(np.real(core.value(q))))

    last = D - 1
    fields = [
        cartesian(lambda u: u[0] / rt(u), "u0/r"),
        cartesian(lambda u: u[last] / rt(u), "u_last/r"),
        cartesian(lambda u: u[0] * u[last] / (rt(u) ** 2), "u0 u_last/r^2"),
        cartesian(lambda u: core.sin(u[last] / rt(u)), "sin(u_last/r)"),
        cartesian(lambda u: core.exp(0.3 * u[0] / rt(u)), "exp(0.3 u0/r)"),
        cartesian(lambda u: (u[0] + 2 * u[last]) ** 2 / rt(u) ** 2, "(u0+2u_last)^2/r^2"),
        cartesian(lambda u: core.cos(0.5 * u[0] / rt(u)) * u[last] / rt(u), "cos(u0/2r) u_last/r"),
        cartesian(lambda u: (u[last] / rt(u)) ** 3, "(u_last/r)^3"),
        cartesian(lambda u: u[D // 2] * u[last - 1 if D > 2 else 0] / rt(u) ** 2, "mixed bilinear/r^2"),
        cartesian(lambda u: 1.0 / (2.0 + u[last] / rt(u)) ** 2 if sig.is_euclid else
                  1.0 / (2.0 + core.sin(u[last] / rt(u))), "rational"),
    ]
    return fields
