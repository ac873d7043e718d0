"""Spherical and pseudo-spherical charts on R^D.

A point is written u^m = r C_{m+1} P_m with C_m = cos(theta_m),
S_m = sin(theta_m), P_m = S_1 ... S_m, P_0 = 1 and C_D = 1, S_D = 0.  For the
Minkowski metric the first pair is hyperbolic and depends on the domain::

    M+ : (C1, S1) = ( cosh t,  sinh t)
    M- : (C1, S1) = (-cosh t, -sinh t)
    M0 : (C1, S1) = ( sinh t, -cosh t)

Index 0 is always the distinguished axis; the Euclidean chart is the same code
path with eta00 = +1.

All the ``*_components`` helpers take and return plain lists so that they work
on floats, numpy arrays (batched) and :class:`~cparticle.core.Dual` objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import core
from .core import DEFAULT_TOL, Dual, Signature, Tolerances, dot


class Domain(str, Enum):
    EUCLID = "euclid"
    MPLUS = "M+"
    MMINUS = "M-"
    MZERO = "M0"

    @property
    def s(self) -> int:
        """sgn(u.u) inside the domain."""
        return -1 if self in (Domain.MPLUS, Domain.MMINUS) else 1


MINKOWSKI_DOMAINS = (Domain.MPLUS, Domain.MMINUS, Domain.MZERO)


class ChartError(ValueError):
    pass


class LightConeError(ChartError):
    pass


class OriginError(ChartError):
    pass


class SingularChartError(ChartError):
    pass


def domains_for(sig: Signature) -> tuple[Domain, ...]:
    return (Domain.EUCLID,) if sig.is_euclid else MINKOWSKI_DOMAINS


@dataclass(frozen=True)
class SphericalPoint:
    r: float
    angles: tuple
    domain: Domain
    sig: Signature = field(default=core.EUCLID)

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if (self.domain is Domain.EUCLID) != self.sig.is_euclid:
            raise ValueError("Euclid domain iff Euclid signature")
        if not self.r > 0:
            raise ValueError("radius must be positive")
        D = self.dim
        if D < 2:
            raise ValueError("need D >= 2")
        a = self.angles
        twopi = 2 * np.pi
        if D == 2:
            if self.sig.is_euclid and not 0 <= a[0] <= twopi:
                raise ValueError("theta_1 outside [0, 2pi]")
            return
        first = 0 if self.sig.is_euclid else 1
        for m in range(first, D - 2):
            if not 0 <= a[m] <= np.pi:
                raise ValueError(f"theta_{m + 1} outside [0, pi]")
        if not 0 <= a[D - 2] <= twopi:
            raise ValueError(f"theta_{D - 1} outside [0, 2pi]")

    @property
    def dim(self) -> int:
        return len(self.angles) + 1


def first_pair(t, domain: Domain):
    """(C1, S1) for the first angle of the chart."""
    if domain is Domain.EUCLID:
        return core.cos(t), core.sin(t)
    if domain is Domain.MPLUS:
        return core.cosh(t), core.sinh(t)
    if domain is Domain.MMINUS:
        return -core.cosh(t), -core.sinh(t)
    return core.sinh(t), -core.cosh(t)


def d_first_sine(t, domain: Domain):
    """d S1 / d theta_1  (= s eta00 C1)."""
    c1, _ = first_pair(t, domain)
    if domain is Domain.MZERO:
        return -c1
    return c1


@dataclass
class TrigCache:
    """C_m, S_m (m = 1..D, with C_D = 1, S_D = 0) and P_m (m = 0..D-1)."""

    C: list
    S: list
    P: list
    s: int

    @property
    def signs(self):
        """s_n = sgn(P_n) for plain numeric caches."""
        return [np.sign(np.real(core.value(p))) for p in self.P]


def trig(angles, domain: Domain) -> TrigCache:
    D = len(angles) + 1
    C = [None] * (D + 1)
    S = [None] * (D + 1)
    C[1], S[1] = first_pair(angles[0], domain)
    for k in range(2, D):
        C[k], S[k] = core.cos(angles[k - 1]), core.sin(angles[k - 1])
    C[D], S[D] = 1.0, 0.0
    P = [1.0]
    for m in range(1, D):
        P.append(P[-1] * S[m])
    return TrigCache(C, S, P, domain.s)


def cartesian_components(r, angles, domain: Domain) -> list:
    tc = trig(angles, domain)
    D = len(angles) + 1
    return [r * tc.C[m + 1] * tc.P[m] for m in range(D)]


def to_cartesian(p: SphericalPoint) -> np.ndarray:
    return np.array(cartesian_components(p.r, list(p.angles), p.domain), dtype=float)


def classify_domain(u, sig: Signature) -> Domain:
    """Which chart domain contains ``u``.  Light-cone points are ambiguous;
    ties go to M+/M- (the timelike closures are listed first)."""
    if sig.is_euclid:
        return Domain.EUCLID
    u = [float(core.value(x)) for x in u]
    q = float(dot(u, u, sig))
    if q <= 0:
        return Domain.MPLUS if u[0] >= 0 else Domain.MMINUS
    return Domain.MZERO


def _classify_strict(u, sig, tol):
    uv = [np.real(core.value(x)) for x in u]
    if all(abs(float(x)) < tol.abs_tol for x in uv):
        raise OriginError("u = 0")
    q = float(dot(uv, uv, sig))
    if abs(q) < tol.abs_tol:
        raise LightConeError("point on the light cone")
    return classify_domain(uv, sig)


def _wrap(t):
    return t + 2 * np.pi * (np.real(core.value(t)) < 0)


def spherical_components(u, sig: Signature, tol: Tolerances = DEFAULT_TOL):
    """Inverse chart on a list of components (floats or duals).

    Returns ``(r, angles, domain)``.  In M+/M- with D >= 3 the chart is a
    double cover (tau and -tau with reflected angles give the same point);
    the branch tau >= 0 is returned, mirroring 0 <= theta_1 <= pi in the
    Euclidean chart.
    """
    u = list(u)
    D = len(u)
    domain = _classify_strict(u, sig, tol)
    s = domain.s
    r = core.sqrt(s * dot(u, u, sig))
    rv = float(core.value(r))

    if D == 2:
        if domain is Domain.EUCLID:
            t = core.arctan2(u[1], u[0])
            return r, [_wrap(t)], domain
        if domain is Domain.MPLUS:
            return r, [core.arcsinh(u[1] / r)], domain
        if domain is Domain.MMINUS:
            return r, [core.arcsinh(-u[1] / r)], domain
        if float(core.value(u[1])) > 0:
            raise SingularChartError("D=2, M0 chart covers only u^1 < 0")
        return r, [core.arcsinh(u[0] / r)], domain

    # tail norms rho_n = sqrt(sum_{k >= n} u_k^2)
    rho = [None] * (D + 1)
    acc = 0.0
    for k in range(D - 1, 0, -1):
        acc = u[k] * u[k] + acc
        rho[k] = core.sqrt(acc)
    if float(core.value(rho[D - 2])) / rv < tol.abs_tol:
        raise SingularChartError("P_{D-2} vanishes at this point")

    if domain is Domain.EUCLID:
        first = core.arctan2(rho[1], u[0])
        sign = 1.0
    elif domain is Domain.MPLUS:
        first = core.arcsinh(rho[1] / r)
        sign = 1.0
    elif domain is Domain.MMINUS:
        first = core.arcsinh(rho[1] / r)
        sign = -1.0
    else:
        first = core.arcsinh(u[0] / r)
        sign = -1.0
    angles = [first]
    for n in range(2, D - 1):
        angles.append(core.arctan2(rho[n], sign * u[n - 1]))
    last = core.arctan2(sign * u[D - 1], sign * u[D - 2])
    angles.append(_wrap(last))
    return r, angles, domain


def from_cartesian(u, sig: Signature, tol: Tolerances = DEFAULT_TOL) -> SphericalPoint:
    r, angles, domain = spherical_components([float(x) for x in u], sig, tol)
    angles = [float(a) for a in angles]
    if len(angles) >= 1:
        a = angles[-1]
        if a >= 2 * np.pi:
            angles[-1] = a - 2 * np.pi
    return SphericalPoint(float(r), tuple(angles), domain, sig)


def identity_residuals(p: SphericalPoint) -> dict:
    """Residuals of eta00 C1^2 + S1^2 = s and of the partial-sum identity
    sum_{k=m}^{D-1} C_{k+1}^2 P_k^2 = P_m^2 (worst m)."""
    tc = trig(list(p.angles), p.domain)
    D = p.dim
    r15 = abs(p.sig.eta00 * tc.C[1] ** 2 + tc.S[1] ** 2 - tc.s)
    r16 = 0.0
    for m in range(1, D):
        lhs = sum(tc.C[k + 1] ** 2 * tc.P[k] ** 2 for k in range(m, D))
        r16 = max(r16, abs(lhs - tc.P[m] ** 2) / max(1.0, tc.P[m] ** 2))
    return {"first_pair": float(r15), "partial_sum": float(r16)}


def _seed(p: SphericalPoint):
    return Dual.variables([p.r, *p.angles])


def partial_u(f, m: int, p: SphericalPoint, tol: Tolerances = DEFAULT_TOL):
    """d f / d u_m (lower index) from the angular derivative formulas.

    ``f`` is a callable ``f(r, angles)`` written with :mod:`cparticle.core`
    functions so that it accepts duals.
    """
    D = p.dim
    if not 0 <= m < D:
        raise IndexError(m)
    X = _seed(p)
    F = f(X[0], X[1:])
    grad = np.asarray(F.g) if isinstance(F, Dual) else np.zeros(D)
    fr, fa = grad[0], grad[1:]  # fa[k-1] = d f / d theta_k
    tc = trig(list(p.angles), p.domain)
    r, s, eta = p.r, tc.s, p.sig.eta00
    if m == 0:
        return s * tc.C[1] * fr - eta * tc.S[1] / p.r * fa[0]
    for k in range(1, m + 1):
        if abs(tc.P[k]) < tol.abs_tol and k <= D - 2:
            raise SingularChartError(f"P_{k} vanishes")
    inner = s * fr
    for q in range(1, m + 1):
        inner = inner + tc.C[q] * tc.S[q] / (r * tc.P[q] ** 2) * fa[q - 1]
    out = tc.C[m + 1] * tc.P[m] * inner
    if m < D - 1:
        out = out - tc.S[m + 1] / (r * tc.P[m]) * fa[m]
    return out


def partial_u_oracle(f, m: int, p: SphericalPoint, tol: Tolerances = DEFAULT_TOL):
    """Same derivative by the chain rule through the inverse chart."""
    u = to_cartesian(p)
    U = Dual.variables(list(u))
    r, angles, _ = spherical_components(U, p.sig, tol)
    F = f(r, angles)
    g = np.asarray(F.g) if isinstance(F, Dual) else np.zeros(len(u))
    # d/du_m = eta^{mm} d/du^m
    return p.sig.metric(len(u))[m] * g[m]


def random_point(rng: np.random.Generator, D: int, sig: Signature, domain: Domain | None = None,
                 margin: float = 0.15, tau_max: float = 2.5, r_range=(0.5, 2.0)) -> SphericalPoint:
    """Random in-range chart point away from coordinate singularities."""
    if domain is None:
        domain = Domain.EUCLID if sig.is_euclid else MINKOWSKI_DOMAINS[rng.integers(3)]
    r = rng.uniform(*r_range)
    angles = []
    if D == 2:
        if sig.is_euclid:
            angles = [rng.uniform(0, 2 * np.pi)]
        else:
            angles = [rng.uniform(-tau_max, tau_max)]
        return SphericalPoint(r, tuple(angles), domain, sig)
    if sig.is_euclid:
        angles.append(rng.uniform(margin, np.pi - margin))
    elif domain is Domain.MZERO:
        angles.append(rng.uniform(-tau_max, tau_max))
    else:
        angles.append(rng.uniform(margin, tau_max))
    for _ in range(2, D - 1):
        angles.append(rng.uniform(margin, np.pi - margin))
    angles.append(rng.uniform(0, 2 * np.pi))
    return SphericalPoint(r, tuple(angles), domain, sig)
