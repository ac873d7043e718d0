"""Separation of variables for Delta_LB Psi = lambda Psi.

Psi = G(theta_1) * prod_m M_m with M_1 = exp(i n_1 theta_{D-1}),
M_m = S_{D-m}^{n_m} and G = S_1^p (first kind) or
G' = S_1^p * int S_1^{-2p-D+2} d theta_1 (second kind).

Eigenvalue bookkeeping is exact (ints, Fractions, sympy); only the
eigenfunction evaluators are floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
import math

import numpy as np
import sympy as sp
from scipy import integrate

from . import core
from .coords import Domain, SingularChartError, first_pair, random_point
from .core import DEFAULT_TOL, DimensionError, Dual, Signature, Tolerances
from .lbop import lb_spherical


class Branch(str, Enum):
    PLUS = "p=l"          # p = ell
    MINUS = "p=-l-D+3"    # p = -ell - D + 3

    def p(self, D: int, ell: int) -> int:
        return ell if self is Branch.PLUS else -ell - D + 3


class FactorKind(str, Enum):
    FIRST = "first"    # G = S_1^p
    SECOND = "second"  # G' via quadrature


@dataclass(frozen=True)
class SeparationChain:
    D: int
    sig: Signature
    n: tuple          # n_1 .. n_{D-2}
    c: tuple          # c_1 .. c_{D-2}
    p: int
    lam: int
    s: int = -1       # sign of u.u of the chart domain

    def residuals(self) -> dict:
        """Exact residuals of the chain relations; all zero for a valid chain."""
        n, c, s, D, p = self.n, self.c, self.s, self.D, self.p
        out = {"n1": n[0] ** 2 + s * c[0]}
        for m in range(1, D - 2):
            nm1 = n[m]  # n_{m+1}
            out[f"c{m}_next"] = c[m - 1] + s * nm1 * (nm1 + m - 1)
        for m in range(2, D - 1):
            out[f"c{m}_self"] = c[m - 1] + s * n[m - 1] * (n[m - 1] + m - 1)
        out["cD-2"] = c[-1] + s * p * (p + D - 3)
        out["lambda"] = self.lam + p * (p + D - 2)
        return out


def eigenvalue(D: int, ell: int, branch: Branch) -> int:
    p = branch.p(D, ell)
    return -p * (p + D - 2)


def solve_chain(D: int, sig: Signature, ell: int, s: int | None = None):
    """Both chains (p = ell, p = -ell-D+3) for given D >= 3 and ell >= 0."""
    if D < 3:
        raise DimensionError("separation chain needs D >= 3; use eigenvalues_2d")
    if ell < 0 or int(ell) != ell:
        raise ValueError("ell must be a non-negative integer")
    sig = Signature.parse(sig)
    if s is None:
        s = 1 if sig.is_euclid else -1
    n = (ell,) * (D - 2)
    c = tuple(-s * ell * (ell + m - 1) for m in range(1, D - 1))
    out = {}
    for br in Branch:
        p = br.p(D, ell)
        out[br] = SeparationChain(D, sig, n, c, p, -p * (p + D - 2), s)
    return out


def chain_symmetry_residuals(D: int):
    """Chain relations under n_m -> -(n_m + m - 1), symbolically.

    Returns the list of (relation, original - replaced) differences; all are
    identically zero.
    """
    n = sp.symbols(f"n1:{D - 1}")
    out = []

    def rel_next(m, nn):
        return nn[m] * (nn[m] + m - 1)      # n_{m+1}(n_{m+1}+m-1)

    def rel_self(m, nn):
        return nn[m - 1] * (nn[m - 1] + m - 1)

    for m in range(1, D - 1):
        repl = {n[m - 1]: -(n[m - 1] + m - 1)}
        out.append((f"self m={m}", sp.expand(rel_self(m, n) - rel_self(m, n).subs(repl, simultaneous=True))))
    for m in range(1, D - 2):
        repl = {n[m]: -(n[m] + m)}
        out.append((f"next m={m}", sp.expand(rel_next(m, n) - rel_next(m, n).subs(repl, simultaneous=True))))
    return out


# ---------------------------------------------------------------------------
# two dimensions


@dataclass(frozen=True)
class Family2D:
    sig: Signature

    def eigenvalue(self, L):
        """lambda = eta00 m^2 with m = iL."""
        if self.sig.is_euclid:
            if int(L) != L:
                raise ValueError("Euclid D=2 needs integer L (single-valuedness)")
            return -int(L) ** 2
        return L * L

    def contains(self, lam) -> bool:
        lam = Fraction(lam)
        if self.sig.is_euclid:
            if lam > 0 or lam.denominator != 1:
                return False
            k = -lam.numerator
            return math.isqrt(k) ** 2 == k
        return lam >= 0

    @property
    def descriptor(self) -> str:
        return "{-L^2 : L in Z}" if self.sig.is_euclid else "{L^2 : L in R}"


def eigenvalues_2d(sig) -> Family2D:
    return Family2D(Signature.parse(sig))


# ---------------------------------------------------------------------------
# admissibility


@dataclass(frozen=True)
class Verdict:
    admissible: bool
    reason: str

    def __bool__(self):
        return self.admissible


def growth_exponents(D: int, p: int, kind: FactorKind):
    """Leading power of the first-angle factor near the chart origin and, for
    the pseudo-sphere, the exponential rate at tau -> infinity."""
    if kind is FactorKind.FIRST:
        return p, p
    # S^p * int S^{-2p-D+2} ~ theta^{p} theta^{-2p-D+3}
    return -p - D + 3, -p - D + 2


def admissibility(D: int, sig: Signature, ell: int, branch: Branch, kind: FactorKind) -> Verdict:
    sig = Signature.parse(sig)
    p = branch.p(D, ell)
    origin, infinity = growth_exponents(D, p, kind)
    if sig.is_euclid:
        if origin < 0:
            return Verdict(False, f"blows up at theta_1 -> 0 like theta^{origin}")
        return Verdict(True, f"bounded at origin (theta^{origin})")
    # pseudo-sphere: bounded both at tau -> 0 and tau -> infinity
    if infinity != 0 and kind is FactorKind.SECOND:
        return Verdict(False, f"grows like exp({infinity} tau)")
    if kind is FactorKind.FIRST and origin != 0:
        side = "origin" if origin < 0 else "infinity"
        return Verdict(False, f"S_1^{p} unbounded at {side}")
    return Verdict(True, "bounded at origin and infinity")


# ---------------------------------------------------------------------------
# eigenfunctions


def _antiderivative(t: Dual, integrand, ref: float) -> Dual:
    """Dual-lifted int_ref^t integrand; value by adaptive quadrature."""
    tv = np.real(np.asarray(t.v, dtype=complex))
    flat = np.atleast_1d(tv)
    vals = np.empty(flat.shape)
    for i, x in enumerate(flat):
        vals[i] = integrate.quad(lambda y: float(np.real(integrand(y))), ref, x, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    vals = vals.reshape(np.shape(tv))
    (w,) = Dual.variables([tv])
    iw = integrand(w)
    return core._lift(t, vals, iw.v, iw.g[..., 0])


@dataclass(frozen=True)
class EigenSolution:
    D: int
    sig: Signature
    ell: int | float
    branch: Branch | None
    kind: FactorKind
    lam: int | float
    verdict: Verdict
    chain: SeparationChain | None = None
    n1: int | float = 0

    @property
    def admissible(self) -> bool:
        return self.verdict.admissible

    @property
    def p(self):
        return None if self.branch is None else self.branch.p(self.D, int(self.ell))

    def reference(self, domain: Domain) -> float:
        """Lower limit of the second-kind integral.  On the sphere it is the
        chart origin whenever the integrand is integrable there, which is the
        choice the origin growth exponent assumes."""
        if domain is not Domain.EUCLID:
            return 1.0
        if self.kind is FactorKind.SECOND and self.p is not None and -2 * self.p - self.D + 2 > -1:
            return 0.0
        return math.pi / 2

    def field(self, domain: Domain):
        """Evaluator f(r, angles) usable with duals and with lb_spherical."""
        D = self.D

        if D == 2:
            L = self.ell
            return lambda r, a: core.exp(1j * L * a[0])

        p = self.p
        n1 = self.n1
        ell = int(self.ell)
        kind = self.kind
        ref = self.reference(domain)

        def f(r, a):
            s1 = first_pair(a[0], domain)[1]
            G = s1**p
            if kind is FactorKind.SECOND:
                q = -2 * p - D + 2
                G = G * _antiderivative(a[0], lambda t: first_pair(t, domain)[1] ** q, ref)
            psi = G * core.exp(1j * n1 * a[D - 2])
            for m in range(2, D - 1):
                psi = psi * core.sin(a[D - m - 1]) ** ell
            return psi

        return f


def eigenfunction_eval(sol: EigenSolution, pt) -> complex:
    """Psi at a SphericalPoint (complex; take .real / .imag for the parts)."""
    if not sol.admissible:
        raise ValueError(f"inadmissible solution: {sol.verdict.reason}")
    f = sol.field(pt.domain)
    angles = [float(x) for x in pt.angles]
    if sol.D > 2 and abs(first_pair(angles[0], pt.domain)[1]) < 1e-14:
        raise SingularChartError("S_1 vanishes")
    X = Dual.variables([pt.r, *angles])
    return complex(core.value(f(X[0], X[1:])))


def solutions(D: int, sig, ell_max: int = 16, n1_sign: int = 1):
    """All (ell, branch, kind) solutions up to ell_max, admissible or not."""
    sig = Signature.parse(sig)
    out = []
    if D == 2:
        fam = eigenvalues_2d(sig)
        for L in range(0, ell_max + 1):
            out.append(EigenSolution(2, sig, L, None, FactorKind.FIRST, fam.eigenvalue(L), Verdict(True, "single-valued, bounded")))
        return out
    for ell in range(ell_max + 1):
        chains = solve_chain(D, sig, ell)
        for br in Branch:
            for kind in FactorKind:
                lam = eigenvalue(D, ell, br)
                v = admissibility(D, sig, ell, br, kind)
                out.append(EigenSolution(D, sig, ell, br, kind, lam, v, chains[br], n1_sign * ell))
    return out


def admissible_spectrum(D: int, sig, ell_max: int = 16) -> set:
    """Set of admissible eigenvalues found by enumerating solutions."""
    return {s.lam for s in solutions(D, sig, ell_max) if s.admissible}


def catalog(D: int, sig, ell_max: int = 16) -> set:
    """Eigenvalue catalog written in closed form (finite part up to ell_max)."""
    sig = Signature.parse(sig)
    if D == 2:
        return {eigenvalues_2d(sig).eigenvalue(L) for L in range(ell_max + 1)}
    if sig.is_euclid:
        return {-(ell - 1) * (ell + D - 3) for ell in range(ell_max + 1)}
    return {0}


# ---------------------------------------------------------------------------
# critical dimension


_ELL = sp.Symbol("ell", integer=True, nonnegative=True)


def _nonneg_int_roots(poly) -> list[int]:
    poly = sp.Poly(sp.expand(poly), _ELL)
    if poly.is_zero:
        raise ValueError("identically satisfied")
    roots = sp.roots(poly, filter=None)
    return sorted(int(r) for r in roots if r.is_integer and r >= 0)


@dataclass
class CriticalDimResult:
    sig: Signature
    dims: list
    witnesses: dict = field(default_factory=dict)
    bound: int = 32


def critical_dimensions(sig, bound: int = 32) -> CriticalDimResult:
    """Integer D in [2, bound] with D(D-4)/4 in the admissible spectrum."""
    sig = Signature.parse(sig)
    res = CriticalDimResult(sig, [], {}, bound)
    for D in range(2, bound + 1):
        target = Fraction(D * (D - 4), 4)
        if D == 2:
            fam = eigenvalues_2d(sig)
            if fam.contains(target):
                L = math.isqrt(int(abs(target)))
                res.dims.append(D)
                res.witnesses[D] = {"L": L, "lambda": str(target)}
            continue
        found = None
        for br in Branch:
            for kind in FactorKind:
                p = br.p(D, _ELL)
                lam = -p * (p + D - 2)
                for ell in _nonneg_int_roots(4 * lam - D * (D - 4)):
                    if admissibility(D, sig, ell, br, kind) and found is None:
                        found = {"ell": ell, "branch": br.value, "kind": kind.value, "lambda": str(target)}
        if found:
            res.dims.append(D)
            res.witnesses[D] = found
    return res


# ---------------------------------------------------------------------------
# numerical sweeps


def sample_points(rng, D: int, sig: Signature, domain: Domain, n: int):
    pts = [random_point(rng, D, sig, domain) for _ in range(n)]
    r = np.array([p.r for p in pts])
    angles = [np.array([p.angles[k] for p in pts]) for k in range(D - 1)]
    return r, angles


def residual(sol: EigenSolution, rng, domain: Domain, n: int = 50, tol: Tolerances = DEFAULT_TOL) -> float:
    """max |Delta Psi - lambda Psi| / max |Psi| over n random points."""
    r, angles = sample_points(rng, sol.D, sol.sig, domain, n)
    f = sol.field(domain)
    lap = lb_spherical(f, (r, angles, domain, sol.sig), tol)
    X = Dual.variables([r, *angles])
    psi = core.value(f(X[0], X[1:]))
    scale = max(np.max(np.abs(psi)), 1e-300)
    return float(np.max(np.abs(lap - sol.lam * psi)) / scale)


def boundedness_probe(sol: EigenSolution, domain: Domain, far: float = 25.0, eps: float = 1e-6) -> dict:
    """|Psi| of the first-angle factor near the ends of its range."""
    if sol.D == 2:
        return {}
    f = sol.field(domain)
    D = sol.D
    rest = [math.pi / 2] * (D - 3) + [0.3]
    ends = [eps, math.pi - eps] if domain is Domain.EUCLID else [eps, far]
    if domain is Domain.MZERO:
        ends = [-far, far]
    out = {}
    for t in ends:
        X = Dual.variables([1.0, t, *rest])
        out[t] = abs(complex(core.value(f(X[0], X[1:]))))
    return out


def exhaustiveness_scan(D: int, sig, nmin: int = -6, nmax: int = 6, seed: int = 0, tol: float = 1e-7):
    """Brute force over monomial ansaetze exp(i n1 theta_{D-1}) prod S^{n_m} S_1^p.

    For each exponent tuple the ratio Delta Psi / Psi is sampled; tuples with
    a constant ratio are eigenfunctions.  Boundedness is probed numerically
    near the ends of every angular range.  Returns the set of eigenvalues of
    bounded monomial eigenfunctions.
    """
    sig = Signature.parse(sig)
    if D < 3:
        raise DimensionError("scan needs D >= 3")
    rng = np.random.default_rng(seed)
    doms = [Domain.EUCLID] if sig.is_euclid else [Domain.MPLUS]
    rngs = np.arange(nmin, nmax + 1)
    grids = np.meshgrid(*([rngs] * (D - 1)), indexing="ij")
    exps = [g.ravel().astype(float) for g in grids]  # n1, n2..n_{D-2}, p
    K = 4
    found = set()
    for dom in doms:
        _, angles = sample_points(rng, D, sig, dom, K)
        A = [np.repeat(a[None, :], exps[0].size, axis=0) for a in angles]
        E = [e[:, None] for e in exps]

        def mono(r, a):
            psi = core.exp(1j * E[0] * a[D - 2])
            for m in range(2, D - 1):
                psi = psi * core.sin(a[D - m - 1]) ** E[m - 1]
            return psi * first_pair(a[0], dom)[1] ** E[D - 2]

        r = np.ones_like(A[0])
        lap = lb_spherical(mono, (r, A, dom, sig), check_radial=False)
        X = Dual.variables([r, *A])
        psi = core.value(mono(X[0], X[1:]))
        ratio = lap / psi
        const = np.all(np.abs(ratio - ratio[:, :1]) <= tol * (1 + np.abs(ratio[:, :1])), axis=1)
        for idx in np.nonzero(const)[0]:
            ex = [e[idx] for e in exps]
            if _monomial_bounded(D, dom, ex):
                lam = ratio[idx, 0]
                found.add(int(round(float(np.real(lam)))))
    return found


def _monomial_bounded(D, dom, ex, eps=1e-6, far=25.0) -> bool:
    """Probe each factor of a monomial near the ends of its angle range."""
    n1, *mid, p = ex
    if any(m < 0 for m in mid):  # sin^m blows up at 0 for m < 0
        vals = [math.sin(eps) ** m for m in mid]
        if max(vals) > 1e3:
            return False
    ends = [eps, math.pi - eps] if dom is Domain.EUCLID else [eps, far]
    for t in ends:
        v = abs(float(first_pair(t, dom)[1])) ** p
        if v > 1e3:
            return False
    return True
