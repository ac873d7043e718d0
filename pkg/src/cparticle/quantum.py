"""Operator realization of the constraint algebra.

Raw operators, with a = d + kappa zb and b = dbar - kappa z
([a^mu, b^nu] = -2 kappa eta^{mu nu}):

  L1 = -a.a / 4k,   L-1 = -b.b / 4k,   L0 = -b.a / 4k + alpha.

Conjugating by exp(kappa z.zb) (state = exp(-kappa z.zb) f) sends
a -> d and b -> dbar - 2 kappa z, so on f:

  L1 = -d.d / 4k
  L-1 = -(dbar.dbar - 4k z.dbar + 4k^2 z.z) / 4k
  L0 = -(dbar.d - 2k z.d) / 4k + alpha

Symbolic work uses contracted scalars (z.z, z.zb, a.z, ...) so D stays a
symbol; hermiticity uses explicit components and Wick moments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
import sympy as sp

from . import core
from .coords import Domain, random_point, spherical_components, to_cartesian
from .core import Dual, Signature
from .poisson import DIM, KAPPA, AlgebraViolation, dsym

ALPHA = sp.Symbol("alpha")

STATE_VECTORS = ("z", "zb", "a")


# ---------------------------------------------------------------------------
# contracted polynomials
#
# A CPoly is {exponent tuple: Fraction} over the generators
# (z.z, z.zb, zb.zb, a.z, a.zb, a.a, kappa, D, alpha); the kappa exponent may
# be negative.  sympy is too slow for the ~10^3 operator applications needed.

_DOTS = (("z", "z"), ("z", "zb"), ("zb", "zb"), ("a", "z"), ("a", "zb"), ("a", "a"))
GENS = tuple(dsym(x, y) for x, y in _DOTS) + (KAPPA, DIM, ALPHA)
_NG = len(GENS)
_IDX = {}
for _i, (_x, _y) in enumerate(_DOTS):
    _IDX[(_x, _y)] = _IDX[(_y, _x)] = _i
_IK, _ID, _IA = 6, 7, 8


def _unit(i, k=1):
    e = [0] * _NG
    e[i] = k
    return tuple(e)


class CPoly:
    __slots__ = ("t",)

    def __init__(self, t=None):
        self.t = {k: v for k, v in (t or {}).items() if v != 0}

    @classmethod
    def from_expr(cls, e) -> "CPoly":
        e = sp.expand(sp.sympify(e))
        out = {}
        for term in sp.Add.make_args(e):
            c, rest = term.as_coeff_Mul()
            exps = [0] * _NG
            for f in sp.Mul.make_args(rest):
                if f == 1:
                    continue
                b, p = f.as_base_exp()
                if b not in GENS:
                    raise ValueError(f"not a state generator: {b}")
                exps[GENS.index(b)] += int(p)
            k = tuple(exps)
            out[k] = out.get(k, 0) + Fraction(int(sp.numer(c)), int(sp.denom(c)))
        return cls(out)

    def to_expr(self) -> sp.Expr:
        return sp.Add(*[sp.Rational(c.numerator, c.denominator) * sp.Mul(*[g**p for g, p in zip(GENS, k)])
                        for k, c in self.t.items()])

    def __add__(self, o):
        t = dict(self.t)
        for k, v in o.t.items():
            t[k] = t.get(k, 0) + v
        return CPoly(t)

    def __neg__(self):
        return CPoly({k: -v for k, v in self.t.items()})

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c, mono=None) -> "CPoly":
        """c * GENS^mono * self."""
        c = Fraction(c)
        if mono is None:
            return CPoly({k: v * c for k, v in self.t.items()})
        return CPoly({tuple(a + b for a, b in zip(k, mono)): v * c for k, v in self.t.items()})

    def diff(self, i: int) -> "CPoly":
        out = {}
        for k, v in self.t.items():
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                out[tuple(kk)] = v * k[i]
        return CPoly(out)

    def __eq__(self, o):
        return isinstance(o, CPoly) and self.t == o.t

    def __hash__(self):
        return hash(frozenset(self.t.items()))

    def is_zero(self):
        return not self.t

    def __repr__(self):
        return f"CPoly({self.to_expr()})"


def _as_cpoly(F) -> CPoly:
    return F if isinstance(F, CPoly) else CPoly.from_expr(F)


def _mult(v, y):
    return 2 if v == y else 1


def lap(F, v: str, w: str) -> CPoly:
    """d_v . d_w F by the chain rule through the dot products."""
    F = _as_cpoly(F)
    out = CPoly()
    for x in STATE_VECTORS:
        Fx = F.diff(_IDX[(w, x)])
        if Fx.is_zero():
            continue
        mx = _mult(w, x)
        for y in STATE_VECTORS:
            Fxy = Fx.diff(_IDX[(v, y)])
            if not Fxy.is_zero():
                out = out + Fxy.scale(mx * _mult(v, y), _unit(_IDX[(y, x)]))
        if x == v:
            out = out + Fx.scale(mx, _unit(_ID))
    return out


def euler(F, x: str, v: str) -> CPoly:
    """x . d_v F."""
    F = _as_cpoly(F)
    out = CPoly()
    for y in STATE_VECTORS:
        Fy = F.diff(_IDX[(v, y)])
        if not Fy.is_zero():
            out = out + Fy.scale(_mult(v, y), _unit(_IDX[(x, y)]))
    return out


_INV4K = (Fraction(-1, 4), _unit(_IK, -1))


def L_conj(n: int, F, normalization: str = "closing") -> CPoly:
    """Conjugated-frame L_n with kappa, D, alpha symbolic.

    "printed" drops the 1/2kappa factors and uses the a.b ordering in L0;
    kept as a negative control, it does not close.
    """
    F = _as_cpoly(F)
    if n == 1:
        inner = lap(F, "z", "z")
    elif n == -1:
        inner = (lap(F, "zb", "zb") - euler(F, "z", "zb").scale(4, _unit(_IK))
                 + F.scale(4, tuple(a + b for a, b in zip(_unit(_IK, 2), _unit(_IDX[("z", "z")])))))
    elif n == 0:
        inner = lap(F, "z", "zb") - euler(F, "z", "z").scale(2, _unit(_IK))
    else:
        raise ValueError(n)
    if normalization == "closing":
        out = inner.scale(*_INV4K)
    elif normalization == "printed":
        if n == 0:
            inner = inner - F.scale(2, tuple(a + b for a, b in zip(_unit(_IK), _unit(_ID))))
            out = -inner
        else:
            out = inner.scale(Fraction(-1, 2))
    else:
        raise ValueError(normalization)
    if n == 0:
        out = out + F.scale(1, _unit(_IA))
    return out


@dataclass(frozen=True)
class GaussPolyState:
    """exp(-kappa z.zb) * poly; operators act on poly (conjugated frame)."""

    poly: CPoly

    @classmethod
    def of(cls, expr) -> "GaussPolyState":
        return cls(_as_cpoly(expr))

    def expr(self) -> sp.Expr:
        return self.poly.to_expr()


@dataclass(frozen=True)
class OperatorWord:
    """Product of primitives applied right to left, times ``coef``.

    Primitives: ("L", n), ("lap", v, w) = d_v.d_w, ("euler", x, v) = x.d_v,
    ("mul", x, y) = multiply by x.y, ("alpha",) = multiply by alpha.
    """

    factors: tuple
    coef: Fraction = Fraction(1)

    def __call__(self, F) -> CPoly:
        F = _as_cpoly(F)
        for f in reversed(self.factors):
            kind = f[0]
            if kind == "L":
                F = L_conj(f[1], F)
            elif kind == "lap":
                F = lap(F, f[1], f[2])
            elif kind == "euler":
                F = euler(F, f[1], f[2])
            elif kind == "mul":
                F = F.scale(1, _unit(_IDX[(f[1], f[2])]))
            elif kind == "alpha":
                F = F.scale(1, _unit(_IA))
            else:
                raise ValueError(kind)
        return F.scale(self.coef)

    def __mul__(self, o: "OperatorWord") -> "OperatorWord":
        return OperatorWord(self.factors + o.factors, self.coef * o.coef)


def L_word(n: int) -> OperatorWord:
    return OperatorWord((("L", n),))


def apply(op: OperatorWord, s: GaussPolyState) -> GaussPolyState:
    return GaussPolyState(op(s.poly))


def basis_states(max_degree: int = 6) -> list:
    """Monomials in z.z, z.zb, zb.zb, a.z, a.zb of total degree <= max_degree."""
    degs = (2, 2, 2, 1, 1)
    out = []

    def rec(i, deg, exps):
        if i == len(degs):
            out.append(CPoly({tuple(exps) + (0,) * (_NG - len(exps)): Fraction(1)}))
            return
        k = 0
        while deg + k * degs[i] <= max_degree:
            rec(i + 1, deg + k * degs[i], exps + [k])
            k += 1

    rec(0, 0, [])
    return out


def central_charge_term(F: CPoly) -> CPoly:
    """(alpha - D/4) F."""
    return F.scale(1, _unit(_IA)) - F.scale(Fraction(1, 4), _unit(_ID))


def commutator_check(max_degree: int = 6, raise_on_fail: bool = False, normalization: str = "closing") -> dict:
    """[L_n, L_m] - (n-m)(L_{n+m} - (alpha - D/4) delta_{n+m}) on the basis.

    Returns {(n, m): first nonzero residual as a sympy expression, or 0}.
    """
    out = {}
    basis = basis_states(max_degree)
    cache = {}

    def L(n, F):
        key = (n, F)
        if key not in cache:
            cache[key] = L_conj(n, F, normalization)
        return cache[key]

    for n, m in itertools.product((1, 0, -1), repeat=2):
        worst = sp.Integer(0)
        for F in basis:
            res = L(n, L(m, F)) - L(m, L(n, F))
            if abs(n + m) <= 1:
                rhs = L(n + m, F)
                if n + m == 0:
                    rhs = rhs - central_charge_term(F)
                res = res - rhs.scale(n - m)
            if not res.is_zero():
                worst = sp.factor(res.to_expr())
                if raise_on_fail:
                    raise AlgebraViolation(f"[L{n},L{m}]", worst)
                break
        out[(n, m)] = worst
    return out


# ---------------------------------------------------------------------------
# BRST with Grassmann ghosts c_{-1}, c_0, c_1
#
# Q = sum_n c_n L_n - 1/2 sum_{n,m} (n-m) c_n c_m d/dc_{n+m}

GHOSTS = (-1, 0, 1)


def _ghost_mul(n: int, mono: tuple):
    """c_n * c_mono -> (sign, sorted monomial) or None."""
    if n in mono:
        return None
    sign = (-1) ** sum(1 for g in mono if g < n)
    return sign, tuple(sorted(mono + (n,)))


def _ghost_deriv(n: int, mono: tuple):
    """d/dc_n (left derivative)."""
    if n not in mono:
        return None
    idx = mono.index(n)
    return (-1) ** idx, mono[:idx] + mono[idx + 1:]


class GhostElement:
    """sum over ghost monomials of CPoly coefficients."""

    def __init__(self, terms=None):
        self.terms = {}
        for k, v in (terms or {}).items():
            self.add(k, _as_cpoly(v))

    def add(self, mono, val: CPoly):
        v = self.terms.get(mono, CPoly()) + val
        if v.is_zero():
            self.terms.pop(mono, None)
        else:
            self.terms[mono] = v

    def is_zero(self):
        return not self.terms

    def __repr__(self):
        return f"GhostElement({ {k: v.to_expr() for k, v in self.terms.items()} })"


def brst_apply(state: GhostElement) -> GhostElement:
    out = GhostElement()
    for mono, F in state.terms.items():
        for n in GHOSTS:
            r = _ghost_mul(n, mono)
            if r is not None:
                out.add(r[1], L_conj(n, F).scale(r[0]))
        for n, m in itertools.product(GHOSTS, repeat=2):
            if n == m or abs(n + m) > 1:
                continue
            d = _ghost_deriv(n + m, mono)
            if d is None:
                continue
            r1 = _ghost_mul(m, d[1])
            if r1 is None:
                continue
            r2 = _ghost_mul(n, r1[1])
            if r2 is None:
                continue
            out.add(r2[1], F.scale(Fraction(-(n - m), 2) * d[0] * r1[0] * r2[0]))
    return out


def ghost_monomials():
    return [tuple(sorted(s)) for k in range(4) for s in itertools.combinations(GHOSTS, k)]


def brst_nilpotency(max_degree: int = 4, alpha=None) -> dict:
    """Q^2 on every (basis state) x (ghost monomial).

    "divisible": every residual is divisible by (alpha - D/4);
    "vanish_at_critical": every residual vanishes at alpha = D/4;
    "nonzero": Q^2 is not identically zero for generic alpha.
    A given ``alpha`` (e.g. D/4 + 1) is substituted into "residuals".
    """
    res = []
    for F in basis_states(max_degree):
        for mono in ghost_monomials():
            q2 = brst_apply(brst_apply(GhostElement({mono: F})))
            res.extend(v.to_expr() for v in q2.terms.values())
    factor = 4 * ALPHA - DIM
    divisible = all(sp.expand(sp.div(sp.expand(4 * r), factor, ALPHA)[1]) == 0 for r in res)
    vanish = all(sp.expand(r.subs(ALPHA, DIM / 4)) == 0 for r in res)
    if alpha is not None:
        res = [e for e in (sp.expand(r.subs(ALPHA, alpha)) for r in res) if e != 0]
    return {"residuals": res, "divisible": divisible, "vanish_at_critical": vanish, "nonzero": bool(res)}



def k_constant(D, alpha) -> Fraction:
    """K = 2 alpha (D - 2(alpha + 1))."""
    D, alpha = Fraction(D), Fraction(alpha)
    return 2 * alpha * (D - 2 * (alpha + 1))


# ---------------------------------------------------------------------------
# explicit components: hermiticity and frame consistency


def component_symbols(D: int):
    z = sp.symbols(f"z0:{D}")
    zb = sp.symbols(f"zb0:{D}")
    return z, zb


def L_components(n: int, f, D: int, sig: Signature, kappa, alpha):
    """Conjugated-frame operators on an explicit polynomial."""
    z, zb = component_symbols(D)
    e = [int(x) for x in sig.metric(D)]
    f = sp.sympify(f)
    if n == 1:
        return sp.expand(-sum(e[m] * sp.diff(f, z[m], 2) for m in range(D)) / (4 * kappa))
    # z[m] carry upper indices, d/dz[m] lower ones: z.d has no metric factor
    if n == -1:
        out = sum(e[m] * sp.diff(f, zb[m], 2) - 4 * kappa * z[m] * sp.diff(f, zb[m])
                  + 4 * kappa**2 * e[m] * z[m] ** 2 * f for m in range(D))
        return sp.expand(-out / (4 * kappa))
    if n == 0:
        out = sum(e[m] * sp.diff(f, z[m], zb[m]) - 2 * kappa * z[m] * sp.diff(f, z[m]) for m in range(D))
        return sp.expand(-out / (4 * kappa) + alpha * f)
    raise ValueError(n)


def conj_poly(f, D: int):
    z, zb = component_symbols(D)
    swap = {**{z[m]: zb[m] for m in range(D)}, **{zb[m]: z[m] for m in range(D)}}
    return sp.expand(sp.sympify(f).xreplace(swap).subs(sp.I, -sp.I))


def wick_expectation(p, D: int, kappa) -> sp.Expr:
    """Normalized integral of p against exp(-2 kappa z.zb) over C^D (Euclid).

    <z_m^a zb_m^b> = delta_ab a! / (2 kappa)^a, independent across m.
    """
    z, zb = component_symbols(D)
    poly = sp.Poly(sp.expand(p), *z, *zb)
    out = sp.Integer(0)
    for exps, c in poly.terms():
        ea, eb = exps[:D], exps[D:]
        if ea != eb:
            continue
        term = c
        for a in ea:
            term *= sp.factorial(a) / (2 * kappa) ** a
        out += term
    return sp.simplify(out)


def inner(f1, f2, D: int, kappa) -> sp.Expr:
    return wick_expectation(conj_poly(f1, D) * f2, D, kappa)


def random_component_poly(rng, D: int, max_degree: int = 2, n_terms: int = 3):
    z, zb = component_symbols(D)
    gens = list(z) + list(zb)
    out = 0
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        term = sp.Integer(1)
        for _ in range(deg):
            term *= gens[int(rng.integers(len(gens)))]
        out += (int(rng.integers(-3, 4)) + sp.I * int(rng.integers(-2, 3))) * term
    return sp.expand(out)


def hermiticity_check(rng, D: int, n_pairs: int = 5, max_degree: int = 2, kappa=sp.Rational(1, 2)) -> list:
    """<f1 | L1 f2> - <L-1 f1 | f2> for random polynomial pairs (Euclid)."""
    sig = Signature.parse("euclid")
    out = []
    for _ in range(n_pairs):
        f1 = random_component_poly(rng, D, max_degree)
        f2 = random_component_poly(rng, D, max_degree)
        lhs = inner(f1, L_components(1, f2, D, sig, kappa, 0), D, kappa)
        rhs = inner(L_components(-1, f1, D, sig, kappa, 0), f2, D, kappa)
        out.append((lhs, rhs, sp.simplify(lhs - rhs)))
    return out


def _zz_duals(z, zb):
    """Duals seeded on (z^0..z^{D-1}, zb^0..zb^{D-1}) as independent variables."""
    X = Dual.variables(list(np.asarray(z, dtype=complex)) + list(np.asarray(zb, dtype=complex)))
    D = len(z)
    return X[:D], X[D:]


def raw_L(n: int, psi: Dual, Z, ZB, D: int, sig: Signature, kappa: float, alpha: float) -> complex:
    """Raw-frame L_n applied to a dual-evaluated state at one point."""
    e = sig.metric(D)
    v = complex(psi.v)
    g = psi.g
    H = psi.h
    z = np.array([complex(x.v) for x in Z])
    zb = np.array([complex(x.v) for x in ZB])
    dz = g[:D]
    dzb = g[D:]
    if n == 1:
        # a.a psi = box_z psi + 2k zb.d psi + k^2 zb.zb psi
        box = sum(e[m] * H[m, m] for m in range(D))
        return -(box + 2 * kappa * np.sum(zb * dz) + kappa**2 * np.sum(e * zb * zb) * v) / (4 * kappa)
    if n == -1:
        box = sum(e[m] * H[D + m, D + m] for m in range(D))
        return -(box - 2 * kappa * np.sum(z * dzb) + kappa**2 * np.sum(e * z * z) * v) / (4 * kappa)
    if n == 0:
        # b.a psi = dbar.d psi + k D psi + k zb.dbar psi - k z.d psi - k^2 z.zb psi
        mixed = sum(e[m] * H[D + m, m] for m in range(D))
        ba = mixed + kappa * D * v + kappa * np.sum(zb * dzb) - kappa * np.sum(z * dz) - kappa**2 * np.sum(e * z * zb) * v
        return -ba / (4 * kappa) + alpha * v
    raise ValueError(n)


def raw_P(psi: Dual, Z, ZB, D: int, sig: Signature, kappa: float) -> np.ndarray:
    """P^mu psi = -i (d^mu + dbar^mu) psi + i kappa (zb^mu - z^mu) psi."""
    e = sig.metric(D)
    z = np.array([complex(x.v) for x in Z])
    zb = np.array([complex(x.v) for x in ZB])
    v = complex(psi.v)
    return -1j * e * (psi.g[:D] + psi.g[D:]) + 1j * kappa * (zb - z) * v


def frame_consistency(rng, D: int = 3, n_states: int = 20, kappa: float = 0.7, alpha: float = 0.75) -> float:
    """max relative gap between raw-frame (duals) and conjugated-frame (exact)
    application of L_n to exp(-kappa z.zb) f at a random point."""
    sig = Signature.parse("euclid" if rng.integers(2) else "minkowski")
    zs, zbs = component_symbols(D)
    worst = 0.0
    e = sig.metric(D)
    for _ in range(n_states):
        f = random_component_poly(rng, D, max_degree=3)
        fn = sp.lambdify([zs, zbs], f, "numpy")
        zv = rng.normal(size=D) + 1j * rng.normal(size=D)
        zbv = np.conj(zv)
        Z, ZB = _zz_duals(zv, zbv)
        weight = core.exp(-kappa * sum(e[m] * Z[m] * ZB[m] for m in range(D)))
        psi = weight * fn(Z, ZB)
        if not isinstance(psi, Dual):
            continue
        wv = complex(np.exp(-kappa * np.sum(e * zv * zbv)))
        for n in (1, 0, -1):
            raw = raw_L(n, psi, Z, ZB, D, sig, kappa, alpha)
            conj = L_components(n, f, D, sig, sp.nsimplify(kappa), sp.nsimplify(alpha))
            cval = complex(sp.lambdify([zs, zbs], conj, "numpy")(zv, zbv)) * wv
            scale = max(abs(raw), abs(cval), abs(complex(psi.v)), 1e-300)
            worst = max(worst, abs(raw - cval) / scale)
    return worst


# ---------------------------------------------------------------------------
# physical states


class SampleOnSingularLocus(ValueError):
    pass


@dataclass(frozen=True)
class PhysicalStateCandidate:
    """|k> = exp(i (k + kappa y).zb) [u^2]^(-alpha) h(u), u = y + k/2kappa,
    y = i(z - zb).  ``h`` is a Cartesian field h(u_components) written with
    :mod:`cparticle.core` math, homogeneous of degree zero."""

    k: np.ndarray
    h: Callable
    D: int
    sig: Signature
    kappa: float = 1.0
    alpha: float | None = None
    shift: float = 1.0  # u = y + shift * k / 2kappa; -1 flips the shift (fails L0)

    @property
    def a(self) -> float:
        return self.D / 4 if self.alpha is None else self.alpha

    @property
    def K(self) -> Fraction:
        return k_constant(self.D, Fraction(self.a).limit_denominator())

    def u_of(self, z, zb):
        return 1j * (np.asarray(z) - np.asarray(zb)) + self.shift * np.asarray(self.k) / (2 * self.kappa)

    def _radial_part(self, u_real: np.ndarray) -> Dual:
        """(u^2)^(-alpha) h(u) as a real dual in u."""
        U = Dual.variables(list(u_real))
        e = self.sig.metric(self.D)
        q = sum(e[m] * U[m] * U[m] for m in range(self.D))
        hv = self.h(U)
        if not isinstance(hv, Dual):
            hv = U[0]._const(np.asarray(hv, dtype=complex))
        return q ** (-self.a) * hv if float(self.a).is_integer() else core.exp(-self.a * core.log(q + 0j)) * hv

    def psi(self, z, zb):
        """State as a dual over (z, zb) treated as independent variables."""
        D = self.D
        e = self.sig.metric(D)
        u = self.u_of(z, zb)
        if np.max(np.abs(u.imag)) > 1e-12:
            raise ValueError("sample off the real section")
        q = float(np.sum(e * u.real**2))
        if abs(q) < 1e-8:
            raise SampleOnSingularLocus("u on the light cone")
        G = self._radial_part(u.real)
        # lift through u = i(z - zb) + const: d_z = i d_u, d_zb = -i d_u
        J = np.concatenate([1j * np.eye(D), -1j * np.eye(D)], axis=0)  # (2D, D)
        g = J @ G.g
        h = J @ G.h @ J.T
        Gz = Dual(np.asarray(G.v, dtype=complex), g, h)
        Z, ZB = _zz_duals(z, zb)
        kvec = np.asarray(self.k, dtype=float)
        yv = [1j * (Z[m] - ZB[m]) for m in range(D)]
        phase = sum(e[m] * (kvec[m] + self.kappa * yv[m]) * ZB[m] for m in range(D))
        return core.exp(1j * phase) * Gz, Z, ZB


def physical_state_residuals(c: PhysicalStateCandidate, samples) -> dict:
    """max over samples of |L1 psi|, |L0 psi|, |(P - k) psi| relative to |psi|,
    plus the h-equations u.dh = 0 and (box - K/u^2) h = 0."""
    worst = {"L1": 0.0, "L0": 0.0, "P": 0.0, "euler_h": 0.0, "radial_h": 0.0}
    e = c.sig.metric(c.D)
    K = float(c.K)
    for z in samples:
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        psi, Z, ZB = c.psi(z, zb)
        scale = max(abs(complex(psi.v)), 1e-300)
        worst["L1"] = max(worst["L1"], abs(raw_L(1, psi, Z, ZB, c.D, c.sig, c.kappa, c.a)) / scale)
        worst["L0"] = max(worst["L0"], abs(raw_L(0, psi, Z, ZB, c.D, c.sig, c.kappa, c.a)) / scale)
        P = raw_P(psi, Z, ZB, c.D, c.sig, c.kappa)
        worst["P"] = max(worst["P"], float(np.max(np.abs(P - c.k * complex(psi.v)))) / scale)
        u = c.u_of(z, zb).real
        U = Dual.variables(list(u))
        hv = c.h(U)
        if isinstance(hv, Dual):
            hs = max(abs(complex(hv.v)), 1e-300)
            worst["euler_h"] = max(worst["euler_h"], abs(complex(np.sum(u * hv.g)))/ hs)
            box = sum(e[m] * hv.h[m, m] for m in range(c.D))
            q = float(np.sum(e * u * u))
            worst["radial_h"] = max(worst["radial_h"], abs(complex(box - K * hv.v / q)) / hs)
    return worst


def sample_z(rng, c: PhysicalStateCandidate, domain: Domain, n: int, margin: float = 0.15):
    """z with u = y + k/2kappa in ``domain``; y = -2 Im z."""
    out = []
    for _ in range(n):
        p = random_point(rng, c.D, c.sig, domain, margin=margin)
        u = to_cartesian(p)
        imz = (c.shift * np.asarray(c.k) / (2 * c.kappa) - u) / 2
        out.append(rng.normal(size=c.D) + 1j * imz)
    return out


def chart_field(psi_fn, sig: Signature):
    """Cartesian evaluator h(u) from a spherical-coordinate evaluator psi_fn(r, angles, domain)."""

    def h(U):
        r, angles, dom = spherical_components(U, sig)
        return psi_fn(dom)(r, angles)

    return h
