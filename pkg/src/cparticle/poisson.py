"""Exact phase-space algebra with contracted Lorentz indices.

A :class:`PhasePolynomial` is a sympy expression in

* scalar generators g, gb (conjugate einbein), pg, pgb (their momenta),
* formal scalar products ``a.b`` of the vector generators
  z, zb, pi, pib and of constant external vectors (a, b, ...),
* the central symbols kappa (any integer power) and D.

Free indices never appear: a vector statement X^mu is tested as a.X with a
constant external vector a, and eta^{mu nu} becomes a.b.  The bracket is

  {A, B} = dA/dz.dB/dpi - dA/dpi.dB/dz + dA/dg dB/dpg - dA/dpg dB/dg + (conjugate pairs)
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np
import sympy as sp

from .core import Signature, dot

KAPPA = sp.Symbol("kappa", positive=True)
DIM = sp.Symbol("D", positive=True, integer=True)

PHASE_VECTORS = ("z", "zb", "pi", "pib")
EXTERNAL = ("a", "b", "c", "e")
VECTORS = PHASE_VECTORS + EXTERNAL
SCALARS = ("g", "gb", "pg", "pgb")
CONJ_NAME = {"z": "zb", "zb": "z", "pi": "pib", "pib": "pi", "g": "gb", "gb": "g", "pg": "pgb", "pgb": "pg"}
VECTOR_PAIRS = (("z", "pi"), ("zb", "pib"))
SCALAR_PAIRS = (("g", "pg"), ("gb", "pgb"))

_SCALAR_SYM = {n: sp.Symbol(n) for n in SCALARS}


def _key(x, y):
    i, j = VECTORS.index(x), VECTORS.index(y)
    return (x, y) if i <= j else (y, x)


_DOT_SYM = {_key(x, y): sp.Symbol(f"({_key(x, y)[0]}.{_key(x, y)[1]})") for x in VECTORS for y in VECTORS}
_SYM_DOT = {v: k for k, v in _DOT_SYM.items()}


def dsym(x: str, y: str) -> sp.Symbol:
    return _DOT_SYM[_key(x, y)]


class AlgebraViolation(AssertionError):
    def __init__(self, name, residual):
        super().__init__(f"{name}: residual {residual}")
        self.name = name
        self.residual = residual


class Vec:
    """Formal vector: linear combination sum_x coef_x * x over vector names."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {k: sp.sympify(v) for k, v in (terms or {}).items()}

    @classmethod
    def of(cls, name):
        return cls({name: 1})

    def __add__(self, o):
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, 0) + v
        return Vec(t)

    def __neg__(self):
        return Vec({k: -v for k, v in self.terms.items()})

    def __sub__(self, o):
        return self + (-o)

    def __mul__(self, c):
        c = c.expr if isinstance(c, PhasePolynomial) else sp.sympify(c)
        return Vec({k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def dot(self, o: "Vec") -> "PhasePolynomial":
        s = 0
        for x, cx in self.terms.items():
            for y, cy in o.terms.items():
                s += cx * cy * dsym(x, y)
        return PhasePolynomial(s)

    def conj(self):
        return Vec({CONJ_NAME.get(k, k): _conj_expr(v) for k, v in self.terms.items()})


def _conj_expr(e):
    e = sp.sympify(e)
    sub = {}
    for k, s in _DOT_SYM.items():
        if s in e.free_symbols:
            sub[s] = dsym(CONJ_NAME.get(k[0], k[0]), CONJ_NAME.get(k[1], k[1]))
    for n, s in _SCALAR_SYM.items():
        if s in e.free_symbols:
            sub[s] = _SCALAR_SYM[CONJ_NAME[n]]
    for s in e.free_symbols:
        if s.name in _PARAM_CONJ:
            sub[s] = sp.Symbol(_PARAM_CONJ[s.name], **_param_assumptions(_PARAM_CONJ[s.name]))
    e = e.xreplace(sub) if sub else e
    return e.subs(sp.I, -sp.I)


_PARAM_CONJ = {}


def _param_assumptions(name):
    return {"real": True} if name in _REAL_PARAMS else {}


_REAL_PARAMS = set()


def param(name: str, conj_name: str | None = None, real: bool = False):
    """Formal constant (zero bracket with everything).  Registers its conjugate."""
    if real:
        _REAL_PARAMS.add(name)
        return sp.Symbol(name, real=True)
    if conj_name:
        _PARAM_CONJ[name] = conj_name
        _PARAM_CONJ[conj_name] = name
    return sp.Symbol(name)


@dataclass(frozen=True)
class PhasePolynomial:
    expr: sp.Expr

    def __post_init__(self):
        object.__setattr__(self, "expr", sp.expand(sp.sympify(self.expr)))

    def _w(self, o):
        return o if isinstance(o, PhasePolynomial) else PhasePolynomial(o)

    def __add__(self, o):
        return PhasePolynomial(self.expr + self._w(o).expr)

    __radd__ = __add__

    def __sub__(self, o):
        return PhasePolynomial(self.expr - self._w(o).expr)

    def __rsub__(self, o):
        return PhasePolynomial(self._w(o).expr - self.expr)

    def __neg__(self):
        return PhasePolynomial(-self.expr)

    def __mul__(self, o):
        return PhasePolynomial(self.expr * self._w(o).expr)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return PhasePolynomial(self.expr / sp.sympify(c))

    def __pow__(self, n: int):
        return PhasePolynomial(self.expr**n)

    def __eq__(self, o):
        return sp.expand(self.expr - self._w(o).expr) == 0

    def __hash__(self):
        return hash(self.expr)

    def is_zero(self) -> bool:
        return sp.expand(self.expr) == 0

    def conj(self) -> "PhasePolynomial":
        return PhasePolynomial(_conj_expr(self.expr))

    def subs(self, mapping) -> "PhasePolynomial":
        return PhasePolynomial(self.expr.subs(mapping))

    def grad_vector(self, v: str) -> Vec:
        """dA/dv^mu as a formal vector."""
        terms = {}
        for x in VECTORS:
            s = dsym(v, x)
            if s not in self.expr.free_symbols:
                continue
            c = sp.diff(self.expr, s) * (2 if x == v else 1)
            terms[x] = terms.get(x, 0) + c
        return Vec(terms)

    def diff_scalar(self, n: str) -> sp.Expr:
        return sp.diff(self.expr, _SCALAR_SYM[n])

    def evaluate(self, values: dict, sig: Signature, params: dict | None = None) -> complex:
        """Numeric value; ``values`` maps generator names to arrays/scalars."""
        sub = {}
        for (x, y), s in _DOT_SYM.items():
            if s in self.expr.free_symbols:
                sub[s] = complex(dot(list(values[x]), list(values[y]), sig))
        for n, s in _SCALAR_SYM.items():
            if s in self.expr.free_symbols:
                sub[s] = complex(values[n])
        for k, v in (params or {}).items():
            sub[k] = v
        return complex(self.expr.xreplace(sub).evalf())

    def __str__(self):
        return str(self.expr)


def scalar(name: str) -> PhasePolynomial:
    return PhasePolynomial(_SCALAR_SYM[name])


def vec(name: str) -> Vec:
    return Vec.of(name)


_GENS = tuple(_DOT_SYM.values()) + tuple(_SCALAR_SYM.values())
_INV = {}
_RINGS = {}


def _inv(sym):
    if sym not in _INV:
        _INV[sym] = sp.Symbol(f"inv_{sym}")
    return _INV[sym]


class _Sparse:
    """Sparse polynomial ring over the generators; parameters ride along as
    extra generators, negative powers via an inverse symbol."""

    def __init__(self, *exprs):
        extra = set().union(*(e.free_symbols for e in exprs)) - set(_GENS)
        self.extra = tuple(sorted(extra, key=str))
        key = self.extra
        if key not in _RINGS:
            syms = _GENS + self.extra + tuple(_inv(x) for x in self.extra)
            _RINGS[key] = sp.polys.rings.ring(syms, sp.QQ_I)
        self.R, *self.x = _RINGS[key]
        self.gen = dict(zip(_GENS, self.x))
        self.back = {_inv(x): 1 / x for x in self.extra}

    def to(self, e):
        ex = set(self.extra)
        e = sp.expand(e).replace(
            lambda t: t.is_Pow and t.base in ex and t.exp.is_negative,
            lambda t: _inv(t.base) ** (-t.exp))
        return self.R.from_expr(e) if e != 0 else self.R.zero

    def expr(self, p):
        return p.as_expr().xreplace(self.back)


def _poly_bracket(S: _Sparse, pa, pb):
    # dot products stay symbolic; z.z-type partials pick up a factor 2
    def grad(P, v):
        out = {}
        for x in VECTORS:
            g = S.gen[dsym(v, x)]
            d = P.diff(g)
            if d:
                out[x] = d * 2 if x == v else d
        return out

    out = S.R.zero
    for q, p in VECTOR_PAIRS:
        for l, r, sgn in ((q, p, 1), (p, q, -1)):
            ga, gb = grad(pa, l), grad(pb, r)
            for x, cx in ga.items():
                for y, cy in gb.items():
                    out += sgn * cx * cy * S.gen[dsym(x, y)]
    for q, p in SCALAR_PAIRS:
        gq, gp = S.gen[_SCALAR_SYM[q]], S.gen[_SCALAR_SYM[p]]
        out += pa.diff(gq) * pb.diff(gp) - pa.diff(gp) * pb.diff(gq)
    return out


def poisson(A, B) -> PhasePolynomial:
    A = A.expr if isinstance(A, PhasePolynomial) else sp.sympify(A)
    B = B.expr if isinstance(B, PhasePolynomial) else sp.sympify(B)
    S = _Sparse(A, B)
    return PhasePolynomial(S.expr(_poly_bracket(S, S.to(A), S.to(B))))


def trace_eta() -> sp.Symbol:
    """eta^mu_mu; {z^mu, pi_mu} summed over mu."""
    return DIM


# ---------------------------------------------------------------------------
# constraints


@dataclass(frozen=True)
class ConstraintSet:
    phi: PhasePolynomial
    phi_bar: PhasePolynomial
    chi: PhasePolynomial
    chi_bar: PhasePolynomial
    chi0: PhasePolynomial
    L1: PhasePolynomial
    L0: PhasePolynomial
    Lm1: PhasePolynomial

    def L(self, n: int) -> PhasePolynomial:
        return {1: self.L1, 0: self.L0, -1: self.Lm1}[n]


def P_vec() -> Vec:
    """pi - i kappa zb."""
    return vec("pi") - vec("zb") * (sp.I * KAPPA)


def constraint_set(normalization: str = "closing") -> ConstraintSet:
    """Constraints and the sl(2,R) basis.

    ``"closing"``: L1 = -chi/2k, L-1 = -chibar/2k, L0 = -chi0/4k, the
    normalization for which {L_n, L_m} = i(n-m) L_{n+m}.
    ``"printed"``: the 1/4k, 1/16k variant, kept for comparison.
    """
    P = P_vec()
    Pb = P.conj()
    chi = P.dot(P) / 2
    chi_bar = chi.conj()
    chi0 = P.dot(Pb)
    if normalization == "closing":
        a, b = -1 / (2 * KAPPA), -1 / (4 * KAPPA)
    elif normalization == "printed":
        a, b = -1 / (4 * KAPPA), -1 / (16 * KAPPA)
    else:
        raise ValueError(normalization)
    return ConstraintSet(scalar("pg"), scalar("pgb"), chi, chi_bar, chi0, chi * a, chi0 * b, chi_bar * a)


@dataclass
class Identity:
    name: str
    lhs: PhasePolynomial
    rhs: PhasePolynomial

    @property
    def residual(self) -> PhasePolynomial:
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        return self.residual.is_zero()

    def to_dict(self):
        return {"name": self.name, "lhs": str(self.lhs), "rhs": str(self.rhs),
                "residual": str(self.residual), "holds": self.holds}


def algebra_identities(cs: ConstraintSet | None = None) -> list[Identity]:
    cs = cs or constraint_set()
    ids = [
        Identity("{phi,chi}=0", poisson(cs.phi, cs.chi), PhasePolynomial(0)),
        Identity("{phi,chibar}=0", poisson(cs.phi, cs.chi_bar), PhasePolynomial(0)),
        Identity("{chi,chibar}=-2ik chi0", poisson(cs.chi, cs.chi_bar), cs.chi0 * (-2 * sp.I * KAPPA)),
        Identity("{chi,chi0}=-4ik chi", poisson(cs.chi, cs.chi0), cs.chi * (-4 * sp.I * KAPPA)),
    ]
    for n, m in itertools.product((1, 0, -1), repeat=2):
        rhs = cs.L(n + m) * (sp.I * (n - m)) if abs(n + m) <= 1 else PhasePolynomial(0)
        ids.append(Identity(f"{{L{n},L{m}}}=i({n}-{m})L{n + m}", poisson(cs.L(n), cs.L(m)), rhs))
    return ids


def verify_algebra(cs: ConstraintSet | None = None, raise_on_fail: bool = True) -> list[Identity]:
    ids = algebra_identities(cs)
    if raise_on_fail:
        for i in ids:
            if not i.holds:
                raise AlgebraViolation(i.name, i.residual)
    return ids


def momentum() -> Vec:
    """p = pi + i kappa zb."""
    return vec("pi") + vec("zb") * (sp.I * KAPPA)


def momentum_bracket() -> list[Identity]:
    """{a.p, b.pbar} = 2 i kappa a.b and {a.p, b.p} = 0."""
    p = momentum()
    pa = vec("a").dot(p)
    pbb = vec("b").dot(p.conj())
    pb = vec("b").dot(p)
    ab = PhasePolynomial(dsym("a", "b"))
    return [
        Identity("{p,pbar}=2ik eta", poisson(pa, pbb), ab * (2 * sp.I * KAPPA)),
        Identity("{p,p}=0", poisson(pa, pb), PhasePolynomial(0)),
    ]


def hamiltonian(c: PhasePolynomial | None = None, cs: ConstraintSet | None = None) -> PhasePolynomial:
    """H = g chi + c phi + c.c. (c defaults to a formal symbol)."""
    cs = cs or constraint_set()
    if c is None:
        c = PhasePolynomial(param("c", "cb"))
    h = scalar("g") * cs.chi + c * cs.phi
    return h + h.conj()


def hamiltonian_flow(A, c=None) -> PhasePolynomial:
    """A~ = {A, H}."""
    return poisson(A, hamiltonian(c))


def mod_phi(A: PhasePolynomial) -> PhasePolynomial:
    """Drop terms proportional to the primary constraints."""
    return A.subs({_SCALAR_SYM["pg"]: 0, _SCALAR_SYM["pgb"]: 0})


def flow_identities(cs: ConstraintSet | None = None) -> list[Identity]:
    """Preservation chain phi -> chi -> chi0 -> closes, modulo phi."""
    cs = cs or constraint_set()
    g, gb = scalar("g"), scalar("gb")
    k = KAPPA
    return [
        Identity("phi~ = -chi", mod_phi(hamiltonian_flow(cs.phi)), -cs.chi),
        Identity("chi~ = -2ik gb chi0", mod_phi(hamiltonian_flow(cs.chi)), gb * cs.chi0 * (-2 * sp.I * k)),
        Identity("chi0~ = 4ik (g chi - gb chibar)", mod_phi(hamiltonian_flow(cs.chi0)),
                 (g * cs.chi - gb * cs.chi_bar) * (4 * sp.I * k)),
    ]


def gauge_generator(cs: ConstraintSet | None = None):
    """Q = g eps chi + gb epsb chibar + eps0 chi0 + xi phi + xib phibar with
    formal parameters; returns (Q, params)."""
    cs = cs or constraint_set()
    eps, epsb = param("eps", "epsb"), param("epsb", "eps")
    eps0 = param("eps0", real=True)
    xi, xib = param("xi", "xib"), param("xib", "xi")
    Q = scalar("g") * eps * cs.chi + scalar("gb") * epsb * cs.chi_bar + cs.chi0 * eps0 + cs.phi * xi + cs.phi_bar * xib
    return Q, dict(eps=eps, epsb=epsb, eps0=eps0, xi=xi, xib=xib)


def gauge_generator_action(cs: ConstraintSet | None = None) -> list[Identity]:
    """delta z, delta g generated by Q, and the canonical gauge condition."""
    cs = cs or constraint_set()
    Q, prm = gauge_generator(cs)
    P = P_vec()
    a = vec("a")
    ids = [
        Identity("delta z = g eps P + eps0 Pbar", poisson(a.dot(vec("z")), Q),
                 a.dot(P) * (scalar("g") * prm["eps"]) + a.dot(P.conj()) * prm["eps0"]),
        Identity("delta g = xi", poisson(scalar("g"), Q), PhasePolynomial(prm["xi"])),
    ]
    # Q~ = dQ/dtau (explicit, through the parameters) + {Q, H}
    dots = {s: param(s.name + "_t", (_PARAM_CONJ[s.name] + "_t") if s.name in _PARAM_CONJ else None,
                     real=s.name in _REAL_PARAMS) for s in prm.values()}
    explicit = sum((sp.diff(Q.expr, s) * dots[s] for s in prm.values()), sp.Integer(0))
    c = PhasePolynomial(param("c", "cb"))
    Qt = mod_phi(PhasePolynomial(explicit) + poisson(Q, hamiltonian(c, cs)))
    g, gb = scalar("g"), scalar("gb")
    k = KAPPA
    # (g eps)~ = g~ eps + g eps~, with g~ = {g, H} = c
    geps_t = c * prm["eps"] + g * dots[prm["eps"]]
    cond_chi = geps_t + g * prm["eps0"] * (4 * sp.I * k) - prm["xi"]
    cond_chi0 = PhasePolynomial(dots[prm["eps0"]]) - g * gb * (prm["eps"] - prm["epsb"]) * (2 * sp.I * k)
    expected = cs.chi * cond_chi + cs.chi_bar * cond_chi.conj() + cs.chi0 * cond_chi0
    ids.append(Identity("Q~ = cond_xi chi + cc + cond_eps0 chi0 (mod phi)", Qt, expected))
    return ids


def pullback(A: PhasePolynomial, w, z, g, kappa: float, sig: Signature) -> complex:
    """Evaluate A at pi = W = w/g + i kappa zbar (and conjugates)."""
    w, z = np.asarray(w, dtype=complex), np.asarray(z, dtype=complex)
    W = w / g + 1j * kappa * np.conj(z)
    values = {"z": z, "zb": np.conj(z), "pi": W, "pib": np.conj(W), "g": g, "gb": np.conj(g), "pg": 0, "pgb": 0}
    return A.evaluate(values, sig, {KAPPA: kappa})


# ---------------------------------------------------------------------------
# random polynomials for axiom checks


def random_polynomial(rng, max_degree: int = 3, n_terms: int = 3) -> PhasePolynomial:
    """Random polynomial of degree <= max_degree in the phase-space generators.

    A dot product counts as degree 2, a scalar generator as 1.
    """
    atoms = [(dsym(x, y), 2) for x, y in itertools.combinations_with_replacement(PHASE_VECTORS, 2)]
    atoms += [(_SCALAR_SYM[n], 1) for n in SCALARS]
    out = 0
    for _ in range(n_terms):
        deg = 0
        term = sp.Integer(1)
        for _ in range(3):
            atom, d = atoms[rng.integers(len(atoms))]
            if deg + d <= max_degree:
                term *= atom
                deg += d
        coef = sp.Rational(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) + sp.I * int(rng.integers(-2, 3))
        out += coef * KAPPA ** int(rng.integers(-1, 2)) * term
    return PhasePolynomial(out)


def bracket_axioms(A, B, C) -> dict:
    """Residuals of antisymmetry, Leibniz and Jacobi (all exact)."""
    exprs = [X.expr if isinstance(X, PhasePolynomial) else sp.sympify(X) for X in (A, B, C)]
    S = _Sparse(*exprs)
    a, b, c = (S.to(e) for e in exprs)

    def br(u, v):
        return _poly_bracket(S, u, v)

    anti = br(a, b) + br(b, a)
    leib = br(a, b * c) - (br(a, b) * c + b * br(a, c))
    jac = br(a, br(b, c)) + br(b, br(c, a)) + br(c, br(a, b))
    return {k: PhasePolynomial(S.expr(v)) for k, v in
            (("antisymmetry", anti), ("leibniz", leib), ("jacobi", jac))}


def to_json(identities, indent=None) -> str:
    return json.dumps([i.to_dict() for i in identities], indent=indent, sort_keys=True)


def pretty(identities) -> str:
    lines = []
    for i in identities:
        mark = "ok " if i.holds else "FAIL"
        lines.append(f"[{mark}] {i.name}")
        if not i.holds:
            lines.append(f"       residual: {i.residual}")
    return "\n".join(lines)
