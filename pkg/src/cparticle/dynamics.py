"""Classical complex particle: lagrangian, constraints, trajectories,
conserved quantities and the gauge-variation identity.

Vectors are complex numpy arrays of length D; dot products are bilinear
(no conjugation), conjugates are written out explicitly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import core
from .core import DEFAULT_TOL, Dual, Signature, Tolerances, dot


class ZeroEinbein(ValueError):
    pass


class StepError(ValueError):
    pass


class TimeComponentZero(ValueError):
    pass


@dataclass(frozen=True)
class LagrangianState:
    z: np.ndarray
    w: np.ndarray
    g: complex
    kappa: float
    sig: Signature

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex))
        object.__setattr__(self, "w", np.asarray(self.w, dtype=complex))
        if self.z.shape != self.w.shape:
            raise core.DimensionError("z and w differ in dimension")
        if self.g == 0:
            raise ZeroEinbein("einbein g vanishes")

    @property
    def D(self) -> int:
        return self.z.shape[0]


def _d(a, b, sig):
    return dot(list(a), list(b), sig)


def lagrangian(s: LagrangianState) -> float:
    """w^2/2g + i kappa w.zbar + c.c."""
    h = _d(s.w, s.w, s.sig) / (2 * s.g) + 1j * s.kappa * _d(s.w, np.conj(s.z), s.sig)
    return float(2 * np.real(h))


def kinetic_split(s: LagrangianState) -> dict:
    """Kinetic term in terms of w = u + i f, g = g1 + i g2.

    w^2/2g + c.c. = [g1 (u^2 - f^2) + 2 g2 u.f] / (g1^2 + g2^2); the
    coefficient of u^2 has the sign of g1, that of f^2 the opposite one.
    """
    u, f = np.real(s.w), np.imag(s.w)
    g1, g2 = np.real(s.g), np.imag(s.g)
    n = g1 * g1 + g2 * g2
    uu, ff, uf = _d(u, u, s.sig), _d(f, f, s.sig), _d(u, f, s.sig)
    return {
        "value": float((g1 * (uu - ff) + 2 * g2 * uf) / n),
        "coef_real": float(g1 / n),
        "coef_imag": float(-g1 / n),
        "coef_cross": float(2 * g2 / n),
    }


def constraints(s: LagrangianState):
    """(ell, ell_bar, ell0) = (w.w, conj, w.wbar)."""
    ell = complex(_d(s.w, s.w, s.sig))
    ell0 = float(np.real(_d(s.w, np.conj(s.w), s.sig)))
    return ell, ell.conjugate(), ell0


def conserved_momentum(s: LagrangianState) -> np.ndarray:
    return s.w / s.g + 2j * s.kappa * np.conj(s.z)


def global_charge(s: LagrangianState) -> float:
    """wbar.w / (2 gbar g) + c.c."""
    q = _d(np.conj(s.w), s.w, s.sig) / (2 * np.conj(s.g) * s.g)
    return float(2 * np.real(q))


def global_charge_canonical(s: LagrangianState) -> float:
    """wbar/gbar . (w/2g + i kappa zbar - dL/dw) + c.c., with dL/dw = w/g + i kappa zbar.

    Equals minus :func:`global_charge`.
    """
    dLdw = s.w / s.g + 1j * s.kappa * np.conj(s.z)
    inner = s.w / (2 * s.g) + 1j * s.kappa * np.conj(s.z) - dLdw
    q = _d(np.conj(s.w) / np.conj(s.g), inner, s.sig)
    return float(2 * np.real(q))


# ---------------------------------------------------------------------------
# trajectories


def _g_and_rate(g_profile, t: float):
    """g(t) and g'(t)/g(t) using a dual in tau."""
    (T,) = Dual.variables([t])
    G = g_profile(T)
    if not isinstance(G, Dual):
        return complex(G), 0.0
    gv = complex(G.v)
    if gv == 0:
        raise ZeroEinbein(f"g vanishes at tau={t}")
    return gv, complex(G.g[..., 0]) / gv


def constant_profile(g0: complex):
    return lambda t: g0 + 0 * t


@dataclass
class Trajectory:
    tau: np.ndarray
    z: np.ndarray        # (N, D)
    w: np.ndarray        # (N, D)
    g: np.ndarray        # (N,)
    C: np.ndarray
    kappa: float
    sig: Signature

    def state(self, i: int) -> LagrangianState:
        return LagrangianState(self.z[i], self.w[i], self.g[i], self.kappa, self.sig)

    def constraint_series(self):
        ell = np.array([constraints(self.state(i))[0] for i in range(len(self.tau))])
        ell0 = np.array([constraints(self.state(i))[2] for i in range(len(self.tau))])
        return ell, ell0

    def momentum_series(self):
        return self.w / self.g[:, None] + 2j * self.kappa * np.conj(self.z)

    def first_integral_residual(self) -> np.ndarray:
        """|w + 2 i g kappa (zbar - Cbar)| at every sample."""
        r = self.w + 2j * self.g[:, None] * self.kappa * (np.conj(self.z) - np.conj(self.C))
        return np.max(np.abs(r), axis=1)

    def drift(self) -> dict:
        ell, ell0 = self.constraint_series()
        p = self.momentum_series()
        out = {
            "ell": float(np.max(np.abs(ell))),
            "ell0": float(np.max(np.abs(ell0))),
            "momentum": float(np.max(np.abs(p - p[0]))),
        }
        if self.kappa != 0:
            out["first_integral"] = float(np.max(self.first_integral_residual()))
        return out

    def to_csv(self) -> str:
        D = self.z.shape[1]
        ell, ell0 = self.constraint_series()
        p = self.momentum_series()
        dp = np.max(np.abs(p - p[0]), axis=1)
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["tau"] + [f"re_z{m}" for m in range(D)] + [f"im_z{m}" for m in range(D)]
                    + ["re_ell", "im_ell", "ell0", "p_drift"])
        for i, t in enumerate(self.tau):
            wr.writerow([repr(float(t))] + [repr(float(x)) for x in np.real(self.z[i])]
                        + [repr(float(x)) for x in np.imag(self.z[i])]
                        + [repr(float(ell[i].real)), repr(float(ell[i].imag)), repr(float(ell0[i])), repr(float(dp[i]))])
        return buf.getvalue()


def integration_constant(s: LagrangianState) -> np.ndarray:
    """C from the first integral w = -2 i g kappa (zbar - Cbar)."""
    if s.kappa == 0:
        raise ValueError("first integral degenerates at kappa = 0")
    return s.z - np.conj(s.w / (-2j * s.g * s.kappa))


def integrate(initial: LagrangianState, g_profile: Callable | None = None,
              tau_span=(0.0, 1.0), step: float = 1e-3) -> Trajectory:
    """RK4 for y'' - rho y' - eta y = 0, y = z - C, rho = g'/g,
    eta = 4 kappa^2 g gbar.  At kappa = 0 the equation reduces to the free
    one (w/g)' = 0 with C = 0."""
    if not step > 0:
        raise StepError("step must be positive")
    if g_profile is None:
        g_profile = constant_profile(initial.g)
    t0, t1 = tau_span
    nsteps = int(round((t1 - t0) / step))
    if nsteps <= 0:
        raise StepError("empty span")
    h = (t1 - t0) / nsteps
    kappa = initial.kappa
    C = integration_constant(initial) if kappa != 0 else np.zeros_like(initial.z)
    y, v = initial.z - C, initial.w.copy()

    def rhs(t, y, v):
        g, rho = _g_and_rate(g_profile, t)
        eta = 4 * kappa**2 * (g * np.conj(g)).real
        return v, rho * v + eta * y

    taus = t0 + h * np.arange(nsteps + 1)
    Y = np.empty((nsteps + 1,) + y.shape, dtype=complex)
    V = np.empty_like(Y)
    G = np.empty(nsteps + 1, dtype=complex)
    Y[0], V[0] = y, v
    G[0] = _g_and_rate(g_profile, t0)[0]
    for k in range(nsteps):
        t = taus[k]
        k1y, k1v = rhs(t, y, v)
        k2y, k2v = rhs(t + h / 2, y + h / 2 * k1y, v + h / 2 * k1v)
        k3y, k3v = rhs(t + h / 2, y + h / 2 * k2y, v + h / 2 * k2v)
        k4y, k4v = rhs(t + h, y + h * k3y, v + h * k3v)
        y = y + h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        Y[k + 1], V[k + 1] = y, v
        G[k + 1] = _g_and_rate(g_profile, taus[k + 1])[0]
    return Trajectory(taus, Y + C, V, G, C, kappa, initial.sig)


@dataclass(frozen=True)
class TrajectorySolution:
    """z(tau) = C + z0 f(tau) with f = exp(mu tau), valid for constant g."""

    C: np.ndarray
    z0: np.ndarray
    mu: float
    g: complex
    kappa: float
    sig: Signature

    def f(self, t):
        return core.exp(self.mu * t)

    def z(self, t):
        return self.C + self.z0 * np.exp(self.mu * t)

    def w(self, t):
        return self.z0 * self.mu * np.exp(self.mu * t)

    @property
    def c(self):
        return self.C[1:] - self.C[0] * self.v

    @property
    def v(self):
        if self.z0[0] == 0:
            raise TimeComponentZero("z0^0 vanishes")
        return self.z0[1:] / self.z0[0]

    def el_residual(self, t: float) -> float:
        """|d/dtau (w/g + 2 i kappa zbar)| by duals in tau."""
        (T,) = Dual.variables([t])
        e = core.exp(self.mu * T)
        out = 0.0
        for m in range(len(self.z0)):
            wm = self.z0[m] * self.mu * e
            zb = np.conj(self.C[m]) + np.conj(self.z0[m]) * e
            pm = wm / self.g + 2j * self.kappa * zb
            out = max(out, abs(complex(pm.g[..., 0])))
        return out


def closed_form(C, k, g: complex, kappa: float, sig: Signature, amplitude: float = 1.0, sign: int = 1) -> TrajectorySolution:
    """Closed-form solution along the real direction k.

    With z0 = a e^{i phi} k the first integral needs -2 i g kappa e^{-2 i phi}
    real; choosing it equal to mu = 2 sign kappa |g| fixes phi.
    """
    k = np.asarray(k, dtype=float)
    mu = 2 * sign * kappa * abs(g)
    phase = mu / (-2j * g * kappa)       # e^{-2 i phi}
    e_iphi = 1 / np.sqrt(phase)
    return TrajectorySolution(np.asarray(C, dtype=complex), amplitude * e_iphi * k, mu, g, kappa, sig)


def velocity_conditions(z0, kappa: float, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Light-cone conditions on v = z0^i / z0^0 (Minkowski)."""
    z0 = np.asarray(z0, dtype=complex)
    if abs(z0[0]) == 0:
        raise TimeComponentZero("z0^0 vanishes")
    v = z0[1:] / z0[0]
    v1, v2 = v.real, v.imag
    vv = complex(np.sum(v * v))
    out = {
        "sum_vv": vv,
        "real_part": float(v1 @ v1 - v2 @ v2),
        "cross": float(v1 @ v2),
        "eq_vv": abs(vv - 1) <= tol.abs_tol + tol.rel_tol,
    }
    out["eq_split"] = abs(out["real_part"] - 1) <= 1e-6 and abs(out["cross"]) <= 1e-6
    if kappa != 0:
        out["abs_sum"] = float(v1 @ v1 + v2 @ v2)
        out["eq_abs"] = abs(out["abs_sum"] - 1) <= 1e-6
        out["v1_sq"] = float(v1 @ v1)
        out["v2_norm"] = float(np.linalg.norm(v2))
        out["eq_light"] = abs(out["v1_sq"] - 1) <= 1e-6 and out["v2_norm"] <= 1e-6
        out["pass"] = out["eq_split"] and out["eq_abs"] and out["eq_light"]
    else:
        out["pass"] = out["eq_split"]
    return out


# ---------------------------------------------------------------------------
# gauge variation: truncated series in (tau - tau0) and a nilpotent scale h


class Jet:
    """Truncated power series sum c[k, j] t^k h^j with h^2 = 0, k <= K."""

    __slots__ = ("c",)

    def __init__(self, c):
        self.c = np.asarray(c, dtype=complex)

    @property
    def K(self):
        return self.c.shape[0] - 1

    @classmethod
    def from_poly(cls, coeffs, K: int, h_part=None):
        c = np.zeros((K + 1, 2), dtype=complex)
        n = min(len(coeffs), K + 1)
        c[:n, 0] = coeffs[:n]
        if h_part is not None:
            m = min(len(h_part), K + 1)
            c[:m, 1] = h_part[:m]
        return cls(c)

    def _wrap(self, o):
        if isinstance(o, Jet):
            return o
        c = np.zeros_like(self.c)
        c[0, 0] = o
        return Jet(c)

    def __add__(self, o):
        return Jet(self.c + self._wrap(o).c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, o):
        return self + (-self._wrap(o))

    def __rsub__(self, o):
        return self._wrap(o) - self

    def __mul__(self, o):
        if not isinstance(o, Jet):
            return Jet(self.c * o)
        K = self.K
        a, b = self.c, o.c
        out = np.zeros_like(a)
        for k in range(K + 1):
            out[k, 0] = np.dot(a[: k + 1, 0], b[k::-1, 0])
            out[k, 1] = np.dot(a[: k + 1, 0], b[k::-1, 1]) + np.dot(a[: k + 1, 1], b[k::-1, 0])
        return Jet(out)

    __rmul__ = __mul__

    def reciprocal(self):
        a = self.c
        K = self.K
        if a[0, 0] == 0:
            raise ZeroDivisionError("series with vanishing constant term")
        r = np.zeros(K + 1, dtype=complex)
        r[0] = 1 / a[0, 0]
        for k in range(1, K + 1):
            r[k] = -np.dot(a[1 : k + 1, 0], r[k - 1 :: -1]) / a[0, 0]
        R = Jet(np.stack([r, np.zeros_like(r)], axis=1))
        # (a0 + h a1)^{-1} = R - h R^2 a1
        a1 = Jet(np.stack([a[:, 1], np.zeros(K + 1)], axis=1))
        corr = R * R * a1
        return Jet(np.stack([r, -corr.c[:, 0]], axis=1))

    def __truediv__(self, o):
        if isinstance(o, Jet):
            return self * o.reciprocal()
        return Jet(self.c / o)

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def conj(self):
        return Jet(np.conj(self.c))

    def deriv(self):
        c = np.zeros_like(self.c)
        k = np.arange(1, self.K + 1)
        c[:-1] = self.c[1:] * k[:, None]
        return Jet(c)

    def integral(self):
        c = np.zeros_like(self.c)
        k = np.arange(1, self.K + 1)
        c[1:] = self.c[:-1] / k[:, None]
        return Jet(c)

    def base(self):
        return Jet(np.stack([self.c[:, 0], np.zeros(self.K + 1)], axis=1))

    @property
    def value(self):
        return self.c[0, 0]

    @property
    def variation(self):
        return self.c[0, 1]


def _jdot(a, b, sig):
    return dot(a, b, sig)


@dataclass
class GaugeParams:
    """Taylor coefficients (around tau0) of eps, eps0 (real) and xi."""

    eps: np.ndarray
    eps0: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=complex)
        self.eps0 = np.asarray(self.eps0, dtype=complex)
        self.xi = np.asarray(self.xi, dtype=complex)
        if np.any(np.abs(np.imag(self.eps0)) > 0):
            raise ValueError("eps0 must be real")


@dataclass
class GaugeVariationReport:
    deltaL_direct: float
    deltaL_formula: float
    A: complex
    E: complex
    residual: float
    non_total: float  # delta L - dE/dtau - c.c.


@dataclass
class SeriesPath:
    """Off-shell path: Taylor coefficients of z^mu(tau) and g(tau) about tau0."""

    z: np.ndarray  # (D, K+1)
    g: np.ndarray  # (K+1,)
    kappa: float
    sig: Signature


def _lag_jet(z, g, kappa, sig):
    w = [zi.deriv() for zi in z]
    zb = [zi.conj() for zi in z]
    h = _jdot(w, w, sig) / (2 * g) + 1j * kappa * _jdot(w, zb, sig)
    return h + h.conj()


def gauge_variation(path: SeriesPath, params: GaugeParams, K: int = 6) -> GaugeVariationReport:
    """First-order variation of L under dz = eps w + (eps0/gbar) wbar,
    dg = xi, evaluated at tau0 both directly and by the closed identity."""
    sig, kappa = path.sig, path.kappa
    z = [Jet.from_poly(c, K) for c in path.z]
    g = Jet.from_poly(path.g, K)
    eps = Jet.from_poly(params.eps, K)
    eps0 = Jet.from_poly(params.eps0, K)
    xi = Jet.from_poly(params.xi, K)
    w = [zi.deriv() for zi in z]
    gb = g.conj()
    dz = [eps * wi + eps0 / gb * wi.conj() for wi in w]

    def h_shift(j):
        c = np.zeros((K + 1, 2), dtype=complex)
        c[:, 1] = j.c[:, 0]
        return Jet(c)

    zv = [zi + h_shift(d) for zi, d in zip(z, dz)]
    gv = g + h_shift(xi)
    direct = _lag_jet(zv, gv, kappa, sig).variation

    ell = _jdot(w, w, sig)
    ell0 = _jdot(w, [wi.conj() for wi in w], sig)
    zb = [zi.conj() for zi in z]
    A = ((eps * g).deriv() + 4j * kappa * g * eps0 - xi) / (2 * g * g)
    E = _jdot([wi / (2 * g) + 1j * kappa * zbi for wi, zbi in zip(w, zb)], dz, sig)
    first = ell0 / (2 * g * gb) * (eps0.deriv() - 2j * kappa * g * gb * (eps - eps.conj()))
    half = first + A * ell + E.deriv()
    formula = half + half.conj()
    total = E.deriv() + E.deriv().conj()
    return GaugeVariationReport(
        deltaL_direct=float(np.real(direct)),
        deltaL_formula=float(np.real(formula.value)),
        A=complex(A.value),
        E=complex(E.value),
        residual=float(abs(direct - formula.value)),
        non_total=float(abs(direct - total.value)),
    )


def gauge_params(path: SeriesPath, eps, eps0_const: float, K: int = 6) -> GaugeParams:
    """eps0 and xi solving the gauge conditions for a given eps:
    eps0' = 2 i kappa g gbar (eps - epsbar), xi = (eps g)' + 4 i kappa g eps0."""
    g = Jet.from_poly(path.g, K)
    e = Jet.from_poly(np.asarray(eps, dtype=complex), K)
    rate = 2j * path.kappa * g * g.conj() * (e - e.conj())
    e0 = rate.integral() + eps0_const
    e0c = np.real(e0.c[:, 0])
    xi = (e * g).deriv() + 4j * path.kappa * g * Jet.from_poly(e0c, K)
    return GaugeParams(e.c[:, 0], e0c, xi.c[:, 0])


def random_path(rng, D: int, sig: Signature, kappa: float, K: int = 6) -> SeriesPath:
    z = rng.normal(size=(D, K + 1)) + 1j * rng.normal(size=(D, K + 1))
    g = 0.5 * (rng.normal(size=K + 1) + 1j * rng.normal(size=K + 1))
    g[0] = (1.0 + rng.uniform()) * np.exp(1j * rng.uniform(-1, 1))
    return SeriesPath(z, g, kappa, sig)


def random_params(rng, K: int = 6) -> GaugeParams:
    return GaugeParams(
        rng.normal(size=K + 1) + 1j * rng.normal(size=K + 1),
        rng.normal(size=K + 1).astype(complex),
        rng.normal(size=K + 1) + 1j * rng.normal(size=K + 1),
    )


def null_initial_state(rng, D: int, kappa: float, g: complex = 1.0) -> LagrangianState:
    """Minkowski state with w = c k, k real and null: ell = ell0 = 0."""
    n = rng.normal(size=D - 1)
    k = np.concatenate([[1.0], n / np.linalg.norm(n)])
    c = rng.normal() + 1j * rng.normal()
    z = rng.normal(size=D) + 1j * rng.normal(size=D)
    return LagrangianState(z, c * k, g, kappa, Signature.parse("minkowski"))
