"""Numeric substrate: metric signatures, signed dot products, tolerances and
second-order dual numbers.

The :class:`Dual` type carries a value together with its gradient and
Hessian with respect to a fixed set of seed variables.  Values may be numpy
arrays, in which case every operation is vectorised over the leading batch
axes; the last axis of ``grad`` (last two of ``hess``) index the seeds.
Complex values are supported, so holomorphic expressions in independent
complex variables differentiate correctly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class Kind(str, Enum):
    EUCLID = "euclid"
    MINKOWSKI = "minkowski"


@dataclass(frozen=True)
class Signature:
    """Flat metric diag(eta00, 1, ..., 1)."""

    kind: Kind

    @property
    def eta00(self) -> int:
        return 1 if self.kind is Kind.EUCLID else -1

    @property
    def is_euclid(self) -> bool:
        return self.kind is Kind.EUCLID

    def metric(self, dim: int) -> np.ndarray:
        e = np.ones(dim)
        e[0] = self.eta00
        return e

    @classmethod
    def parse(cls, name: "str | Signature") -> "Signature":
        if isinstance(name, Signature):
            return name
        return cls(Kind(name.lower()))

    def __str__(self) -> str:
        return self.kind.value


EUCLID = Signature(Kind.EUCLID)
MINKOWSKI = Signature(Kind.MINKOWSKI)


@dataclass(frozen=True)
class Tolerances:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    fd_step: float = 1e-5

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "fd_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def close(self, a, b) -> bool:
        return bool(np.all(np.abs(a - b) <= self.abs_tol + self.rel_tol * np.abs(b)))


DEFAULT_TOL = Tolerances()


class DimensionError(ValueError):
    pass


def dot(u, v, sig: Signature):
    """Bilinear product eta00 u0 v0 + sum_i ui vi.

    Works on sequences of floats, complex numbers or :class:`Dual` objects.
    No complex conjugation is applied.
    """
    if len(u) != len(v):
        raise DimensionError(f"dimension mismatch: {len(u)} != {len(v)}")
    total = sig.eta00 * (u[0] * v[0])
    for a, b in zip(u[1:], v[1:]):
        total = total + a * b
    return total


def sgn_norm(u, sig: Signature, tol: Tolerances = DEFAULT_TOL) -> int:
    """Sign of u.u; 0 on the light cone (within ``abs_tol``)."""
    q = float(np.real(dot(list(u), list(u), sig)))
    if abs(q) < tol.abs_tol:
        return 0
    return 1 if q > 0 else -1


# ---------------------------------------------------------------------------
# dual numbers


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


class Dual:
    """Second-order forward-mode dual number (value, gradient, Hessian)."""

    __slots__ = ("v", "g", "h")
    __array_priority__ = 1000

    def __init__(self, v, g, h):
        self.v = v
        self.g = g
        self.h = h

    @classmethod
    def variables(cls, values) -> list["Dual"]:
        """Seed one dual per entry of ``values`` (scalars or equal-shape arrays)."""
        vals = [np.asarray(x) for x in values]
        shape = np.broadcast_shapes(*[x.shape for x in vals])
        n = len(vals)
        out = []
        for i, x in enumerate(vals):
            dtype = np.result_type(x.dtype, float)
            g = np.zeros(shape + (n,), dtype=dtype)
            g[..., i] = 1
            h = np.zeros(shape + (n, n), dtype=dtype)
            out.append(cls(np.broadcast_to(x, shape).astype(dtype), g, h))
        return out

    @property
    def nvars(self) -> int:
        return self.g.shape[-1]

    def _const(self, c):
        return Dual(np.asarray(c), np.zeros_like(self.g), np.zeros_like(self.h))

    def __add__(self, o):
        if isinstance(o, Dual):
            return Dual(self.v + o.v, self.g + o.g, self.h + o.h)
        return Dual(self.v + o, self.g, self.h)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.v, -self.g, -self.h)

    def __pos__(self):
        return self

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, Dual):
            a, b = np.asarray(self.v), np.asarray(o.v)
            return Dual(
                a * b,
                a[..., None] * o.g + b[..., None] * self.g,
                a[..., None, None] * o.h
                + b[..., None, None] * self.h
                + _outer(self.g, o.g)
                + _outer(o.g, self.g),
            )
        c = np.asarray(o)
        return Dual(self.v * c, self.g * c[..., None], self.h * c[..., None, None])

    __rmul__ = __mul__

    def reciprocal(self):
        v = np.asarray(self.v)
        return _lift(self, 1 / v, -1 / v**2, 2 / v**3)

    def __truediv__(self, o):
        if isinstance(o, Dual):
            return self * o.reciprocal()
        return self * (1 / np.asarray(o))

    def __rtruediv__(self, o):
        return self.reciprocal() * o

    def __pow__(self, p):
        if isinstance(p, Dual):
            return exp(p * log(self))
        if isinstance(p, (int, np.integer)):
            if p == 0:
                return self._const(np.ones_like(self.v))
            if p == 1:
                return self
            if p == 2:
                return self * self
        v = np.asarray(self.v)
        if isinstance(p, (int, np.integer)) and p < 0:
            vp = v ** float(p)
        else:
            vp = v**p
        return _lift(self, vp, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __abs__(self):
        return self * np.sign(np.real(self.v))

    def conjugate(self):
        return Dual(np.conj(self.v), np.conj(self.g), np.conj(self.h))

    @property
    def real(self):
        return Dual(np.real(self.v), np.real(self.g), np.real(self.h))

    @property
    def imag(self):
        return Dual(np.imag(self.v), np.imag(self.g), np.imag(self.h))

    def __repr__(self):
        return f"Dual({self.v!r}, grad={self.g!r})"


def _lift(x: Dual, f0, f1, f2) -> Dual:
    f1 = np.asarray(f1)
    f2 = np.asarray(f2)
    return Dual(
        f0,
        f1[..., None] * x.g,
        f1[..., None, None] * x.h + f2[..., None, None] * _outer(x.g, x.g),
    )


def value(x):
    return x.v if isinstance(x, Dual) else x


def grad(x):
    return x.g


def hess(x):
    return x.h


def exp(x):
    if isinstance(x, Dual):
        e = np.exp(x.v)
        return _lift(x, e, e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Dual):
        v = x.v
        return _lift(x, np.log(v), 1 / v, -1 / v**2)
    return np.log(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = np.sqrt(x.v)
        return _lift(x, s, 0.5 / s, -0.25 / s**3)
    return np.sqrt(x)


def sin(x):
    if isinstance(x, Dual):
        s, c = np.sin(x.v), np.cos(x.v)
        return _lift(x, s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Dual):
        s, c = np.sin(x.v), np.cos(x.v)
        return _lift(x, c, -s, -c)
    return np.cos(x)


def sinh(x):
    if isinstance(x, Dual):
        s, c = np.sinh(x.v), np.cosh(x.v)
        return _lift(x, s, c, s)
    return np.sinh(x)


def cosh(x):
    if isinstance(x, Dual):
        s, c = np.sinh(x.v), np.cosh(x.v)
        return _lift(x, c, s, c)
    return np.cosh(x)


def arcsinh(x):
    if isinstance(x, Dual):
        v = x.v
        q = 1 + v * v
        return _lift(x, np.arcsinh(v), q**-0.5, -v * q**-1.5)
    return np.arcsinh(x)


def arctan(x):
    if isinstance(x, Dual):
        v = x.v
        q = 1 + v * v
        return _lift(x, np.arctan(v), 1 / q, -2 * v / q**2)
    return np.arctan(x)


def arctan2(y, x):
    """Two-argument arctangent, differentiable in both arguments."""
    if not isinstance(y, Dual) and not isinstance(x, Dual):
        return np.arctan2(y, x)
    yv, xv = np.asarray(value(y)), np.asarray(value(x))
    base = np.arctan2(yv, xv)
    use_x = np.abs(xv) >= np.abs(yv)
    safe_x = where(use_x, x, 1.0)
    safe_y = where(use_x, 1.0, y)
    # locally atan2(y, x) = atan(y/x) + const or -atan(x/y) + const
    a = arctan(y / safe_x)
    b = -arctan(x / safe_y)
    d = where(use_x, a, b)
    return Dual(base, d.g, d.h)


def where(cond, a, b):
    """Element-wise select that also works on duals."""
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.where(cond, a, b)
    if not isinstance(a, Dual):
        a = b._const(np.broadcast_to(a, np.shape(b.v)))
    if not isinstance(b, Dual):
        b = a._const(np.broadcast_to(b, np.shape(a.v)))
    c = np.asarray(cond)
    return Dual(
        np.where(c, a.v, b.v),
        np.where(c[..., None], a.g, b.g),
        np.where(c[..., None, None], a.h, b.h),
    )


def central_difference(f, x, step: float = DEFAULT_TOL.fd_step):
    """Gradient and Hessian of a scalar function of a vector by central
    differences.  Independent check on the dual-number machinery."""
    x = np.asarray(x, dtype=float)
    n = x.size
    g = np.zeros(n, dtype=complex)
    H = np.zeros((n, n), dtype=complex)
    f0 = f(x)
    eye = np.eye(n) * step
    for i in range(n):
        fp, fm = f(x + eye[i]), f(x - eye[i])
        g[i] = (fp - fm) / (2 * step)
        H[i, i] = (fp - 2 * f0 + fm) / step**2
        for j in range(i):
            fpp = f(x + eye[i] + eye[j])
            fpm = f(x + eye[i] - eye[j])
            fmp = f(x - eye[i] + eye[j])
            fmm = f(x - eye[i] - eye[j])
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4 * step**2)
    if np.isrealobj(f0):
        return g.real, H.real
    return g, H
