"""Second-order forward-mode automatic differentiation (hyper-dual numbers).

A :class:`HyperDual` carries a value together with its exact gradient and
Hessian with respect to ``nvars`` seed variables.  All components are numpy
arrays with a common batch shape, so a single arithmetic pass evaluates a
whole grid of points at once.  There is no truncation error: the chain rule
is applied exactly to second order.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

__all__ = ["HyperDual", "seed_variables", "sqrt", "exp", "log", "log1p",
           "expm1", "sin", "cos", "tan", "sinh", "cosh", "tanh"]


def _outer(a, b):
    return np.einsum("...i,...j->...ij", a, b)


class HyperDual:
    """Batched hyper-dual scalar: value ``S``, gradient ``S+(n,)``, Hessian ``S+(n,n)``."""

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    # ------------------------------------------------------------------ basics

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    @staticmethod
    def constant(value, nvars, shape=()):
        value = np.broadcast_to(np.asarray(value, dtype=float), shape)
        return HyperDual(value,
                         np.zeros(shape + (nvars,)),
                         np.zeros(shape + (nvars, nvars)))

    def _lift(self, other):
        if isinstance(other, HyperDual):
            return other
        return HyperDual.constant(np.asarray(other, dtype=float), self.nvars,
                                  np.shape(other))

    def __repr__(self):
        return f"HyperDual(val={self.val!r})"

    # -------------------------------------------------------------- arithmetic

    def __add__(self, other):
        other = self._lift(other)
        return HyperDual(self.val + other.val, self.grad + other.grad,
                         self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self):
        return HyperDual(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        other = self._lift(other)
        return HyperDual(self.val - other.val, self.grad - other.grad,
                         self.hess - other.hess)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        a, b = self, other
        val = a.val * b.val
        grad = a.grad * b.val[..., None] + b.grad * a.val[..., None]
        hess = (a.hess * b.val[..., None, None]
                + b.hess * a.val[..., None, None]
                + _outer(a.grad, b.grad) + _outer(b.grad, a.grad))
        return HyperDual(val, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if np.any(other.val == 0.0):
            raise DomainError("division by zero")
        return self * other._recip()

    def __rtruediv__(self, other):
        if np.any(self.val == 0.0):
            raise DomainError("division by zero")
        return self._recip() * other

    def _recip(self):
        v = self.val
        return self._unary(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __pow__(self, p):
        if isinstance(p, HyperDual):
            return exp(p * log(self))
        p = float(p)
        if p == 0.0:
            return HyperDual.constant(1.0, self.nvars, self.val.shape)
        if p == 1.0:
            return self
        v = self.val
        if p != int(p) and np.any(v < 0.0):
            raise DomainError("negative base with non-integer exponent")
        if p < 2.0 and p != int(p) and np.any(v == 0.0):
            raise DomainError("zero base with exponent < 2")
        if np.any(v == 0.0) and p < 0:
            raise DomainError("division by zero in power")
        return self._unary(v**p, p * v**(p - 1.0), p * (p - 1.0) * v**(p - 2.0))

    def __rpow__(self, base):
        base = np.asarray(base, dtype=float)
        if np.any(base <= 0.0):
            raise DomainError("non-positive base with variable exponent")
        return exp(self * np.log(base))

    # ------------------------------------------------------------- chain rule

    def _unary(self, fv, d1, d2):
        fv = np.asarray(fv, dtype=float)
        d1 = np.asarray(d1, dtype=float)
        d2 = np.asarray(d2, dtype=float)
        grad = d1[..., None] * self.grad
        hess = (d1[..., None, None] * self.hess
                + d2[..., None, None] * _outer(self.grad, self.grad))
        return HyperDual(fv, grad, hess)


def seed_variables(coords):
    """Seed coordinates ``coords`` of shape ``(..., n)`` as hyper-dual variables.

    Returns a list of ``n`` HyperDuals, the i-th being the i-th coordinate with
    unit gradient seed ``e_i``.
    """
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[-1]
    shape = coords.shape[:-1]
    out = []
    for i in range(n):
        grad = np.zeros(shape + (n,))
        grad[..., i] = 1.0
        out.append(HyperDual(coords[..., i], grad, np.zeros(shape + (n, n))))
    return out


# --------------------------------------------------------- elementary functions

def _dispatch(x, np_fn, hd_fn):
    if isinstance(x, HyperDual):
        return hd_fn(x)
    return np_fn(x)


def sqrt(x):
    def hd(x):
        if np.any(x.val <= 0.0):
            raise DomainError("sqrt of non-positive value")
        s = np.sqrt(x.val)
        return x._unary(s, 0.5 / s, -0.25 / (s * x.val))
    return _dispatch(x, np.sqrt, hd)


def exp(x):
    def hd(x):
        e = np.exp(x.val)
        return x._unary(e, e, e)
    return _dispatch(x, np.exp, hd)


def log(x):
    def hd(x):
        if np.any(x.val <= 0.0):
            raise DomainError("log of non-positive value")
        v = x.val
        return x._unary(np.log(v), 1.0 / v, -1.0 / v**2)
    return _dispatch(x, np.log, hd)


def log1p(x):
    def hd(x):
        if np.any(x.val <= -1.0):
            raise DomainError("log1p of value <= -1")
        w = 1.0 + x.val
        return x._unary(np.log1p(x.val), 1.0 / w, -1.0 / w**2)
    return _dispatch(x, np.log1p, hd)


def expm1(x):
    def hd(x):
        e = np.exp(x.val)
        return x._unary(np.expm1(x.val), e, e)
    return _dispatch(x, np.expm1, hd)


def sin(x):
    def hd(x):
        s, c = np.sin(x.val), np.cos(x.val)
        return x._unary(s, c, -s)
    return _dispatch(x, np.sin, hd)


def cos(x):
    def hd(x):
        s, c = np.sin(x.val), np.cos(x.val)
        return x._unary(c, -s, -c)
    return _dispatch(x, np.cos, hd)


def tan(x):
    def hd(x):
        t = np.tan(x.val)
        sec2 = 1.0 + t**2
        return x._unary(t, sec2, 2.0 * t * sec2)
    return _dispatch(x, np.tan, hd)


def sinh(x):
    def hd(x):
        s, c = np.sinh(x.val), np.cosh(x.val)
        return x._unary(s, c, s)
    return _dispatch(x, np.sinh, hd)


def cosh(x):
    def hd(x):
        s, c = np.sinh(x.val), np.cosh(x.val)
        return x._unary(c, s, c)
    return _dispatch(x, np.cosh, hd)


def tanh(x):
    def hd(x):
        t = np.tanh(x.val)
        sech2 = 1.0 - t**2
        return x._unary(t, sech2, -2.0 * t * sech2)
    return _dispatch(x, np.tanh, hd)
