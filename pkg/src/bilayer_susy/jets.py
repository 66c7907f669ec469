"""Truncated Taylor series ("jets") over numpy arrays.

A jet of order K stores c[k] = f^(k)(x) / k! for k = 0..K at every sample
point, so closed-form expressions built from jets carry exact derivatives
without finite differencing.  Binary operations truncate to the smaller order.
"""

import math

import numpy as np


class Jet:
    __slots__ = ("c",)
    __array_priority__ = 100

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs)
        if self.c.ndim == 0:
            raise ValueError("jet needs at least one coefficient row")

    # construction -----------------------------------------------------
    @classmethod
    def variable(cls, x, order, dtype=float):
        x = np.asarray(x, dtype=dtype)
        c = np.zeros((order + 1,) + x.shape, dtype=dtype)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, order, shape=(), dtype=None):
        value = np.asarray(value)
        dtype = np.result_type(value, float) if dtype is None else dtype
        c = np.zeros((order + 1,) + np.broadcast_shapes(shape, value.shape), dtype=dtype)
        c[0] = value
        return cls(c)

    @property
    def order(self):
        return self.c.shape[0] - 1

    @property
    def value(self):
        return self.c[0]

    def derivative(self, k=1):
        """Value of the k-th derivative (not a jet)."""
        if k > self.order:
            raise ValueError(f"jet of order {self.order} has no derivative {k}")
        return self.c[k] * math.factorial(k)

    def derivatives(self, upto=None):
        upto = self.order if upto is None else upto
        return [self.derivative(k) for k in range(upto + 1)]

    def deriv(self, m=1):
        """Jet of the m-th derivative, order reduced by m."""
        c = self.c
        for _ in range(m):
            k = np.arange(1, c.shape[0]).reshape((-1,) + (1,) * (c.ndim - 1))
            c = c[1:] * k
        return Jet(c)

    def truncate(self, order):
        return Jet(self.c[: order + 1])

    def taylor_eval(self, dx):
        """Sum of the series at displacement dx (Horner)."""
        out = self.c[-1]
        for k in range(self.order - 1, -1, -1):
            out = out * dx + self.c[k]
        return out

    @property
    def real(self):
        return Jet(self.c.real)

    @property
    def imag(self):
        return Jet(self.c.imag)

    def conj(self):
        return Jet(np.conj(self.c))

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.c[(slice(None),) + idx])

    def __repr__(self):
        return f"Jet(order={self.order}, shape={self.c.shape[1:]})"

    # arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return self.c[: k + 1], other.c[: k + 1]
        return self.c, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            other = np.asarray(other)
            shape = (a.shape[0],) + np.broadcast_shapes(a.shape[1:], other.shape)
            c = np.zeros(shape, dtype=np.result_type(a, other))
            c[:] = a
            c[0] = c[0] + other
            return Jet(c)
        return Jet(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return Jet(a * np.asarray(other)[None, ...])
        K = a.shape[0]
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
        for k in range(K):
            acc = a[0] * b[k]
            for i in range(1, k + 1):
                acc = acc + a[i] * b[k - i]
            out[k] = acc
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return Jet(a / np.asarray(other)[None, ...])
        return Jet(_series_div(a, b))

    def __rtruediv__(self, other):
        other = np.asarray(other)
        shape = (self.c.shape[0],) + np.broadcast_shapes(self.c.shape[1:], other.shape)
        one = np.zeros(shape, dtype=np.result_type(self.c, other))
        one[0] = other
        return Jet(_series_div(one, self.c))

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(1.0, self.order, self.c.shape[1:], np.result_type(self.c, float))
            base = self
            while p:
                if p & 1:
                    out = out * base
                p >>= 1
                if p:
                    base = base * base
            return out
        return power(self, p)


def _series_div(a, b):
    K = a.shape[0]
    q = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.result_type(a, b))
    for k in range(K):
        acc = a[k]
        for i in range(1, k + 1):
            acc = acc - b[i] * q[k - i]
        q[k] = acc / b[0]
    return q


def _as_jet(f):
    if not isinstance(f, Jet):
        raise TypeError("expected a Jet")
    return f


def exp(f):
    a = _as_jet(f).c
    e = np.zeros_like(a, dtype=np.result_type(a, float))
    e[0] = np.exp(a[0])
    for k in range(1, a.shape[0]):
        acc = 0.0
        for i in range(1, k + 1):
            acc = acc + i * a[i] * e[k - i]
        e[k] = acc / k
    return Jet(e)


def log(f):
    a = _as_jet(f).c
    out = np.zeros_like(a, dtype=np.result_type(a, float))
    out[0] = np.log(a[0])
    for k in range(1, a.shape[0]):
        acc = a[k]
        for i in range(1, k):
            acc = acc - i * out[i] * a[k - i] / k
        out[k] = acc / a[0]
    return Jet(out)


def power(f, r):
    """f**r for real or complex r; needs f != 0 (principal branch)."""
    a = _as_jet(f).c
    p = np.zeros_like(a, dtype=np.result_type(a, r, float))
    p[0] = np.power(a[0].astype(p.dtype), r)
    for k in range(1, a.shape[0]):
        acc = 0.0
        for i in range(1, k + 1):
            acc = acc + (r * i - (k - i)) * a[i] * p[k - i]
        p[k] = acc / (k * a[0])
    return Jet(p)


def sincos(f):
    a = _as_jet(f).c
    dt = np.result_type(a, float)
    s = np.zeros_like(a, dtype=dt)
    c = np.zeros_like(a, dtype=dt)
    s[0], c[0] = np.sin(a[0]), np.cos(a[0])
    for k in range(1, a.shape[0]):
        acc_s = 0.0
        acc_c = 0.0
        for i in range(1, k + 1):
            acc_s = acc_s + i * a[i] * c[k - i]
            acc_c = acc_c + i * a[i] * s[k - i]
        s[k] = acc_s / k
        c[k] = -acc_c / k
    return Jet(s), Jet(c)


def sin(f):
    return sincos(f)[0]


def cos(f):
    return sincos(f)[1]


def cosh(f):
    e = exp(f)
    return (e + 1.0 / e) * 0.5


def log_cosh(f):
    """log(cosh f) without overflow for large |f| (real jets)."""
    a = _as_jet(f).c
    sgn = np.where(a[0] >= 0, 1.0, -1.0)
    g = Jet(a * sgn)                       # |f| at the base point
    return g + log(1.0 + exp(-2.0 * g)) - math.log(2.0)


def tanh(f):
    a = _as_jet(f).c
    t = np.zeros_like(a, dtype=np.result_type(a, float))
    u = np.zeros_like(t)                   # 1 - t^2
    t[0] = np.tanh(a[0])
    u[0] = 1.0 - t[0] ** 2
    for k in range(1, a.shape[0]):
        acc = 0.0
        for i in range(1, k + 1):
            acc = acc + i * a[i] * u[k - i]
        t[k] = acc / k
        sq = 0.0
        for i in range(0, k + 1):
            sq = sq + t[i] * t[k - i]
        u[k] = -sq
    return Jet(t)


def sqrt(f):
    return power(f, 0.5)


def horner(coeffs, f):
    """Polynomial sum(coeffs[i] * f**i) evaluated on a jet or array."""
    out = coeffs[-1] + 0 * f
    for c in coeffs[-2::-1]:
        out = out * f + c
    return out
