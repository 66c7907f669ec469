"""Special functions used by the eigenfunctions and closed-form integrals.

Everything here is written against numpy only.  The orthogonal polynomials
work on plain arrays and on :class:`~bilayer_susy.jets.Jet` objects alike.
"""

import math

import numpy as np

from .errors import ConvergenceFailure, DomainError, InvalidArgument, ParameterPole

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_P = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_MAX_SERIES_TERMS = 100_000


def _is_nonpositive_integer(v, tol=0.0):
    v = complex(v)
    return v.imag == 0 and v.real <= 0 and abs(v.real - round(v.real)) <= tol


# ---------------------------------------------------------------- gamma
def _lanczos_sum(z):
    x = _LANCZOS_P[0] + 0 * z
    for i in range(1, len(_LANCZOS_P)):
        x = x + _LANCZOS_P[i] / (z + i)
    return x


def gamma(z):
    """Gamma function for real or complex arguments (Lanczos, with reflection)."""
    z = np.asarray(z)
    is_complex = np.iscomplexobj(z)
    zc = z.astype(complex)
    if np.any((zc.imag == 0) & (zc.real <= 0) & (zc.real == np.round(zc.real))):
        raise ParameterPole("gamma has a pole at non-positive integers")
    reflect = zc.real < 0.5
    w = np.where(reflect, 1.0 - zc, zc) - 1.0
    t = w + _LANCZOS_G + 0.5
    if is_complex:
        g = np.sqrt(2.0 * np.pi) * np.exp((w + 0.5) * np.log(t) - t) * _lanczos_sum(w)
    else:
        # libm pow keeps the large power accurate; split it to avoid overflow
        wr, tr = w.real, t.real
        half = np.power(tr, (wr + 0.5) / 2.0)
        g = np.sqrt(2.0 * np.pi) * half * (half * np.exp(-tr)) * _lanczos_sum(wr)
    with np.errstate(divide="ignore", invalid="ignore"):
        refl = np.pi / (np.sin(np.pi * zc) * g)
    out = np.where(reflect, refl, g)
    if not is_complex:
        out = out.real
    return out[()] if out.ndim == 0 else out


def loggamma(x):
    """log|Gamma(x)| for real x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("loggamma implemented for x > 0 only")
    w = x - 1.0
    t = w + _LANCZOS_G + 0.5
    out = _HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(_lanczos_sum(w))
    return out[()] if out.ndim == 0 else out


def pochhammer(x, n):
    """Rising factorial (x)_n for integer n >= 0."""
    if n < 0 or int(n) != n:
        raise InvalidArgument("pochhammer needs a non-negative integer n")
    out = 1.0 + 0 * np.asarray(x)
    for i in range(int(n)):
        out = out * (x + i)
    return out


def beta(a, b):
    return math.exp(loggamma(a) + loggamma(b) - loggamma(a + b))


# ---------------------------------------------------- incomplete gamma
def _gamma_series(s, x):
    # x^s e^-x sum x^n / (s (s+1) ... (s+n))
    term = 1.0 / s
    total = term
    for n in range(1, _MAX_SERIES_TERMS):
        term *= x / (s + n)
        total += term
        if abs(term) < abs(total) * 1e-17:
            return total * math.exp(s * math.log(x) - x)
    raise ConvergenceFailure("incomplete gamma series did not converge")


def _gamma_cf(s, x):
    # upper incomplete gamma by the modified Lentz continued fraction
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_SERIES_TERMS):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return math.exp(s * math.log(x) - x) * h
    raise ConvergenceFailure("incomplete gamma continued fraction did not converge")


def _lower_gamma_scalar(s, x):
    if x < 0:
        raise InvalidArgument("lower incomplete gamma needs x >= 0")
    if s <= 0:
        raise InvalidArgument("lower incomplete gamma needs s > 0")
    if x == 0:
        return 0.0
    if x < s + 1.0:
        return _gamma_series(s, x)
    return float(gamma(s)) - _gamma_cf(s, x)


def lower_incomplete_gamma(s, x):
    """gamma(s, x) = int_0^x t^(s-1) e^-t dt, not regularized."""
    out = np.vectorize(_lower_gamma_scalar, otypes=[float])(s, x)
    return out[()] if out.ndim == 0 else out


def _erfc_scalar(x):
    if x < 0:
        return 2.0 - _erfc_scalar(-x)
    if x == 0:
        return 1.0
    x2 = x * x
    if x2 < 1.5:
        return 1.0 - _gamma_series(0.5, x2) / math.sqrt(math.pi)
    return _gamma_cf(0.5, x2) / math.sqrt(math.pi)


def erfc(x):
    out = np.vectorize(_erfc_scalar, otypes=[float])(x)
    return out[()] if out.ndim == 0 else out


# ----------------------------------------------------- incomplete beta
def _betacf(a, b, x):
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_SERIES_TERMS):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ConvergenceFailure("incomplete beta continued fraction did not converge")


def _inc_beta_scalar(x, a, b):
    if not 0.0 <= x <= 1.0:
        raise InvalidArgument("incomplete beta needs 0 <= x <= 1")
    if a <= 0 or b <= 0:
        raise InvalidArgument("incomplete beta needs a, b > 0")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return beta(a, b)
    if x <= (a + 1.0) / (a + b + 2.0):
        return math.exp(a * math.log(x) + b * math.log1p(-x)) * _betacf(a, b, x) / a
    return beta(a, b) - _inc_beta_scalar(1.0 - x, b, a)


def incomplete_beta(x, a, b):
    """B(x; a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt, not regularized."""
    out = np.vectorize(_inc_beta_scalar, otypes=[float])(x, a, b)
    return out[()] if out.ndim == 0 else out


# ----------------------------------------------------------- 2F1
def _terminating_order(a, b):
    orders = [int(round(complex(v).real)) for v in (a, b) if _is_nonpositive_integer(v)]
    return -max(orders) if orders else None


def _series_2f1(a, b, c, z, boundary_decay=None):
    """Direct power series, summed until the tail estimate is negligible."""
    z = np.asarray(z, dtype=complex)
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    absz = np.abs(z)
    calm = np.zeros(z.shape, dtype=int)
    for n in range(_MAX_SERIES_TERMS):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total = total + term
        if boundary_decay is None:
            tail = np.abs(term) / np.maximum(1.0 - absz, 1e-3)
        else:
            # alternating-phase series: the tail is ~ |term| / |1 - z| away
            # from z = 1, and ~ n |term| / Re(c-a-b) close to it
            tail = np.abs(term) * np.minimum((n + 1.0) / boundary_decay,
                                             2.0 / np.maximum(np.abs(1.0 - z), 1e-300))
        small = tail <= 1e-16 * np.abs(total)
        calm = np.where(small, calm + 1, 0)
        active = calm < 2
        if not active.any():
            return total
    raise ConvergenceFailure("2F1 series did not converge within the term guard")


def gauss_2f1(a, b, c, z):
    """Gauss hypergeometric function 2F1(a, b; c; z).

    Terminating series are summed for any z.  Otherwise the power series is
    used for |z| <= 0.9, the Pfaff map z -> z/(z-1) when it lands inside that
    disc, and the direct series on 0.9 < |z| <= 1 when it converges (for
    |z| = 1 this needs Re(c-a-b) > 0, reached through the Euler map if
    necessary).  Anything else raises ConvergenceFailure.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    m = _terminating_order(a, b)
    if _is_nonpositive_integer(c):
        nc = -int(round(complex(c).real))
        if m is None or m > nc:
            raise ParameterPole("2F1 with c a non-positive integer")
    if m is not None:
        out = np.ones_like(z)
        term = np.ones_like(z)
        for n in range(m):
            term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
            out = out + term
        return out[0] if scalar else out

    out = np.empty_like(z)
    absz = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        zp = z / (z - 1.0)
    inner = absz <= 0.9
    pfaff = ~inner & (np.abs(zp) <= 0.9)
    rest = ~inner & ~pfaff
    if inner.any():
        out[inner] = _series_2f1(a, b, c, z[inner])
    if pfaff.any():
        zz = z[pfaff]
        out[pfaff] = (1.0 - zz) ** (-a) * _series_2f1(a, c - b, c, zp[pfaff])
    if rest.any():
        zz = z[rest]
        if np.any(np.abs(zz) > 1.0 + 1e-12):
            raise ConvergenceFailure("2F1 argument outside the unit disc after transformations")
        on_circle = np.abs(zz) > 1.0 - 1e-12
        s = complex(c - a - b).real
        res = np.empty_like(zz)
        if (~on_circle).any():
            res[~on_circle] = _series_2f1(a, b, c, zz[~on_circle])
        if on_circle.any():
            zc = zz[on_circle]
            if np.any(np.abs(zc - 1.0) < 1e-12) and s <= 0:
                raise ConvergenceFailure("2F1 diverges at z = 1 when Re(c-a-b) <= 0")
            if s > 0:
                res[on_circle] = _series_2f1(a, b, c, zc, boundary_decay=s)
            elif s < 0:
                # Euler map flips the sign of Re(c-a-b)
                res[on_circle] = (1.0 - zc) ** (c - a - b) * _series_2f1(
                    c - a, c - b, c, zc, boundary_decay=-s)
            else:
                raise ConvergenceFailure("2F1 on |z| = 1 with Re(c-a-b) = 0")
        out[rest] = res
    return out[0] if scalar else out


# ------------------------------------------------ orthogonal polynomials
def hermite(n, x):
    """Physicists' Hermite polynomial H_n by recurrence (arrays or jets)."""
    if n < 0:
        raise InvalidArgument("hermite degree must be >= 0")
    h0 = 1.0 + 0 * x
    if n == 0:
        return h0
    h1 = 2.0 * x
    for k in range(1, n):
        h0, h1 = h1, 2.0 * x * h1 - 2.0 * k * h0
    return h1


def _jacobi_coeffs(n, a, b):
    """Coefficients of P_n^(a,b) as a polynomial in y = (1 - x) / 2."""
    c = a + 1.0
    if _is_nonpositive_integer(c) and -complex(c).real < n:
        raise ParameterPole("Jacobi hypergeometric form: a + 1 is a non-positive integer")
    lead = pochhammer(c, n) / math.factorial(n)
    coeffs = []
    term = 1.0 + 0j
    for k in range(n + 1):
        coeffs.append(lead * term)
        term = term * (-n + k) * (n + a + b + 1.0 + k) / ((c + k) * (k + 1.0))
    return coeffs


def jacobi(n, a, b, x):
    """Jacobi polynomial P_n^(a,b)(x).

    Real parameters use the three-term recurrence; complex parameters (or a
    degenerate recurrence) use the terminating hypergeometric sum.
    """
    if n < 0:
        raise InvalidArgument("jacobi degree must be >= 0")
    real_params = np.isrealobj(a) and np.isrealobj(b)
    if real_params and n >= 1:
        ab = a + b
        degenerate = any(
            abs(2 * (k + 1) * (k + ab + 1) * (2 * k + ab)) < 1e-14 for k in range(1, n))
        if not degenerate:
            p0 = 1.0 + 0 * x
            p1 = (a + 1.0) + (ab + 2.0) * (x - 1.0) / 2.0
            for k in range(1, n):
                c1 = 2 * (k + 1) * (k + ab + 1) * (2 * k + ab)
                c2 = (2 * k + ab + 1) * (a * a - b * b)
                c3 = (2 * k + ab) * (2 * k + ab + 1) * (2 * k + ab + 2)
                c4 = 2 * (k + a) * (k + b) * (2 * k + ab + 2)
                p0, p1 = p1, ((c2 + c3 * x) * p1 - c4 * p0) / c1
            return p1
    if n == 0:
        return 1.0 + 0 * x
    coeffs = _jacobi_coeffs(n, a, b)
    if real_params:
        coeffs = [complex(v).real for v in coeffs]
    y = (1.0 - x) / 2.0
    out = coeffs[-1] + 0 * y
    for cf in coeffs[-2::-1]:
        out = out * y + cf
    return out


def jacobi_derivative(n, a, b, x):
    """d/dx P_n^(a,b)(x) = (n+a+b+1)/2 P_{n-1}^(a+1,b+1)(x)."""
    if n == 0:
        return 0.0 * x
    return (n + a + b + 1.0) / 2.0 * jacobi(n - 1, a + 1.0, b + 1.0, x)


def hermite_derivative(n, x):
    if n == 0:
        return 0.0 * x
    return 2.0 * n * hermite(n - 1, x)


def orthopoly(family, n, x, params=()):
    """Dispatch by family name: 'hermite' or 'jacobi' (params = (a, b))."""
    if family == "hermite":
        return hermite(n, x)
    if family == "jacobi":
        a, b = params
        return jacobi(n, a, b, x)
    raise InvalidArgument(f"unknown polynomial family {family!r}")


def gamma_family(kind, *args):
    """Dispatch for 'gamma' (s), 'lower_incomplete' (s, x) and 'erfc' (x)."""
    table = {"gamma": gamma, "lower_incomplete": lower_incomplete_gamma, "erfc": erfc}
    if kind not in table:
        raise InvalidArgument(f"unknown gamma-family kind {kind!r}")
    return table[kind](*args)
