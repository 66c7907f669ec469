"""Exactly solvable one-dimensional seed potentials.

Three families are provided: the shifted harmonic oscillator, the
trigonometric Rosen-Morse well on (0, pi/alpha) and the hyperbolic
Rosen-Morse well on the real line.  Units: hbar = m = 1 with the
Hamiltonian written as H = -d^2/dx^2 + V(x).

Eigenfunctions are returned normalised and real, as jets so that any
number of exact derivatives is available.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import jets as J
from .errors import DomainError, InvalidArgument, NoSuchLevel
from .numerics import grid_with_spacing, integrate
from .special import hermite, jacobi

TRIG_EDGE = 1e-4     # distance kept from the trigonometric walls


def _check_positive(**kw):
    for name, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise InvalidArgument(f"{name} must be a positive finite number, got {v!r}")


@dataclass(frozen=True)
class PotentialModel:
    """Common interface; concrete families below."""

    family = "abstract"

    # to be provided by subclasses -------------------------------------
    def potential_jet(self, X):
        raise NotImplementedError

    def energy(self, n):
        raise NotImplementedError

    def bound_state_count(self):
        raise NotImplementedError

    def _parts(self, n, X):
        """(log-envelope jet, polynomial jet) with psi_n = exp(L) P."""
        raise NotImplementedError

    def _raw_jet(self, n, X):
        L, P = self._parts(n, X)
        return J.exp(L) * P

    def domain(self):
        raise NotImplementedError

    def support(self, n):
        raise NotImplementedError

    def default_grid(self, n_max=6):
        raise NotImplementedError

    @property
    def length_scale(self):
        raise NotImplementedError

    def params(self):
        raise NotImplementedError

    # shared -----------------------------------------------------------
    def potential(self, x):
        self.check_inside(x)
        return self.potential_jet(J.Jet.variable(x, 0)).value

    def check_level(self, n):
        if int(n) != n or n < 0:
            raise InvalidArgument(f"level index must be a non-negative integer, got {n!r}")
        if n >= self.bound_state_count():
            raise NoSuchLevel(f"{self.family} with {self.params()} has no level n={n}")

    def check_inside(self, x):
        lo, hi = self.domain()
        x = np.asarray(x)
        if np.any((x <= lo) | (x >= hi)) or not np.all(np.isfinite(x)):
            raise DomainError(f"points outside the open domain ({lo}, {hi})")

    def _phase(self, n):
        return 1.0

    def eigen_jet(self, n, x, order=0, scaled=False):
        """Normalised real eigenfunction psi_n as a jet of the given order.

        With ``scaled=True`` returns ``(jet, shift)`` where the jet holds
        psi_n * exp(-shift) at every point; ratios of jets sharing a shift
        are then free of underflow in the far tails.
        """
        self.check_level(n)
        self.check_inside(x)
        L, P = self._parts(n, J.Jet.variable(x, order))
        shift = np.real(L.value) if scaled else 0.0
        out = J.exp(L - shift) * P * (_normalisation(self, n) / self._phase(n))
        if np.iscomplexobj(out.c):
            out = out.real
        return (out, shift) if scaled else out

    def eigenfunction(self, n, x):
        return self.eigen_jet(n, x, 0).value

    def scaled_wronskian(self, n1, n2, x):
        """W(psi_n1, psi_n2) exp(-shift1 - shift2), shifts as in eigen_jet.

        With psi = exp(L) P the envelope terms cancel analytically:
        W = exp(L1 + L2) [P1 P2' - P1' P2 + (L2' - L1') P1 P2].
        """
        self.check_level(n1)
        self.check_level(n2)
        self.check_inside(x)
        X = J.Jet.variable(x, 1)
        L1, P1 = self._parts(n1, X)
        L2, P2 = self._parts(n2, X)
        phase = np.exp(1j * (np.imag(L1.value) + np.imag(L2.value))) if np.iscomplexobj(L1.c) else 1.0
        core = (P1.value * P2.derivative(1) - P1.derivative(1) * P2.value
                + (L2.derivative(1) - L1.derivative(1)) * P1.value * P2.value)
        out = core * phase * (_normalisation(self, n1) * _normalisation(self, n2)
                              / (self._phase(n1) * self._phase(n2)))
        return np.real(out) if np.iscomplexobj(out) else out


def _raw_abs2(model, n):
    phase = model._phase(n)

    def f(x):
        v = model._raw_jet(n, J.Jet.variable(x, 0)).value / phase
        return np.abs(v) ** 2
    return f


@lru_cache(maxsize=512)
def _normalisation(model, n):
    lo, hi = model.support(n)
    return 1.0 / math.sqrt(integrate(_raw_abs2(model, n), lo, hi, rel_tol=1e-12))


# ------------------------------------------------------------ oscillator
@dataclass(frozen=True)
class ShiftedOscillator(PotentialModel):
    """V = (omega^2/4) (x + 2 kappa/omega)^2 - omega/2, E_n = n omega."""

    omega: float = 1.0
    kappa: float = 0.0
    family = "shifted_ho"

    def __post_init__(self):
        _check_positive(omega=self.omega)
        if not np.isfinite(self.kappa):
            raise InvalidArgument("kappa must be finite")

    def params(self):
        return {"omega": self.omega, "kappa": self.kappa}

    @property
    def center(self):
        return -2.0 * self.kappa / self.omega

    @property
    def length_scale(self):
        return 1.0 / math.sqrt(self.omega)

    def zeta(self, X):
        return (X - self.center) * math.sqrt(self.omega / 2.0)

    def potential_jet(self, X):
        y = X - self.center
        return y * y * (self.omega**2 / 4.0) - self.omega / 2.0

    def energy(self, n):
        self.check_level(n)
        return n * self.omega

    def bound_state_count(self):
        return math.inf

    def domain(self):
        return (-math.inf, math.inf)

    def support(self, n):
        half = (math.sqrt(2 * n + 1) + 7.5) / math.sqrt(self.omega / 2.0)
        return (self.center - half, self.center + half)

    def default_grid(self, n_max=6):
        lo, hi = self.support(n_max)
        half = max(12.0 / math.sqrt(self.omega), (hi - lo) / 2)
        return grid_with_spacing(self.center - half, self.center + half, 0.01 / math.sqrt(self.omega))

    def _parts(self, n, X):
        z = self.zeta(X)
        return z * z * -0.5, hermite(n, z)


# ---------------------------------------------- trigonometric Rosen-Morse
@dataclass(frozen=True)
class TrigRosenMorse(PotentialModel):
    """V = D(D-alpha) csc^2(alpha x) - 2 D kappa cot(alpha x) - D^2 + kappa^2
    on 0 < x < pi/alpha."""

    D: float = 4.0
    alpha: float = 1.0
    kappa: float = 0.0
    family = "trig_rm"

    def __post_init__(self):
        _check_positive(D=self.D, alpha=self.alpha)
        if not np.isfinite(self.kappa):
            raise InvalidArgument("kappa must be finite")

    def params(self):
        return {"D": self.D, "alpha": self.alpha, "kappa": self.kappa}

    @property
    def s(self):
        return self.D / self.alpha

    @property
    def length_scale(self):
        return 1.0 / self.alpha

    def a(self, n):
        return -self.kappa * self.D / (self.alpha * (self.D + n * self.alpha))

    def zeta(self, X):
        s, c = J.sincos(X * self.alpha)
        return c / s

    def potential_jet(self, X):
        D, al, ka = self.D, self.alpha, self.kappa
        s, c = J.sincos(X * al)
        return D * (D - al) / (s * s) - 2.0 * D * ka * (c / s) - D * D + ka * ka

    def energy(self, n):
        self.check_level(n)
        D, al, ka = self.D, self.alpha, self.kappa
        m = D + n * al
        return ka * ka - D * D + m * m - ka * ka * D * D / (m * m)

    def bound_state_count(self):
        return math.inf

    def domain(self):
        return (0.0, math.pi / self.alpha)

    def support(self, n):
        return (TRIG_EDGE, math.pi / self.alpha - TRIG_EDGE)

    def default_grid(self, n_max=6):
        return grid_with_spacing(TRIG_EDGE, math.pi / self.alpha - TRIG_EDGE, 1e-3 / self.alpha)

    def _parts(self, n, X):
        al = self.alpha
        a = self.a(n)
        p = -self.s - n
        sn, cs = J.sincos(X * al)
        poly = jacobi(n, complex(p, -a), complex(p, a), (cs / sn) * 1j)
        return J.log(sn) * (self.s + n) + X * (a * al), poly

    @lru_cache(maxsize=256)
    def _phase(self, n):
        # the polynomial carries a constant complex phase; fix it at the
        # largest-modulus point of a fixed probe set
        probe = np.linspace(0.0, math.pi / self.alpha, 35)[1:-1]
        v = self._raw_jet(n, J.Jet.variable(probe, 0)).value
        ref = v[np.argmax(np.abs(v))]
        return ref / abs(ref)


# ------------------------------------------------- hyperbolic Rosen-Morse
@dataclass(frozen=True)
class HypRosenMorse(PotentialModel):
    """V = D^2 + kappa^2 - D(D+alpha) sech^2(alpha x) + 2 kappa D tanh(alpha x)."""

    D: float = 8.0
    alpha: float = 1.0
    kappa: float = 1.0
    family = "hyp_rm"

    def __post_init__(self):
        _check_positive(D=self.D, alpha=self.alpha)
        if not np.isfinite(self.kappa):
            raise InvalidArgument("kappa must be finite")

    def params(self):
        return {"D": self.D, "alpha": self.alpha, "kappa": self.kappa}

    @property
    def s(self):
        return self.D / self.alpha

    @property
    def length_scale(self):
        return 1.0 / self.alpha

    def a(self, n):
        return self.D * self.kappa / (self.alpha * (self.D - n * self.alpha))

    def admits(self, n):
        # exact rationals: ties on the admission boundary are not admitted
        D, m = Fraction(self.D), Fraction(self.D) - n * Fraction(self.alpha)
        return m > 0 and abs(Fraction(self.kappa)) * D < m * m

    def zeta(self, X):
        return J.tanh(X * self.alpha)

    def potential_jet(self, X):
        D, al, ka = self.D, self.alpha, self.kappa
        t = J.tanh(X * al)
        return D * D + ka * ka - D * (D + al) * (1.0 - t * t) + 2.0 * ka * D * t

    def energy(self, n):
        self.check_level(n)
        D, al, ka = self.D, self.alpha, self.kappa
        m = D - n * al
        return D * D + ka * ka - m * m - ka * ka * D * D / (m * m)

    def bound_state_count(self):
        n = 0
        while self.admits(n):
            n += 1
        return n

    def domain(self):
        return (-math.inf, math.inf)

    def decay_rates(self, n):
        """Exponential decay rates of psi_n towards -inf and +inf."""
        base = self.s - n
        a = self.a(n)
        return self.alpha * (base - a), self.alpha * (base + a)

    def support(self, n):
        left, right = self.decay_rates(n)
        pad = 5.0 / self.alpha
        return (-(36.0 / left + pad), 36.0 / right + pad)

    def default_grid(self, n_max=None):
        count = self.bound_state_count()
        top = count - 1 if n_max is None else min(n_max, count - 1)
        lo, hi = (-14.0 / self.alpha, 14.0 / self.alpha)
        if top >= 0:
            a, b = self.support(top)
            lo, hi = min(lo, a), max(hi, b)
        return grid_with_spacing(lo, hi, 0.005 / self.alpha)

    def _parts(self, n, X):
        y = X * self.alpha
        a = self.a(n)
        m = self.s - n
        return y * -a - J.log_cosh(y) * m, jacobi(n, m + a, m - a, J.tanh(y))


FAMILIES = {
    "shifted_ho": ShiftedOscillator,
    "trig_rm": TrigRosenMorse,
    "hyp_rm": HypRosenMorse,
}


def make_model(family, **params):
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise InvalidArgument(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    return cls(**params)


# functional aliases ----------------------------------------------------
def potential_value(model, x):
    return model.potential(x)


def eigenvalue0(model, n):
    return model.energy(n)


def eigenfunction0(model, n, x):
    """Closed-form psi_n without normalisation, global phase removed.

    Multiply by normalization0(model, n) for the unit-norm state.
    """
    model.check_level(n)
    model.check_inside(x)
    v = model._raw_jet(n, J.Jet.variable(np.asarray(x, dtype=float), 0)).value / model._phase(n)
    if np.iscomplexobj(v):
        if np.any(np.abs(v.imag) > 1e-9 * np.maximum(np.abs(v), 1e-300)):
            raise InvalidArgument("eigenfunction did not come out real after phase removal")
        v = v.real
    return v


def normalization0(model, n, grid=None):
    """Constant c_n making the closed-form psi_n unit-normalised.

    With a grid, the integral runs over the grid's span instead of the
    model's own support interval.
    """
    model.check_level(n)
    if grid is None:
        return _normalisation(model, n)
    return 1.0 / math.sqrt(integrate(_raw_abs2(model, n), grid.x_min, grid.x_max, rel_tol=1e-12))


def bound_state_count(model):
    return model.bound_state_count()
