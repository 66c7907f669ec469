"""Second-order supersymmetric transformations of the seed potentials.

The intertwiner is L2^- = d^2/dx^2 + eta d/dx + gamma and its adjoint
L2^+ = d^2/dx^2 - eta d/dx + gamma - eta'.  The partner potential is
V2 = V0 + 2 eta' and, in the bilayer setting, the magnetic field is
B = eta'/2 (units hbar = m* = e/c = 1).

Two constructions are supported:

* ``ConsecutiveTransform``: seeds psi_j and psi_{j+1} with
  eps1 = E_{j+1}, eps2 = E_j and eta = -W'/W for W = W(psi_j, psi_{j+1}).
  Both levels are removed from the partner spectrum.
* ``ConfluentTransform``: a single seed psi_j, eps1 = eps2 = E_j and
  eta = psi_j^2 / w with w = w0 - int_{x0}^x psi_j^2.  w0 <= 0 or w0 >= 1
  keeps w nodeless; w0 in {0, 1} removes level j.

All derivatives come from jets, so eta, gamma, V2 and B are exact up to
rounding apart from the confluent w, which is obtained by Gauss-Legendre
quadrature with asymptotic end corrections.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import jets as J
from .errors import (ClosedFormUnavailable, InvalidArgument, NoSuchLevel,
                     SingularPoint, TransformSingular)
from .numerics import SampledFunction, differentiate, gauss_legendre, grid_with_spacing
from .potentials import HypRosenMorse, ShiftedOscillator, TrigRosenMorse
from .special import erfc, gamma, gauss_2f1, incomplete_beta, lower_incomplete_gamma, pochhammer

TAIL_ORDER = 8          # jet order used by the asymptotic tail series


# ---------------------------------------------------------------- helpers
def _tail_ratio(psi):
    """S with int_{-inf}^x psi^2 = psi^2 S (left end, S > 0) or
    int_x^inf psi^2 = -psi^2 S (right end, S < 0).

    Asymptotic series S = phi - phi phi' + phi (phi phi')' - ..., phi = g/g',
    g = psi^2; it is scale free, so ``psi`` may be a scaled jet.
    """
    g = psi * psi
    phi = g / g.deriv()
    term = phi
    total = term.value.copy()
    for _ in range(psi.order - 2):
        term = -(phi * term.deriv())
        total = total + term.value
    return total


def _tail_integral(model, n, x, side):
    """int_{-inf}^x psi_n^2 (side='left') or int_x^inf psi_n^2 (side='right')."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi, shift = model.eigen_jet(n, x, TAIL_ORDER, scaled=True)
    shift = np.broadcast_to(shift, x.shape)
    out = np.zeros_like(x)
    live = (psi.value != 0) & (shift > -700.0)
    if live.any():
        p = psi[live]
        val = (p.value * np.exp(shift[live])) ** 2 * _tail_ratio(p)
        out[live] = val if side == "left" else -val
    return out


@dataclass(frozen=True)
class SusyTransform:
    model: object
    j: int

    kind = "abstract"

    def __post_init__(self):
        if int(self.j) != self.j or self.j < 0:
            raise InvalidArgument("seed index j must be a non-negative integer")
        for lvl in self.seed_levels():
            if lvl >= self.model.bound_state_count():
                raise NoSuchLevel(f"seed level {lvl} does not exist for {self.model}")

    # interface ---------------------------------------------------------
    def seed_levels(self):
        raise NotImplementedError

    @property
    def eps1(self):
        raise NotImplementedError

    @property
    def eps2(self):
        raise NotImplementedError

    def deleted_levels(self):
        raise NotImplementedError

    def eta_jet(self, x, order):
        raise NotImplementedError

    def gamma_jet(self, x, order):
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError

    # shared -----------------------------------------------------------
    @property
    def length_scale(self):
        return self.model.length_scale

    def eta(self, x):
        return self.eta_jet(x, 0).value

    def partner_levels(self, n_max):
        """Indices n <= n_max of V0 levels that survive in V2."""
        top = min(n_max, self.model.bound_state_count() - 1)
        gone = set(self.deleted_levels())
        return [n for n in range(int(top) + 1) if n not in gone]

    def default_grid(self, n_max=6):
        n_max = max(n_max, max(self.seed_levels()) + 1)
        if isinstance(self.model, HypRosenMorse):
            return self.model.default_grid()
        return self.model.default_grid(n_max)

    def eta_zeros(self, x):
        """Sign changes of eta between adjacent sample points (refined by
        bisection)."""
        x = np.asarray(x, dtype=float)
        e = self.eta(x)
        idx = np.nonzero(np.sign(e[:-1]) * np.sign(e[1:]) <= 0)[0]
        zeros = []
        for i in idx:
            a, b = x[i], x[i + 1]
            fa = e[i]
            if fa == 0:
                zeros.append(float(a))
                continue
            for _ in range(60):
                m = 0.5 * (a + b)
                fm = self.eta(np.array([m]))[0]
                if fm == 0:
                    a = b = m
                    break
                if np.sign(fm) == np.sign(fa):
                    a, fa = m, fm
                else:
                    b = m
            zeros.append(float(0.5 * (a + b)))
        return sorted(set(zeros))


# ----------------------------------------------------- consecutive levels
@dataclass(frozen=True)
class ConsecutiveTransform(SusyTransform):
    kind = "consecutive"

    def seed_levels(self):
        return (self.j, self.j + 1)

    @property
    def eps1(self):
        return self.model.energy(self.j + 1)

    @property
    def eps2(self):
        return self.model.energy(self.j)

    def deleted_levels(self):
        return (self.j, self.j + 1)

    def describe(self):
        return {"kind": self.kind, "j": self.j}

    def _seeds(self, x, order):
        # scaled seeds: W, W' and the gamma numerator share the factor
        # exp(-shift1 - shift2), which cancels in every ratio used below
        K = max(order, 1)
        u1, _ = self.model.eigen_jet(self.j, x, K, scaled=True)
        u2, _ = self.model.eigen_jet(self.j + 1, x, K, scaled=True)
        # W = u1 u2' - u1' u2 with W' = (eps2 - eps1) u1 u2 (Abel); building
        # W from W' keeps every coefficient consistent with the seeds
        prod = u1 * u2
        w = np.zeros((order + 2,) + prod.c.shape[1:])
        w[0] = self.model.scaled_wronskian(self.j, self.j + 1, x)
        c = self.eps2 - self.eps1
        for k in range(1, order + 2):
            w[k] = c * prod.c[k - 1] / k
        return u1, u2, J.Jet(w)

    def eta_jet(self, x, order):
        _, _, w = self._seeds(x, order)
        return -(w.deriv() / w.truncate(order))

    def gamma_jet(self, x, order):
        # gamma = -V0 - (E_{j+1} u1' u2 - E_j u1 u2') / W, free of 1/eta
        u1, u2, w = self._seeds(x, order + 1)
        V = self.model.potential_jet(J.Jet.variable(x, order))
        num = u1.deriv() * u2 * self.eps1 - u1 * u2.deriv() * self.eps2
        return (-V - num / w).truncate(order)

    def check_nodeless(self, x):
        _, _, w = self._seeds(np.asarray(x, dtype=float), 0)
        v = w.value
        if np.any(v == 0) or np.any(np.sign(v) != np.sign(v[0])):
            raise TransformSingular("Wronskian of the seeds changes sign on the grid")


# --------------------------------------------------------------- confluent
class _SeedIntegral:
    """F(x) = int_{x0}^x psi_j^2 and its complement G(x) = 1 - F(x).

    Gauss-Legendre on a fine cell grid over the seed's support plus the
    asymptotic tail series beyond it; F is accumulated from the left and G
    from the right so both stay accurate where they are small.
    """

    def __init__(self, model, j):
        self.model, self.j = model, j
        lo, hi = model.support(j)
        grid = grid_with_spacing(lo, hi, 0.05 * model.length_scale)
        self.nodes = grid.points
        f = lambda t: model.eigenfunction(j, t) ** 2
        cells = gauss_legendre(f, self.nodes[:-1], self.nodes[1:])
        left = _tail_integral(model, j, self.nodes[:1], "left")[0]
        right = _tail_integral(model, j, self.nodes[-1:], "right")[0]
        self.F = left + np.concatenate([[0.0], np.cumsum(cells)])
        self.G = right + np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
        self.total = self.F[-1] + right
        self.split = self.nodes[np.argmin(np.abs(self.F - 0.5))]
        self._f = f

    def _partial(self, a, b):
        if a.size == 0:
            return a
        return gauss_legendre(self._f, a, b)

    def left(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        outside = x < self.nodes[0]
        if outside.any():
            out[outside] = _tail_integral(self.model, self.j, x[outside], "left")
        inside = ~outside
        if inside.any():
            xi = x[inside]
            i = np.clip(np.searchsorted(self.nodes, xi, side="right") - 1, 0, len(self.nodes) - 2)
            out[inside] = self.F[i] + self._partial(self.nodes[i], xi)
        return out

    def right(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        outside = x > self.nodes[-1]
        if outside.any():
            out[outside] = _tail_integral(self.model, self.j, x[outside], "right")
        inside = ~outside
        if inside.any():
            xi = x[inside]
            i = np.clip(np.searchsorted(self.nodes, xi, side="left"), 1, len(self.nodes) - 1)
            out[inside] = self.G[i] + self._partial(xi, self.nodes[i])
        return out

    def fraction(self, x):
        """F(x), taken from whichever end is closer."""
        x = np.asarray(x, dtype=float)
        return np.where(x <= self.split, self.left(x), 1.0 - self.right(x))


@dataclass(frozen=True)
class ConfluentTransform(SusyTransform):
    w0: float = -1.0
    kind = "confluent"

    def __post_init__(self):
        super().__post_init__()
        if not np.isfinite(self.w0):
            raise InvalidArgument("w0 must be finite")
        if 0.0 < self.w0 < 1.0:
            raise InvalidArgument(f"w0 = {self.w0} lies in the forbidden band (0, 1): w would vanish inside the domain")

    def seed_levels(self):
        return (self.j,)

    @property
    def eps1(self):
        return self.model.energy(self.j)

    eps2 = eps1

    def deleted_levels(self):
        return (self.j,) if self.w0 in (0.0, 1.0) else ()

    def describe(self):
        return {"kind": self.kind, "j": self.j, "w0": self.w0}

    @cached_property
    def _integral(self):
        return _SeedIntegral(self.model, self.j)

    def seed_fraction(self, x):
        """int_{x0}^x psi_j^2 with x0 the left end of the domain."""
        return self._integral.fraction(x)

    def w_value(self, x):
        x = np.asarray(x, dtype=float)
        I = self._integral
        left = x <= I.split
        out = np.empty_like(x)
        if left.any():
            out[left] = self.w0 - I.left(x[left])
        if (~left).any():
            out[~left] = (self.w0 - 1.0) + I.right(x[~left])
        return out

    def _scaled_w0(self, x, psi, shift):
        """w(x) * exp(-2 shift) for a seed jet scaled by exp(-shift).

        Returns the values and a mask of points where w0 exp(-2 shift)
        overflows; there eta is below 1e-300 and is set to zero.
        """
        I = self._integral
        left = x <= I.split
        c = np.where(left, self.w0, self.w0 - 1.0)
        e2 = -2.0 * shift
        out = np.zeros_like(x)
        huge = (c != 0) & (e2 > 700.0)
        ok = ~huge
        cexp = np.zeros_like(x)
        live = ok & (c != 0)
        cexp[live] = c[live] * np.exp(e2[live])
        outer_l = left & (x < I.nodes[0])
        outer_r = ~left & (x > I.nodes[-1])
        inner = ~outer_l & ~outer_r & ok
        if inner.any():
            xi = x[inner]
            part = np.where(left[inner], -I.left(xi), I.right(xi))
            out[inner] = cexp[inner] + part * np.exp(e2[inner])
        for mask, sign in ((outer_l & ok, -1.0), (outer_r & ok, -1.0)):
            if mask.any():
                tail, _ = self.model.eigen_jet(self.j, x[mask], TAIL_ORDER, scaled=True)
                # left: -F = -g S ; right: +G = -g S
                out[mask] = cexp[mask] + sign * tail.value**2 * _tail_ratio(tail)
        return out, huge

    def _seeds(self, x, order):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        psi, shift = self.model.eigen_jet(self.j, x, order, scaled=True)
        shift = np.broadcast_to(shift, x.shape).astype(float)
        w0s, huge = self._scaled_w0(x, psi, shift)
        if huge.any():
            c = psi.c.copy()
            c[:, huge] = 0.0
            psi = J.Jet(c)
            w0s[huge] = 1.0
        g = psi * psi
        w = np.zeros((order + 2,) + g.c.shape[1:])
        w[0] = w0s
        for k in range(1, order + 2):
            w[k] = -g.c[k - 1] / k
        return psi, g, J.Jet(w)


    def eta_jet(self, x, order):
        _, g, w = self._seeds(x, order)
        return g / w.truncate(order)

    def gamma_jet(self, x, order):
        # gamma = eps - V0 - psi psi' / w, free of 1/eta
        psi, _, w = self._seeds(x, order + 1)
        V = self.model.potential_jet(J.Jet.variable(x, order))
        return (self.eps1 - V - psi * psi.deriv() / w).truncate(order)


def make_transform(model, kind, j, w0=None):
    if kind == "consecutive":
        if w0 is not None:
            raise InvalidArgument("w0 only applies to the confluent transform")
        return ConsecutiveTransform(model, int(j))
    if kind == "confluent":
        return ConfluentTransform(model, int(j), -1.0 if w0 is None else float(w0))
    raise InvalidArgument(f"unknown transform kind {kind!r}")


# ------------------------------------------------ eta-only formulas
def gamma_from_eta(e0, e1, e2, eps1, eps2):
    """gamma = eta'/2 + eta^2/4 - eta''/(2 eta) + (eta'/(2 eta))^2 - ((eps1-eps2)/(2 eta))^2"""
    d = eps1 - eps2
    return e1 / 2.0 + e0 * e0 / 4.0 - e2 / (2.0 * e0) + (e1 / (2.0 * e0)) ** 2 - (d / (2.0 * e0)) ** 2


def v0_from_eta(e0, e1, e2, eps1, eps2):
    """V0 = eta''/(2 eta) - (eta'/(2 eta))^2 - eta' + eta^2/4 + (eps1+eps2)/2 + ((eps1-eps2)/(2 eta))^2"""
    d = eps1 - eps2
    return (e2 / (2.0 * e0) - (e1 / (2.0 * e0)) ** 2 - e1 + e0 * e0 / 4.0
            + (eps1 + eps2) / 2.0 + (d / (2.0 * e0)) ** 2)


def f_from_eta(e0, e1, e2, eps1, eps2):
    """Extra term f = eta'^2/(4 eta^2) - eta''/(2 eta) - (eps1-eps2)^2/(4 eta^2)."""
    d = eps1 - eps2
    return e1 * e1 / (4.0 * e0 * e0) - e2 / (2.0 * e0) - d * d / (4.0 * e0 * e0)


def _strict_formula(formula, e0, e1, e2, eps1, eps2, x=None):
    e0 = np.asarray(e0)
    bad = e0 == 0
    if np.any(bad):
        locs = np.asarray(x)[bad] if x is not None else np.nonzero(bad)[0]
        raise SingularPoint("eta vanishes; the formula divides by eta", np.atleast_1d(locs).tolist())
    return formula(e0, e1, e2, eps1, eps2)


_REGULAR_ORDER = 12


def _eta_formula(transform, x, formula, removable, fallback=None):
    """Evaluate an eta-only formula at x.

    Zeros of eta are removable singularities of these expressions.  Points
    too close to one are re-expanded: the formula is built as a jet at a
    regular neighbour x + d and its Taylor series summed back at x.  Where
    eta underflows (far tails) ``fallback`` supplies an equivalent
    expression; without one those points raise SingularPoint.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    eta = transform.eta_jet(x, 2)
    e0, e1, e2 = eta.derivatives(2)
    ell = transform.length_scale
    # an exact zero with a finite slope is a removable point, not underflow
    tiny = (np.abs(e0) < 1e-150) & (np.abs(e1) < 1e-100 / ell)
    near = (np.abs(e0) <= 1e-3 * np.abs(e1) * ell) & ~tiny
    if tiny.any() and fallback is None:
        raise SingularPoint("eta underflows at these points", x[tiny].tolist())
    if not removable and np.any(near):
        raise SingularPoint("eta vanishes near these points", x[near].tolist())
    # near and tiny points are overwritten below; anything left non-finite raises
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = formula(e0, e1, e2, transform.eps1, transform.eps2)
    if np.any(near):
        xs = x[near]
        d = 0.05 * ell
        lo, hi = transform.model.domain()
        step = np.where(xs + d < hi, d, -d)
        xa = xs + step
        probe = transform.eta_jet(xa, 1)
        flip = np.abs(probe.value) <= 1e-3 * np.abs(probe.derivative(1)) * ell
        step = np.where(flip, -step, step)
        xa = xs + step
        ej = transform.eta_jet(xa, _REGULAR_ORDER + 2)
        fj = formula(ej, ej.deriv(), ej.deriv(2), transform.eps1, transform.eps2)
        out[near] = fj.taylor_eval(-step)
    if tiny.any():
        out[tiny] = fallback(transform, x[tiny])
    if not np.all(np.isfinite(out)):
        bad = ~np.isfinite(out)
        raise SingularPoint("formula is not finite at these points", x[bad].tolist())
    return out


def _gamma_seed(transform, x):
    return transform.gamma_jet(x, 0).value


def _f_seed(transform, x):
    eta = transform.eta_jet(x, 1)
    return transform.gamma_jet(x, 0).value - eta.derivative(1) / 2.0 - eta.value**2 / 4.0


def gamma_coefficient(transform, x, removable=True):
    return _eta_formula(transform, x, gamma_from_eta, removable, _gamma_seed)


def reconstruct_v0_from_eta(transform, x, removable=True):
    return _eta_formula(transform, x, v0_from_eta, removable)


def extra_term_f(transform, x, removable=True):
    return _eta_formula(transform, x, f_from_eta, removable, _f_seed)


# ------------------------------------------------------------ operators
def l2_minus_jet(transform, x, psi):
    """L2^- psi = psi'' + eta psi' + gamma psi as a jet (order drops by 2)."""
    K = psi.order
    eta = transform.eta_jet(x, K - 1)
    gam = transform.gamma_jet(x, K - 1)
    return psi.deriv(2) + eta * psi.deriv() + gam * psi


def l2_plus_jet(transform, x, phi):
    """L2^+ phi = phi'' - eta phi' + (gamma - eta') phi."""
    K = phi.order
    eta = transform.eta_jet(x, K)
    gam = transform.gamma_jet(x, K - 1)
    return phi.deriv(2) - eta * phi.deriv() + (gam - eta.deriv()) * phi


def apply_l2_to_level(direction, transform, n, x, order=0):
    """L2^(+/-) applied to the seed-model eigenfunction psi_n, as a jet."""
    x = np.asarray(x, dtype=float)
    if direction == "minus":
        return l2_minus_jet(transform, x, transform.model.eigen_jet(n, x, order + 2))
    if direction == "plus":
        return l2_plus_jet(transform, x, transform.model.eigen_jet(n, x, order + 2))
    raise InvalidArgument("direction must be 'plus' or 'minus'")


def apply_L2(direction, transform, psi, dpsi=None, d2psi=None):
    """L2^(+/-) on a sampled function.

    Derivatives are taken from ``dpsi``/``d2psi`` when supplied, otherwise
    from 5-point stencils.  Zeros of eta are listed in ``meta['eta_zeros']``;
    they need no masking because gamma is evaluated in a form without 1/eta.
    """
    if not isinstance(psi, SampledFunction):
        raise InvalidArgument("apply_L2 expects a SampledFunction")
    x = psi.grid.points
    d1 = dpsi.values if dpsi is not None else differentiate(psi, 1).values
    d2 = d2psi.values if d2psi is not None else differentiate(psi, 2).values
    eta = transform.eta_jet(x, 1)
    gam = transform.gamma_jet(x, 0).value
    if direction == "minus":
        out = d2 + eta.value * d1 + gam * psi.values
    elif direction == "plus":
        out = d2 - eta.value * d1 + (gam - eta.derivative(1)) * psi.values
    else:
        raise InvalidArgument("direction must be 'plus' or 'minus'")
    return SampledFunction(psi.grid, out, {"eta_zeros": transform.eta_zeros(x)})


def factorization_residual(transform, n, x):
    """L2^+ L2^- psi_n - (E_n - eps1)(E_n - eps2) psi_n and the scale psi_n."""
    x = np.asarray(x, dtype=float)
    psi = transform.model.eigen_jet(n, x, 4)
    phi = l2_minus_jet(transform, x, psi)
    lhs = l2_plus_jet(transform, x, phi).value
    E = transform.model.energy(n)
    rhs = (E - transform.eps1) * (E - transform.eps2) * psi.value
    return lhs - rhs, rhs


# --------------------------------------------------------- partner profile
def partner_potential(transform, x):
    eta = transform.eta_jet(np.asarray(x, dtype=float), 1)
    return transform.model.potential(x) + 2.0 * eta.derivative(1)


def magnetic_field(transform, x):
    return 0.5 * transform.eta_jet(np.asarray(x, dtype=float), 1).derivative(1)


# ------------------------------------------------------------ closed forms
def _hyp_beta_terms(p, q, w0, z):
    Bc = math.exp(math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q))
    bhalf = p * incomplete_beta(0.5, p, q + 1) + q * incomplete_beta(0.5, q, p + 1)
    core = p * q * (1 - 2 * w0) * Bc + (p + q) * (q * incomplete_beta((z + 1) / 2, q, p + 1) + (w0 - 1) * bhalf)
    return core


def magnetic_field_closed_form(transform, x):
    """Closed-form B(x) for the cases with a published expression:
    consecutive j=1 for all three families and confluent j=0."""
    m = transform.model
    x = np.asarray(x, dtype=float)
    X = J.Jet.variable(x, 0)
    if transform.kind == "consecutive" and transform.j == 1:
        if isinstance(m, ShiftedOscillator):
            z = m.zeta(X).value
            return m.omega / 2.0 * (1.0 + (4 * z * z - 2) / (2 * z * z + 1) ** 2)
        if isinstance(m, TrigRosenMorse):
            D, al, ka = m.D, m.alpha, m.kappa
            z = m.zeta(X).value
            num = (D + al) * (2 * D + 3 * al) * z * z - 2 * ka * (2 * D + 3 * al) * z + 2 * ka * ka - al * (D + al)
            den = (D + 2 * al) * (2 * D + 3 * al) * z * z - 2 * ka * (2 * D + 3 * al) * z + 2 * ka * ka + al * (D + 2 * al)
            b_si = al / 2.0 * (2 * D + al) * (1 + z * z)
            return b_si * (1 + 4 * al * (ka * ka + (D + 2 * al) ** 2) / (2 * D + al) * num / den**2)
        if isinstance(m, HypRosenMorse):
            D, al, ka = m.D, m.alpha, m.kappa
            z = m.zeta(X).value
            num = 2 * (D * z + ka) ** 2 - (5 * D * z * z + 6 * ka * z + D) * al + (3 * z * z + 1) * al * al
            den = 2 * ka * ka + (D - 2 * al) * (z * z * (2 * D - 3 * al) + al) + 2 * ka * z * (2 * D - 3 * al)
            b_si = al / 2.0 * (2 * D - al) * (1 - z * z)
            return b_si * (1 + 4 * al * ((D - 2 * al) ** 2 - ka * ka) * num / ((2 * D - al) * den**2))
    if transform.kind == "confluent" and transform.j == 0:
        w0 = transform.w0
        if isinstance(m, ShiftedOscillator):
            z = m.zeta(X).value
            e = 2.0 * w0 - erfc(-z)          # erfc(z) - 2 + 2 w0 without cancellation
            return m.omega * (np.exp(-2 * z * z) / (math.pi * e * e) - z * np.exp(-z * z) / (math.sqrt(math.pi) * e))
        if isinstance(m, TrigRosenMorse):
            return _trig_confluent_field(m, w0, x)
        if isinstance(m, HypRosenMorse):
            D, al = m.D, m.alpha
            a = m.a(0)
            p, q = m.s + a, m.s - a
            z = np.tanh(al * x)
            env = (1 - z) ** p * (1 + z) ** q
            core = _hyp_beta_terms(p, q, w0, z)
            den = q * env + (w0 - 1) * (p + q) - 2 ** (p + q) * core
            num = (p + q) * (q * (1 - z) * env - (p - q + (p + q) * z) * (w0 - 1)) \
                + 2 ** (p + q) * (p - q + (p + q) * z) * core
            return al * al * p * q * env * num / den**2
    raise ClosedFormUnavailable(f"no closed-form field for {transform.describe()} on {m.family}")


def _trig_confluent_field(m, w0, x):
    """Confluent trigonometric field as published (j = 0).

    It coincides with eta'/2 only after shifting w0 by
    ``trig_confluent_w0_offset``; see that function.
    """
    al = m.alpha
    a = m.a(0)
    p, q = complex(m.s, a), complex(-m.s, a)
    th = math.pi / 2 - al * x             # arctan(cot(alpha x)) on (0, pi/alpha)
    E = np.exp(-2j * al * x)
    F = gauss_2f1(q, q - p, 1 + q, E)
    gp = gamma(p + 1)
    K = gamma(1 + q) * gamma(p - q + 1) * (1 - 2j * w0 * np.sin(q * math.pi)) * np.exp(-2j * q * th)
    pre = -2 * q * al * al * gp * (1 + np.exp(2j * th)) ** (p - q)
    br = (K - gp * F) ** -2 * (q * gp * ((1 - E) ** (p - q) - F)
                               - (p - q) / (1 + np.exp(-2j * th)) * (gp * F - K) + q * K)
    return (pre * br).real


def trig_confluent_w0_offset(model):
    """Shift delta such that the published confluent trigonometric field at
    w0 equals eta'/2 of the transform with w0 + delta (j = 0, integer s)."""
    s = model.s
    if abs(s - round(s)) > 1e-12:
        raise ClosedFormUnavailable("offset known for integer D/alpha only")
    sign = -1.0 if int(round(s)) % 2 else 1.0
    return 1.0 / (1.0 + sign * math.exp(math.pi * model.a(0)))


def partner_potential_closed_form(transform, x):
    """Closed-form V2 for consecutive j = 1 (all three families)."""
    m = transform.model
    if transform.kind != "consecutive" or transform.j != 1:
        raise ClosedFormUnavailable("closed-form V2 available for consecutive j=1 only")
    X = J.Jet.variable(np.asarray(x, dtype=float), 0)
    if isinstance(m, ShiftedOscillator):
        w = m.omega
        z = m.zeta(X).value
        return w / 2 * z * z + 1.5 * w + 4 * w * (2 * z * z - 1) / (2 * z * z + 1) ** 2
    if isinstance(m, TrigRosenMorse):
        D, al, ka = m.D, m.alpha, m.kappa
        z = m.zeta(X).value
        v_si = (D + al) * (D + 2 * al) * (1 + z * z) - 2 * D * ka * z - D * D + ka * ka
        # the factor (1 + zeta^2) multiplies the whole numerator
        num = (1 + z * z) * ((D + al) * (2 * D + 3 * al) * z * z - 2 * ka * (2 * D + 3 * al) * z
                             + 2 * ka * ka - al * (D + al))
        den = (D + 2 * al) * (2 * D + 3 * al) * z * z - 2 * ka * (2 * D + 3 * al) * z + 2 * ka * ka + al * (D + 2 * al)
        return v_si + 8 * al * al * (ka * ka + (D + 2 * al) ** 2) * num / den**2
    if isinstance(m, HypRosenMorse):
        D, al, ka = m.D, m.alpha, m.kappa
        z = m.zeta(X).value
        v_si = D * D + ka * ka - (D - al) * (D - 2 * al) * (1 - z * z) + 2 * ka * D * z
        num = (1 - z * z) * (2 * (D * z + ka) ** 2 - (5 * D * z * z + 6 * ka * z + D) * al + (3 * z * z + 1) * al * al)
        den = 2 * ka * ka + (D - 2 * al) * (z * z * (2 * D - 3 * al) + al) + 2 * ka * z * (2 * D - 3 * al)
        return v_si + 8 * al * al * ((D - 2 * al) ** 2 - ka * ka) * num / den**2
    raise ClosedFormUnavailable(f"no closed-form V2 for {m.family}")


# closed-form seed integrals ------------------------------------------------
def _ho_seed_integral(m, j, x):
    z = np.asarray(m.zeta(J.Jet.variable(np.asarray(x, dtype=float), 0)).value)
    top = j // 2
    num = np.zeros_like(z)
    total = 0.0
    for l in range(top + 1):
        for mm in range(top + 1):
            s = j - mm - l + 0.5
            c = (-1) ** (mm + l) * 2.0 ** (2 * (j - mm - l)) / (
                math.factorial(mm) * math.factorial(l) * math.factorial(j - 2 * mm) * math.factorial(j - 2 * l))
            g = float(gamma(s))
            lg = lower_incomplete_gamma(s, z * z)
            num = num + 0.5 * c * np.where(z >= 0, g + lg, g - lg)
            total += c * g
    return num / total


def _trig_seed_integral(m, j, x):
    x = np.asarray(x, dtype=float)
    s, al = m.s, m.alpha
    a = m.a(j)
    p, q = complex(s + j, a), complex(-s - j, a)
    th = math.pi / 2 - al * x
    zarg = -np.exp(2j * th)
    num = np.zeros(x.shape, dtype=complex)
    end = 0.0 + 0.0j
    for l in range(j + 1):
        for mm in range(j + 1):
            c = ((-1) ** (mm + l) * math.comb(j, mm) * math.comb(j, l)
                 * pochhammer(1 + q - p + j, l) * pochhammer(1 + q - p + j, mm)
                 / (gamma(l + 1 - p) * gamma(mm + 1 - p)))
            tail = gamma(1 + q) * gamma(p - q - mm - l + 1) / gamma(p + 1 - mm - l)
            br = (np.exp(-1j * (p + q) / 2 * (math.pi - 2 * th)) * np.exp(-1j * (p - q) * th)
                  * gauss_2f1(q, mm + l + q - p, 1 + q, zarg) - tail * np.exp(-1j * (p - q) / 2 * math.pi))
            num = num + c * br
            end += c * tail * (np.exp(-1j * (p + q) * math.pi) * np.exp(1j * (p - q) / 2 * math.pi)
                               - np.exp(-1j * (p - q) / 2 * math.pi))
    ratio = num / end
    return ratio.real, ratio.imag


def _hyp_G(a, b, c, j):
    tot = 0.0
    for l in range(j + 1):
        for r in range(j + 1):
            t = ((-0.5) ** (l + r) * math.comb(j, l) * math.comb(j, r)
                 * math.exp(math.lgamma(b + c + j + l + 1) + math.lgamma(b + c + j + r + 1)
                            - math.lgamma(b + l + 1) - math.lgamma(b + r + 1)) / (2 * (b + l + r)))
            br = (2.0 ** (b + c + l + r) * (b + c + l + r)
                  * (incomplete_beta((a + 1) / 2, c, b + l + r + 1) - incomplete_beta(0.5, c, b + l + r + 1))
                  - (1 - a) ** (b + l + r) * (1 + a) ** c + 1)
            tot = tot + t * br
    return math.gamma(b + j + 1) ** 2 * tot


def _hyp_seed_integral(m, j, x):
    z = np.tanh(m.alpha * np.asarray(x, dtype=float))
    a = m.a(j)                      # D kappa / (alpha (D - alpha j))
    p, q = m.s - j + a, m.s - j - a
    return (_hyp_G(z, p, q, j) + _hyp_G(1.0, q, p, j)) / (_hyp_G(1.0, p, q, j) + _hyp_G(1.0, q, p, j))


def seed_integral_closed_form(model, j, x):
    """int_{x0}^x psi_j^2 (normalised) from the closed-form expressions.

    For the trigonometric family the published expression is complex; the
    real part is returned and the imaginary residue is checked to be small.
    Raises ConvergenceFailure when the hypergeometric series cannot be
    summed at some point.
    """
    model.check_level(j)
    if isinstance(model, ShiftedOscillator):
        return _ho_seed_integral(model, j, x)
    if isinstance(model, TrigRosenMorse):
        re, im = _trig_seed_integral(model, j, x)
        if np.max(np.abs(im)) > 1e-8:
            raise ClosedFormUnavailable("complex residue in the trigonometric seed integral")
        return re
    if isinstance(model, HypRosenMorse):
        return _hyp_seed_integral(model, j, x)
    raise ClosedFormUnavailable(f"no closed-form seed integral for {model.family}")


def w_closed_form(transform, x):
    if transform.kind != "confluent":
        raise InvalidArgument("w is defined for the confluent transform")
    return transform.w0 - seed_integral_closed_form(transform.model, transform.j, x)


def w_quadrature(transform, x):
    if transform.kind != "confluent":
        raise InvalidArgument("w is defined for the confluent transform")
    return transform.w_value(np.asarray(x, dtype=float))


def eta_consecutive(model, j):
    """eta closure of the consecutive-levels transform on levels j, j+1."""
    return make_transform(model, "consecutive", j).eta


def eta_confluent(model, j, w0):
    """eta closure of the confluent transform on level j."""
    return make_transform(model, "confluent", j, w0).eta
