"""Bilayer graphene states built from the auxiliary SUSY pair.

Natural units hbar = m* = e/c = 1.  With E~ = 2E the spinor components
obey L2^- psi0 = -E~ psi2 and L2^+ psi2 = -E~ psi0.  The lower component is
a seed-model eigenfunction psi_n, the upper one is L2^- psi_n rescaled.

The wavenumber enters through eta = 2 (k + A).  The vector potential is
fixed as A = (eta - C1) / 2 where C1 is the constant term of eta's
asymptotic expansion at the left end of the domain, so k = C1 / 2.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import jets as J
from .errors import (ClosedFormUnavailable, InvalidArgument, NoBranch,
                     RelationInconsistent, TransformSingular)
from .numerics import Grid, SampledFunction, gauss_legendre, integrate
from .potentials import HypRosenMorse, ShiftedOscillator, TrigRosenMorse
from .susy import (extra_term_f, l2_minus_jet, l2_plus_jet, magnetic_field,
                   make_transform)

DEGENERACY_RTOL = 1e-9
ENERGY_RTOL = 1e-12
KAPPA_LIMIT = 1e3


# ---------------------------------------------------------------- energies
def level_gap(model, n, j):
    """Delta_{n,j} = E_n - E_j of the seed model."""
    return model.energy(n) - model.energy(j)


def _family_gap(model, n, j):
    # the same gap written out per family
    if isinstance(model, ShiftedOscillator):
        return (n - j) * model.omega
    D, al, ka = getattr(model, "D", 0.0), getattr(model, "alpha", 0.0), model.kappa
    if isinstance(model, TrigRosenMorse):
        mj, mn = D + j * al, D + n * al
        return D * D * ka * ka * (1 / mj**2 - 1 / mn**2) + (n - j) * (2 * D + (n + j) * al) * al
    if isinstance(model, HypRosenMorse):
        mj, mn = D - j * al, D - n * al
        return D * D * ka * ka * (1 / mj**2 - 1 / mn**2) + al * (n - j) * (2 * D - al * (n + j))
    raise ClosedFormUnavailable(f"no level-gap formula for {model.family}")


def _energy_from_gaps(transform, gap):
    j = transform.j
    if transform.kind == "consecutive":
        prod = gap(j) * gap(j + 1)
        return 0.5 * math.sqrt(prod) if prod > 0 else 0.0
    return 0.5 * abs(gap(j)) + 0.0


def electron_energy(model, transform, n):
    """Positive (electron) energy attached to auxiliary level n.

    Consecutive seeds give sqrt(D_{n,j} D_{n,j+1}) / 2, confluent ones
    |D_{n,j}| / 2.  The family formula is evaluated independently and the
    two must agree; the hole branch is the negative of this value.
    """
    if transform.model != model:
        raise InvalidArgument("transform was built on a different model")
    model.check_level(n)
    generic = _energy_from_gaps(transform, lambda m: level_gap(model, n, m))
    special = _energy_from_gaps(transform, lambda m: _family_gap(model, n, m))
    if abs(generic - special) > ENERGY_RTOL * max(1.0, abs(generic)):
        raise RelationInconsistent(
            f"energy formulas disagree for n={n}: {generic!r} vs {special!r}")
    return generic


def oscillator_energy(omega, j, n, kind="consecutive"):
    """Oscillator energies in closed form: (omega/2) sqrt((n-j)(n-j-1)) or
    (omega/2)|n-j|."""
    if kind == "consecutive":
        return 0.5 * omega * math.sqrt((n - j) * (n - j - 1))
    return 0.5 * omega * abs(n - j)


# ------------------------------------------------------------------ states
@dataclass(frozen=True)
class SpinorState:
    """Bound state (psi2, psi0) of the bilayer problem on a grid.

    ``upper``/``lower`` hold psi2 and psi0 without the 1/sqrt(2) spinor
    prefactor; ``prefactor`` is 1/sqrt(2) for two-component states and 1
    otherwise.  Derivatives are exact (from jets).
    """

    n_aux: int
    energy: float
    upper: SampledFunction
    lower: SampledFunction
    upper_d: np.ndarray
    lower_d: np.ndarray
    k: float
    two_component: bool
    sign: float = -1.0
    m_std: int | None = None
    degenerate_with: tuple = ()
    checks: dict = field(default_factory=dict, compare=False)

    @property
    def grid(self):
        return self.lower.grid

    @property
    def x(self):
        return self.lower.grid.points

    @property
    def prefactor(self):
        return 1.0 / math.sqrt(2.0) if self.two_component else 1.0

    @property
    def hole_energy(self):
        return -self.energy

    @property
    def components(self):
        """(psi2, psi0) including the spinor prefactor."""
        c = self.prefactor
        return c * self.upper.values, c * self.lower.values

    @property
    def derivatives(self):
        c = self.prefactor
        return c * self.upper_d, c * self.lower_d


def _is_single_component(transform, n):
    if transform.kind == "consecutive":
        return n in (transform.j, transform.j + 1)
    return n == transform.j and transform.w0 in (0.0, 1.0)


def _confluent_w_jet(transform, x, psi):
    """w as a jet: w0 - int psi_j^2 with w' = -psi_j^2."""
    g = psi * psi
    w = np.zeros((psi.order + 1,) + g.c.shape[1:])
    w[0] = transform.w_value(x)
    for k in range(1, psi.order + 1):
        w[k] = -g.c[k - 1] / k
    return J.Jet(w)


def _coupled_residuals(transform, x, lower, upper, e_tilde):
    """max |L2^- psi0 + E~ psi2| and max |L2^+ psi2 + E~ psi0| over the grid
    interior (jets of order >= 2)."""
    r1 = l2_minus_jet(transform, x, lower).value + e_tilde * upper.value
    r2 = l2_plus_jet(transform, x, upper).value + e_tilde * lower.value
    inner = _interior(len(x), 0.01)
    return float(np.max(np.abs(r1[inner]))), float(np.max(np.abs(r2[inner])))


def spinor_state(model, transform, n, k=None, grid=None):
    """Normalised spinor state for auxiliary level n.

    Levels removed by the transform give a single-component state (upper
    component zero, no 1/sqrt(2)).  For the isospectral confluent case
    the seed level itself gives a zero-energy state with psi2 = psi_j / w.
    The sign of psi2 is picked to satisfy the coupled equations.
    """
    if transform.model != model:
        raise InvalidArgument("transform was built on a different model")
    model.check_level(n)
    if grid is None:
        grid = transform.default_grid(n_max=n + 2)
    if not isinstance(grid, Grid):
        raise InvalidArgument("grid must be a Grid")
    x = grid.points
    model.check_inside(x)
    if k is None:
        k = kappa_to_k(model, transform, check=False).k
    E = electron_energy(model, transform, n)
    e_tilde = 2.0 * E
    lower = model.eigen_jet(n, x, 4)
    lower_s = SampledFunction(grid, lower.value)
    checks = {"lower_norm": integrate(SampledFunction(grid, lower.value**2))}

    if _is_single_component(transform, n):
        zero = np.zeros_like(x)
        r = float(np.max(np.abs(l2_minus_jet(transform, x, lower).value)))
        checks.update(residual_minus=r, residual_plus=0.0)
        return SpinorState(int(n), E, SampledFunction(grid, zero), lower_s, zero,
                           lower.derivative(1), float(k), False, 1.0, checks=checks)

    if transform.kind == "confluent" and n == transform.j:
        # zero mode of L2^+: psi_j / w, with int (psi_j/w)^2 = 1/(w0 (w0-1))
        w0 = transform.w0
        w = _confluent_w_jet(transform, x, lower)
        raw = lower / w
        upper = raw * math.sqrt(w0 * (w0 - 1.0))
    else:
        eps1, eps2 = transform.eps1, transform.eps2
        En = model.energy(n)
        norm = math.sqrt((En - eps1) * (En - eps2))
        upper = l2_minus_jet(transform, x, lower) * (1.0 / norm)

    # pick the global sign of psi2 from the coupled system
    best = None
    for sign in (-1.0, 1.0):
        up = upper * sign
        res = _coupled_residuals(transform, x, lower, up, e_tilde)
        if best is None or max(res) < max(best[1]):
            best = (sign, res, up)
    sign, (r1, r2), upper = best
    checks.update(residual_minus=r1, residual_plus=r2,
                  upper_norm=integrate(SampledFunction(grid, upper.value**2)),
                  amplitude=float(max(np.max(np.abs(lower.value)), np.max(np.abs(upper.value)))))
    return SpinorState(int(n), E, SampledFunction(grid, upper.value), lower_s,
                       upper.derivative(1), lower.derivative(1), float(k), True, sign, checks=checks)


# ---------------------------------------------------------------- ordering
@dataclass(frozen=True)
class LevelRecord:
    """Energy bookkeeping without wavefunctions."""

    n_aux: int
    energy: float
    m_std: int | None = None
    degenerate_with: tuple = ()
    two_component: bool = True


def level_records(transform, n_max):
    m = transform.model
    top = min(int(n_max), m.bound_state_count() - 1)
    return [LevelRecord(n, electron_energy(m, transform, n), two_component=not _is_single_component(transform, n))
            for n in range(top + 1)]


def standard_ordering(states, transform=None):
    """Sort by energy (stable) and assign the standard index m.

    Levels closer than 1e-9 (1 + E) share one m and list each other's
    auxiliary index in ``degenerate_with``.  Works on SpinorState or
    LevelRecord items.  With an oscillator consecutive transform the
    known pairing (j, j+1), (j-1, j+2), ... is asserted.
    """
    order = sorted(range(len(states)), key=lambda i: states[i].energy)
    groups = []
    for i in order:
        e = states[i].energy
        if groups and abs(e - states[groups[-1][0]].energy) < DEGENERACY_RTOL * (1.0 + abs(states[groups[-1][0]].energy)):
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for m, grp in enumerate(groups):
        for i in grp:
            others = tuple(sorted(states[o].n_aux for o in grp if o != i))
            out.append(replace(states[i], m_std=m, degenerate_with=others))
    if transform is not None:
        _check_oscillator_pairs(out, transform)
    return out


def _check_oscillator_pairs(ordered, transform):
    if not (isinstance(transform.model, ShiftedOscillator) and transform.kind == "consecutive"):
        return
    j = transform.j
    by_n = {s.n_aux: s for s in ordered}
    for r in range(j + 1):
        a, b = j - r, j + 1 + r
        if a in by_n and b in by_n:
            sa, sb = by_n[a], by_n[b]
            if sa.m_std != r or sb.m_std != r or b not in sa.degenerate_with:
                raise RelationInconsistent(f"pair ({a}, {b}) is not the degenerate level m={r}")
    for n, s in by_n.items():
        if n >= 2 * j + 2 and s.degenerate_with:
            raise RelationInconsistent(f"level n={n} should be simple")


def degeneracy_census(ordered):
    """{multiplicity: number of distinct levels} over an ordered list."""
    count = {}
    for m in sorted({s.m_std for s in ordered}):
        mult = sum(1 for s in ordered if s.m_std == m)
        count[mult] = count.get(mult, 0) + 1
    return count


# ----------------------------------------------------- wavenumber relation
def _asymptotic_fit(u, eta, n_inv, slope=True):
    """Least-squares eta ~ a u + b + sum_i c_i u^-i; returns (a, b).

    ``slope`` may be a number, which fixes a instead of fitting it.
    """
    if slope is not True and slope is not False:
        return slope, _asymptotic_fit(u, eta - slope * u, n_inv, slope=False)[1]
    cols = [np.ones_like(u)] + [u ** -i for i in range(1, n_inv + 1)]
    if slope:
        cols.insert(0, u)
    M = np.stack(cols, axis=1)
    scale = np.max(np.abs(M), axis=0)
    coef = np.linalg.lstsq(M / scale, eta, rcond=None)[0] / scale
    return (coef[0], coef[1]) if slope else (0.0, coef[0])


def eta_constant(transform):
    """C1: constant term of eta's asymptotic expansion at the left end.

    Oscillator: eta ~ a x + C1 + O(1/x).  Trigonometric: eta ~ a cot(alpha x)
    + C1 + O(tan(alpha x)) near x = 0.  Hyperbolic: eta -> C1 + O(exp(2 alpha
    x)) as x -> -inf.  The expansions are fitted to eta values (no
    derivatives, which lose accuracy far out in the tails).
    """
    m = transform.model
    if isinstance(m, ShiftedOscillator):
        c = math.sqrt(m.omega / 2.0)
        zeta = np.linspace(-300.0, -30.0, 121)
        eta = transform.eta(m.center + zeta / c)
        a, b = _asymptotic_fit(zeta, eta, 6)
        # a zeta + b = a c x + (b - a c center)
        return float(b - a * c * m.center)
    if isinstance(m, TrigRosenMorse):
        al = m.alpha
        x = np.linspace(0.01, 0.2, 201) / al
        u = 1.0 / np.tan(al * x)
        eta = transform.eta(x)
        a, b = _asymptotic_fit(u, eta, 10)
        # the wall exponent fixes the slope to 0 or -(2s+1) alpha; snapping
        # to it keeps fit noise out of the constant
        for exact in (0.0, -(2.0 * m.s + 1.0) * al):
            if abs(a - exact) < 1e-6 * (1.0 + abs(exact)):
                a, b = _asymptotic_fit(u, eta, 10, slope=exact)
        return float(b)
    if isinstance(m, HypRosenMorse):
        al = m.alpha
        x = np.linspace(-16.0, -8.0, 41) / al
        t = np.exp(-2.0 * al * x)           # eta = C1 + sum c_i t^-i
        _, b = _asymptotic_fit(t, transform.eta(x), 2, slope=False)
        return float(b)
    raise ClosedFormUnavailable(f"no asymptotic form of eta for {m.family}")


def _closed_form_relation(model, transform):
    """(numerator, denominator) polynomials in kappa with k = num/den, or None."""
    P = np.polynomial.Polynomial
    kind, j = transform.kind, transform.j
    if isinstance(model, ShiftedOscillator) and kind == "consecutive":
        return P([0.0, 1.0]), P([1.0])
    if isinstance(model, TrigRosenMorse) and kind == "consecutive" and j == 1:
        D, al = model.D, model.alpha
        a, b = D + al, D + 2 * al
        num = P([0, 1]) * (2 * D + 3 * al) * P([a * b * b, 0, -D])
        den = 2 * a * b * P([a * b, 0, -1])
        return num, den
    if isinstance(model, HypRosenMorse) and kind == "consecutive" and j == 1:
        D, al = model.D, model.alpha
        c = D**3 - 5 * al * D**2 + 8 * al**2 * D - 4 * al**3
        num = (2 * D - 3 * al) * P([0, c, 0, D])
        den = 2 * (D - 2 * al) * (D - al) * P([D * D - 3 * al * D + 2 * al * al, 0, 1])
        return num, den
    if (isinstance(model, TrigRosenMorse) and kind == "confluent" and j == 0
            and model.D == 2.0 and model.alpha == 1.0):
        return P([4.0, 0.0, 1.0]), P([0.0, 1.0])
    return None


def closed_form_k(model, transform):
    """k(kappa) from the published relation, or ClosedFormUnavailable."""
    rel = _closed_form_relation(model, transform)
    if rel is None:
        raise ClosedFormUnavailable(f"no closed-form k(kappa) for {transform.describe()} on {model.family}")
    num, den = rel
    d = den(model.kappa)
    if d == 0:
        raise NoBranch(f"k(kappa) has a pole at kappa={model.kappa}")
    return float(num(model.kappa) / d)


@dataclass(frozen=True)
class WavenumberRelation:
    C1: float
    C2: float
    k: float
    spread: float                 # std of (eta - 2A)/2 over the grid interior
    k_closed: float | None = None
    branches: tuple = ()

    @property
    def closed_form_gap(self):
        return None if self.k_closed is None else self.k - self.k_closed


def vector_potential(transform, grid, C1=None):
    """A(x) by integrating B cell by cell (10-point Gauss-Legendre).

    The integration constant puts A = (eta - C1)/2 at the grid midpoint;
    cells near a singular end are bisected until the rule settles.
    """
    x = grid.points
    if C1 is None:
        C1 = eta_constant(transform)
    B = lambda t: magnetic_field(transform, t)
    cells = _adaptive_cells(B, x[:-1], x[1:])
    F = np.concatenate([[0.0], np.cumsum(cells)])
    mid = len(x) // 2
    A0 = 0.5 * (transform.eta(x[mid:mid + 1])[0] - C1)
    return A0 + (F - F[mid])


def _adaptive_cells(f, a, b, whole=None, prev_err=None, depth=0):
    """Gauss-Legendre per cell, bisecting cells whose two halves disagree
    with the whole.  A cell stops once its error estimate no longer drops
    (rounding floor) or after 20 levels."""
    if whole is None:
        whole = gauss_legendre(f, a, b)
    if a.size == 0:
        return whole
    m = 0.5 * (a + b)
    left, right = gauss_legendre(f, a, m), gauss_legendre(f, m, b)
    halves = left + right
    err = np.abs(halves - whole)
    bad = err > 1e-13 * np.abs(halves) + 1e-15
    if prev_err is not None:
        bad &= err < 0.25 * prev_err
    if depth < 20 and bad.any():
        sub_err = err[bad] / 2.0
        halves[bad] = (_adaptive_cells(f, a[bad], m[bad], left[bad], sub_err, depth + 1)
                       + _adaptive_cells(f, m[bad], b[bad], right[bad], sub_err, depth + 1))
    return halves


def _interior(n, frac=0.02):
    cut = max(2, int(frac * n))
    return slice(cut, n - cut)


def kappa_to_k(model, transform, grid=None, check=True):
    """Wavenumber k carried by the transform (vector-potential route).

    g(x) = (eta - 2A)/2 must be constant; its mean is returned as k.  The
    published closed form, where one exists, is evaluated alongside as
    ``k_closed`` for comparison.
    """
    if transform.model != model:
        raise InvalidArgument("transform was built on a different model")
    C1 = eta_constant(transform)
    spread = 0.0
    k = 0.5 * C1
    if check:
        grid = transform.default_grid() if grid is None else grid
        x = grid.points
        A = vector_potential(transform, grid, C1)
        g = 0.5 * (transform.eta(x) - 2.0 * A)
        g = g[_interior(len(x))]
        spread = float(np.std(g))
        k = float(np.mean(g))
        if spread >= 1e-8 * (1.0 + abs(k)):
            raise RelationInconsistent(f"(eta - 2A)/2 is not constant: std {spread:.3e}")
    try:
        k_closed = closed_form_k(model, transform)
    except (ClosedFormUnavailable, NoBranch):
        k_closed = None
    return WavenumberRelation(C1, 0.0, k, spread, k_closed)


def _real_roots(num, den, k, limit):
    poly = num - den * k
    poly = poly.trim(tol=0.0)
    if poly.degree() < 1:
        return []
    cands = poly.roots()
    found = []
    for r in cands:
        if abs(r.imag) > 1e-6 * (1.0 + abs(r)):
            continue
        r = float(r.real)
        if abs(r) > limit:
            continue
        found.append(_refine_root(poly, r))
    poles = den.roots() if den.degree() >= 1 else []
    found = [r for r in found
             if all(abs(r - p) > 1e-9 * (1 + abs(r)) for p in np.atleast_1d(poles))]
    return sorted(found)


def _newton(poly, r):
    dp = poly.deriv()
    for _ in range(60):
        d = dp(r)
        if d == 0:
            break
        step = poly(r) / d
        r -= step
        if abs(step) <= 1e-15 * (1.0 + abs(r)):
            break
    return float(r)


def _refine_root(poly, r):
    # a double root is a simple root of the derivative, where Newton
    # converges quadratically again
    r1 = _newton(poly, r)
    if poly.degree() >= 2:
        r2 = _newton(poly.deriv(), r1)
        if abs(r2 - r1) < 1e-6 * (1.0 + abs(r1)) and abs(poly(r2)) <= abs(poly(r1)):
            return r2
    return r1


def k_to_kappa(model, transform, k):
    """All real kappa in [-1e3, 1e3] mapping to k under the closed-form
    relation (multiple roots are repeated).  Raises NoBranch if none."""
    rel = _closed_form_relation(model, transform)
    if rel is None:
        raise ClosedFormUnavailable(f"no closed-form kappa(k) for {transform.describe()} on {model.family}")
    if not np.isfinite(k):
        raise InvalidArgument("k must be finite")
    num, den = rel
    roots = _real_roots(num, den, float(k), KAPPA_LIMIT)
    if not roots:
        raise NoBranch(f"no real kappa gives k={k}")
    return roots


def _with_kappa(model, kappa):
    return replace(model, kappa=float(kappa))


def lowest_energy(transform, n_max=8):
    """Smallest nonzero electron energy among two-component states n <= n_max.

    Zero-energy levels do not move with kappa, so they are skipped.
    """
    recs = [r for r in level_records(transform, n_max)
            if r.two_component and r.energy > ENERGY_RTOL]
    if not recs:
        raise NoBranch("no two-component level with nonzero energy")
    return min(r.energy for r in recs)


def physical_branch(model, transform, k, h=1e-3):
    """Branch of kappa(k) with locally quadratic (convex) lowest energy.

    Every root is followed over the 5-point stencil k + i h (i = -2..2)
    by taking the nearest root at each node; the 4th-order second
    difference of the lowest energy must be positive.  Returns
    (kappa, curvature) of the convex branch with the lowest energy.  A
    single distinct root is returned whatever its curvature (nan when the
    stencil leaves the real branch).
    """
    roots = sorted(set(k_to_kappa(model, transform, k)))
    best = None
    for r in roots:
        energies = []
        try:
            for i in (-2, -1, 0, 1, 2):
                cand = k_to_kappa(model, transform, k + i * h)
                kap = min(cand, key=lambda c: abs(c - r))
                m2 = _with_kappa(model, kap)
                t = make_transform(m2, transform.kind, transform.j,
                                   getattr(transform, "w0", None))
                energies.append(lowest_energy(t))
        except (NoBranch, TransformSingular):
            if len(roots) == 1:
                # the stencil leaves the real branch (double root at a
                # discriminant zero): nothing to choose, curvature unknown
                return r, float("nan")
            continue
        e = np.array(energies)
        curv = (-e[0] + 16 * e[1] - 30 * e[2] + 16 * e[3] - e[4]) / (12 * h * h)
        if len(roots) == 1:
            return r, float(curv)
        if curv > 0 and (best is None or e[2] < best[2]):
            best = (r, float(curv), e[2])
    if best is None:
        raise NoBranch(f"no branch with convex energy at k={k}")
    return best[0], best[1]


# --------------------------------------------------------- partner profile
@dataclass(frozen=True)
class PartnerProfile:
    grid: Grid
    V0: np.ndarray
    V2: np.ndarray
    B: np.ndarray
    A: np.ndarray
    f_extra: np.ndarray
    eta: np.ndarray
    C1: float
    k: float
    eta_zeros: list


def partner_profile(transform, grid=None):
    """Sampled V0, V2, B, A, f and eta on a grid (defaults per family)."""
    grid = transform.default_grid() if grid is None else grid
    x = grid.points
    transform.model.check_inside(x)
    C1 = eta_constant(transform)
    eta = transform.eta_jet(x, 1)
    V0 = transform.model.potential(x)
    return PartnerProfile(
        grid=grid,
        V0=V0,
        V2=V0 + 2.0 * eta.derivative(1),
        B=0.5 * eta.derivative(1),
        A=vector_potential(transform, grid, C1),
        f_extra=extra_term_f(transform, x),
        eta=eta.value,
        C1=C1,
        k=0.5 * C1,
        eta_zeros=transform.eta_zeros(x),
    )
