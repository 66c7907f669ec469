"""Probability and current densities of bilayer spinor states.

Landau gauge A = A(x) e_y, natural units.  The y dependence e^{iky} of the
spinor is handled symbolically (d/dy -> ik).  Levi-Civita sign eps_xy = +1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .numerics import Grid, SampledFunction, _diff_array, integrate

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


def _bilinear(sig, a2, a0, b2, b0):
    """a^dagger sigma b, pointwise, for spinors a = (a2, a0), b = (b2, b0)."""
    return (np.conj(a2) * (sig[0, 0] * b2 + sig[0, 1] * b0)
            + np.conj(a0) * (sig[1, 0] * b2 + sig[1, 1] * b0))


def _vector_potential_values(A, grid):
    if isinstance(A, SampledFunction):
        if A.grid != grid:
            raise InvalidArgument("vector potential and state live on different grids")
        return A.values
    a = np.asarray(A, dtype=float)
    if a.shape != (len(grid),):
        raise InvalidArgument(f"vector potential has {a.shape} samples, grid has {len(grid)}")
    return a


def probability_density(state):
    """rho = Psi^dagger Psi, y independent."""
    psi2, psi0 = state.components
    return np.abs(psi2) ** 2 + np.abs(psi0) ** 2


def current_density(state, A, include_gauge=True):
    """(Jx, Jy) of a state in the Landau gauge.

    Jx = Im(Psi^+ s_x Psi') + Im(ik Psi^+ s_y Psi) + A Psi^+ s_y Psi
    Jy = Im(Psi^+ s_y Psi') - Im(ik Psi^+ s_x Psi) - A Psi^+ s_x Psi

    ``include_gauge=False`` drops the A terms (kept only as a regression
    guard, the physical current always carries them).
    """
    a = _vector_potential_values(A, state.grid)
    psi2, psi0 = state.components
    d2, d0 = state.derivatives
    k = state.k
    sx = _bilinear(_SIGMA_X, psi2, psi0, psi2, psi0).real
    sy = _bilinear(_SIGMA_Y, psi2, psi0, psi2, psi0).real
    jx = np.imag(_bilinear(_SIGMA_X, psi2, psi0, d2, d0)) + np.imag(1j * k * sy)
    jy = np.imag(_bilinear(_SIGMA_Y, psi2, psi0, d2, d0)) - np.imag(1j * k * sx)
    if include_gauge:
        jx = jx + a * sy
        jy = jy - a * sx
    return jx, jy


def continuity_residual(state, A, edge=0.02):
    """max |dJx/dx| over the interior (d Jy/dy vanishes identically)."""
    jx, _ = current_density(state, A)
    djx = _diff_array(jx, state.grid.h, 1)
    cut = max(2, int(edge * len(jx)))
    return float(np.max(np.abs(djx[cut:-cut])))


@dataclass(frozen=True)
class DensityProfile:
    grid: Grid
    rho: np.ndarray
    Jx: np.ndarray
    Jy: np.ndarray
    k: float
    n_aux: int
    m_std: int | None = None

    @property
    def total_probability(self):
        return integrate(SampledFunction(self.grid, self.rho))


def density_profile(state, A):
    jx, jy = current_density(state, A)
    return DensityProfile(state.grid, probability_density(state), jx, jy,
                          state.k, state.n_aux, state.m_std)
