from dataclasses import replace

import numpy as np
import pytest

from bilayer_susy import (InvalidArgument, continuity_residual, current_density,
                          density_profile, probability_density, spinor_state,
                          vector_potential)
from bilayer_susy.numerics import SampledFunction

from conftest import COMBOS, build


def _state(name, n):
    m, t = build(name)
    s = spinor_state(m, t, n)
    return s, vector_potential(t, s.grid)


@pytest.mark.parametrize("name", sorted(COMBOS))
def test_density_integrates_to_one_and_jx_vanishes(name):
    s, A = _state(name, 0)
    prof = density_profile(s, A)
    assert prof.total_probability == pytest.approx(1.0, abs=1e-6)
    assert np.max(np.abs(prof.Jx)) < 1e-12 * max(1.0, np.max(np.abs(prof.Jy)))
    assert np.all(prof.rho >= 0)


def test_zero_state_gives_zero_density():
    s, A = _state("ho-consecutive", 0)
    zero = SampledFunction(s.grid, np.zeros(len(s.grid)))
    z = replace(s, upper=zero, lower=zero, upper_d=zero.values, lower_d=zero.values)
    assert np.all(probability_density(z) == 0)
    jx, jy = current_density(z, A)
    assert np.all(jx == 0) and np.all(jy == 0)


@pytest.mark.parametrize("name", ["ho-consecutive", "hyp-consecutive", "hyp-confluent"])
def test_jy_decays_at_both_ends(name):
    s, A = _state(name, 0)
    _, jy = current_density(s, A)
    peak = np.max(np.abs(jy))
    assert peak > 0
    assert abs(jy[0]) < 1e-6 * peak and abs(jy[-1]) < 1e-6 * peak


def test_isospectral_confluent_state_carries_no_current():
    s, A = _state("ho-confluent", 0)
    jx, jy = current_density(s, A)
    assert np.max(np.abs(jy)) < 1e-10
    assert np.max(np.abs(jx)) == 0


@pytest.mark.parametrize("name", sorted(COMBOS))
def test_continuity_holds(name):
    s, A = _state(name, 2)
    _, jy = current_density(s, A)
    assert continuity_residual(s, A) < 1e-5 * max(np.max(np.abs(jy)), 1e-300)


def test_continuity_detects_a_phase_error():
    s, A = _state("ho-consecutive", 0)
    x, L = s.x, s.x[-1] - s.x[0]
    base = continuity_residual(s, A)
    _, jy = current_density(s, A)
    # psi2 -> psi2 (1 + 0.01 i x / L), derivative by the product rule
    f = 1 + 0.01j * x / L
    up = s.upper.values * f
    up_d = s.upper_d * f + s.upper.values * 0.01j / L
    bad = replace(s, upper=SampledFunction(s.grid, up), upper_d=up_d)
    worse = continuity_residual(bad, A)
    assert worse >= 10 * max(base, 1e-12 * np.max(np.abs(jy)))


def test_gauge_terms_matter():
    # dropping A from the current must change Jy visibly
    m, t = build("ho-consecutive")
    s = spinor_state(m, t, 0, k=1.0)
    A = vector_potential(t, s.grid)
    _, jy = current_density(s, A)
    _, jy_bare = current_density(s, A, include_gauge=False)
    assert np.max(np.abs(jy - jy_bare)) >= 1e-3 * np.max(np.abs(jy))


def test_vector_potential_shape_checked():
    s, A = _state("ho-consecutive", 0)
    with pytest.raises(InvalidArgument):
        current_density(s, np.asarray(A)[:-1])
