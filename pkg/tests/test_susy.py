import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilayer_susy.bilayer import partner_profile
from bilayer_susy.errors import InvalidArgument
from bilayer_susy.numerics import SampledFunction, _diff_array, fd_spectrum, grid_with_spacing, integrate
from bilayer_susy.potentials import HypRosenMorse, ShiftedOscillator, TrigRosenMorse
from bilayer_susy.special import erfc
from bilayer_susy.susy import (apply_L2, eta_confluent, eta_consecutive, extra_term_f,
                               f_from_eta, factorization_residual, gamma_coefficient,
                               gamma_from_eta, l2_minus_jet, magnetic_field,
                               magnetic_field_closed_form, make_transform,
                               partner_potential, partner_potential_closed_form,
                               reconstruct_v0_from_eta, trig_confluent_w0_offset,
                               w_closed_form, w_quadrature)

from conftest import build

HO = ShiftedOscillator(1.0, 1.0)
TRIG = TrigRosenMorse(4.0, 1.0, -7.0)
HYP = HypRosenMorse(8.0, 1.0, 1.0)


def interior(grid, frac=0.02):
    x = grid.points
    cut = max(2, int(frac * len(x)))
    return x[cut:-cut]


# ------------------------------------------------------------ eta
def test_ho_consecutive_field_closed_form():
    eta = eta_consecutive(HO, 1)
    T = make_transform(HO, "consecutive", 1)
    x = np.linspace(-10, 6, 801)
    z = (x + 2.0) / math.sqrt(2.0)
    bracket = 0.5 * (1 + (4 * z * z - 2) / (2 * z * z + 1) ** 2)
    assert np.max(np.abs(magnetic_field(T, x) - bracket)) < 1e-8
    assert np.isfinite(eta(np.array([-2.0 + 1e-3]))).all()


@pytest.mark.parametrize("model", [HO, TRIG, HYP], ids=["ho", "trig", "hyp"])
def test_eta_finite_at_midpoint(model):
    T = make_transform(model, "consecutive", 1)
    g = T.default_grid()
    assert np.isfinite(T.eta(np.array([0.5 * (g.x_min + g.x_max)])))[0]


def test_trig_partner_potential_at_center():
    T = make_transform(TRIG, "consecutive", 1)
    x = np.array([math.pi / 2])
    assert partner_potential(T, x)[0] == pytest.approx(partner_potential_closed_form(T, x)[0], abs=1e-7)


@pytest.mark.parametrize("model", [HO, TRIG, HYP], ids=["ho", "trig", "hyp"])
def test_partner_potential_closed_form_everywhere(model):
    # the trigonometric printed formula needs the corrected bracket
    T = make_transform(model, "consecutive", 1)
    x = interior(T.default_grid(), 0.05)[::7]
    v2 = partner_potential(T, x)
    assert np.max(np.abs(v2 - partner_potential_closed_form(T, x)) / (1 + np.abs(v2))) < 1e-9


def test_confluent_w_range_and_monotone():
    for name in ("ho-confluent", "trig-confluent", "hyp-confluent"):
        model, T = build(name)
        x = T.default_grid().points
        w = w_quadrature(T, x)
        assert np.all(w <= -1.0 + 1e-12) and np.all(w >= -2.0 - 1e-12)
        assert np.all(np.diff(w) <= 1e-15)


def test_forbidden_band():
    with pytest.raises(InvalidArgument, match="forbidden band"):
        eta_confluent(HO, 0, 0.5)


def test_ho_confluent_field_vs_erfc_form():
    T = make_transform(HO, "confluent", 0, -1.0)
    x = np.linspace(-9, 5, 500)
    z = (x + 2.0) / math.sqrt(2.0)
    e = erfc(z) - 2.0 + 2.0 * -1.0
    # omega [exp(-2 z^2) / (pi e^2) - z exp(-z^2) / (sqrt(pi) e)] with e = erfc(z) - 2 + 2 w0 ... written out
    e = -2.0 - erfc(-z)
    ref = np.exp(-2 * z * z) / (math.pi * e * e) - z * np.exp(-z * z) / (math.sqrt(math.pi) * e)
    assert np.max(np.abs(magnetic_field(T, x) - ref)) < 1e-7


@pytest.mark.parametrize("name", ["trig-consecutive", "hyp-consecutive", "ho-confluent", "hyp-confluent"])
def test_field_closed_forms(name):
    model, T = build(name)
    x = interior(T.default_grid(), 0.05)[::5]
    assert np.max(np.abs(magnetic_field(T, x) - magnetic_field_closed_form(T, x))) < 1e-7


def test_trig_confluent_field_needs_offset():
    m = TrigRosenMorse(2.0, 1.0, -2.0)
    x = np.linspace(0.2, 2.9, 40)
    w0 = -1.0
    published = magnetic_field_closed_form(make_transform(m, "confluent", 0, w0), x)
    shifted = make_transform(m, "confluent", 0, w0 + trig_confluent_w0_offset(m))
    assert np.max(np.abs(published - magnetic_field(shifted, x))) < 1e-7


# ------------------------------------------------------------ w closed forms
@pytest.mark.parametrize("name", ["ho-confluent", "trig-confluent", "hyp-confluent"])
def test_w_closed_form_ends(name):
    model, T = build(name)
    g = T.default_grid()
    ends = np.array([g.x_min, g.x_max])
    if isinstance(model, TrigRosenMorse):
        ends = np.array([1e-3, math.pi - 1e-3])
    w = w_closed_form(T, ends)
    assert w[0] == pytest.approx(T.w0, abs=1e-7)
    assert w[1] == pytest.approx(T.w0 - 1.0, abs=1e-7)


def test_w_closed_form_oscillator_center():
    T = make_transform(HO, "confluent", 0, -1.0)
    assert w_closed_form(T, np.array([-2.0]))[0] == pytest.approx(-1.5, abs=1e-14)


@pytest.mark.parametrize("model,j", [(HO, 0), (HO, 1), (HO, 2), (HO, 5), (HYP, 0), (HYP, 1), (HYP, 3)])
def test_w_closed_vs_quadrature(model, j):
    T = make_transform(model, "confluent", j, -1.0)
    g = T.default_grid()
    x = np.linspace(g.x_min, g.x_max, 52)[1:-1]
    assert np.max(np.abs(w_closed_form(T, x) - w_quadrature(T, x))) < 1e-7


def test_w_requires_confluent():
    with pytest.raises(InvalidArgument):
        w_closed_form(make_transform(HO, "consecutive", 1), np.array([0.0]))


# ------------------------------------------------------------ gamma, V0, f
def test_constant_eta_formulas():
    c = np.array([1.7])
    z = np.zeros(1)
    assert gamma_from_eta(c, z, z, 0.0, 0.0)[0] == pytest.approx(c[0] ** 2 / 4)
    assert f_from_eta(c, z, z, 0.0, 0.0)[0] == 0.0


def test_confluent_last_term_vanishes():
    _, T = build("ho-confluent")
    assert T.eps1 == T.eps2


@pytest.mark.parametrize("name,x", [("ho-consecutive", 0.0), ("hyp-consecutive", 0.0), ("ho-confluent", 1.0)])
def test_reconstruct_v0_examples(name, x):
    model, T = build(name)
    xs = np.array([x])
    assert reconstruct_v0_from_eta(T, xs)[0] == pytest.approx(model.potential(xs)[0], abs=1e-6)


def test_reconstruct_v0_all_combos(combo):
    model, T = combo
    x = interior(T.default_grid(), 0.1)[::37]
    x = x[np.abs(T.eta(x)) > 1e-150]
    assert np.max(np.abs(reconstruct_v0_from_eta(T, x) - model.potential(x))) < 1e-6


def test_gamma_matches_seed_form(combo):
    model, T = combo
    x = interior(T.default_grid(), 0.1)[::41]
    x = x[np.abs(T.eta(x)) > 1e-150]
    g_eta = gamma_coefficient(T, x)
    g_seed = T.gamma_jet(x, 0).value
    assert np.max(np.abs(g_eta - g_seed) / (1 + np.abs(g_seed))) < 1e-8


@given(st.floats(0.3, 3), st.floats(-3, 3), st.floats(-6, 6))
@settings(max_examples=25, deadline=None)
def test_reconstruct_v0_random_oscillators(omega, kappa, u):
    m = ShiftedOscillator(omega, kappa)
    T = make_transform(m, "consecutive", 1)
    x = np.array([-2 * kappa / omega + u / math.sqrt(omega)])
    v = m.potential(x)[0]
    assert reconstruct_v0_from_eta(T, x)[0] == pytest.approx(v, abs=1e-6 * (1 + abs(v)))


def test_extra_term_against_stencils():
    T = make_transform(HO, "consecutive", 1)
    h = 1e-3
    x0 = -1.7
    xs = x0 + h * np.arange(-2, 3)
    e = T.eta(xs)
    d1 = _diff_array(e, h, 1)[2]
    d2 = _diff_array(e, h, 2)[2]
    d = T.eps1 - T.eps2
    ref = d1**2 / (4 * e[2] ** 2) - d2 / (2 * e[2]) - d**2 / (4 * e[2] ** 2)
    assert extra_term_f(T, np.array([x0]))[0] == pytest.approx(ref, abs=1e-5)


def test_extra_term_finite_at_eta_zero():
    # x = -2 is a zero of eta for this transform; f is regular there
    T = make_transform(HO, "consecutive", 1)
    f = extra_term_f(T, np.array([-2.0 - 1e-3, -2.0, -2.0 + 1e-3]))
    assert np.all(np.isfinite(f))
    assert f[1] == pytest.approx(0.5 * (f[0] + f[2]), rel=1e-4)


# ------------------------------------------------------------ operators
def test_seed_annihilated(combo):
    model, T = combo
    x = interior(T.default_grid())
    for j in T.seed_levels():
        psi = model.eigen_jet(j, x, 2)
        out = l2_minus_jet(T, x, psi).value
        assert np.max(np.abs(out)) < 1e-6 * np.max(np.abs(psi.value))


def test_factorization(combo):
    model, T = combo
    x = interior(T.default_grid())
    for n in range(6):
        if n >= model.bound_state_count():
            break
        res, rhs = factorization_residual(T, n, x)
        psi = model.eigenfunction(n, x)
        mask = np.abs(psi) > 1e-8
        if np.max(np.abs(rhs)) == 0:
            assert np.max(np.abs(res)) < 1e-6 * np.max(np.abs(psi))
        else:
            assert np.max(np.abs(res[mask] / rhs[mask])) < 1e-6


def test_image_norm_oscillator_ground_state():
    T = make_transform(HO, "consecutive", 1)
    g = T.default_grid()
    phi = l2_minus_jet(T, g.points, HO.eigen_jet(0, g.points, 2)).value
    assert integrate(SampledFunction(g, phi**2)) == pytest.approx(2.0, rel=1e-9)


def test_apply_L2_sampled_matches_jets():
    T = make_transform(HO, "consecutive", 1)
    g = grid_with_spacing(-9, 5, 0.005)
    psi = HO.eigen_jet(3, g.points, 2)
    out = apply_L2("minus", T, SampledFunction(g, psi.value))
    exact = l2_minus_jet(T, g.points, psi).value
    assert np.max(np.abs(out.values - exact)[4:-4]) < 1e-6
    assert -2.0 in [round(z, 9) for z in out.meta["eta_zeros"]]
    with pytest.raises(InvalidArgument):
        apply_L2("sideways", T, SampledFunction(g, psi.value))


def test_intertwining(combo):
    model, T = combo
    x = interior(T.default_grid())
    v2 = partner_potential(T, x)
    for n in T.partner_levels(4):
        psi = model.eigen_jet(n, x, 4)
        phi = l2_minus_jet(T, x, psi)
        if np.max(np.abs(phi.value)) < 1e-8 * np.max(np.abs(psi.value)):
            continue            # the confluent seed is mapped to zero
        res = -phi.derivative(2) + (v2 - model.energy(n)) * phi.value
        assert np.max(np.abs(res)) < 1e-5 * np.max(np.abs(model.energy(n) * phi.value) + np.abs(phi.value))


# ------------------------------------------------------------ profiles and spectra
def test_profile_identities(combo):
    model, T = combo
    prof = partner_profile(T)
    assert np.array_equal(prof.V2 - prof.V0 - 4 * prof.B, np.zeros_like(prof.V0)) or \
        np.max(np.abs(prof.V2 - prof.V0 - 4 * prof.B)) <= 1e-12 * np.max(np.abs(prof.V2))
    dA = _diff_array(prof.A, prof.grid.h, 1)
    inner = slice(len(dA) // 20, -len(dA) // 20)
    assert np.max(np.abs(dA - prof.B)[inner]) < 1e-5 * (1 + np.max(np.abs(prof.B[inner])))


def test_consecutive_deletion_oscillator():
    T = make_transform(HO, "consecutive", 1)
    g = grid_with_spacing(-12, 10, 0.01)
    e = fd_spectrum(SampledFunction(g, partner_potential(T, g.points)), 4).energies
    assert np.max(np.abs(e - [0, 3, 4, 5])) < 5e-3


@pytest.mark.parametrize("model", [HO, TrigRosenMorse(2.0, 1.0, -2.0), HYP], ids=["ho", "trig", "hyp"])
def test_limit_w0_deletes_seed_level(model):
    # w0 = 0: psi_j / w is not normalisable, so level j leaves the spectrum
    T = make_transform(model, "confluent", 0, 0.0)
    g = T.default_grid()
    g = grid_with_spacing(g.x_min, g.x_max, min(g.h, 0.005))
    e = fd_spectrum(SampledFunction(g, partner_potential(T, g.points)), 3).energies
    exact = np.array([model.energy(n) for n in (1, 2, 3)])
    assert np.max(np.abs(e - exact) / (1 + exact)) < 5e-3
