import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bilayer_susy.errors import ConvergenceFailure, InvalidArgument, ParameterPole
from bilayer_susy.special import (erfc, gamma, gamma_family, gauss_2f1, hermite,
                                  incomplete_beta, jacobi, lower_incomplete_gamma,
                                  orthopoly, pochhammer)

mp.mp.dps = 30


# ---------------------------------------------------------- polynomials
def test_hermite_small_cases():
    assert orthopoly("hermite", 0, 3.7) == 1.0
    assert orthopoly("hermite", 2, 1.0) == 2.0


def test_legendre_p1():
    assert orthopoly("jacobi", 1, 0.5, (0.0, 0.0)) == pytest.approx(0.5)


def test_negative_degree():
    with pytest.raises(InvalidArgument):
        hermite(-1, 0.0)
    with pytest.raises(InvalidArgument):
        jacobi(-1, 0.0, 0.0, 0.0)


def test_jacobi_pole():
    with pytest.raises(ParameterPole):
        jacobi(3, -2.0 + 0j, 0.5 + 0j, 0.1)


@given(st.integers(0, 30), st.floats(-10, 10))
@settings(max_examples=60, deadline=None)
def test_hermite_recurrence(n, x):
    h0, h1, h2 = hermite(n, x), hermite(n + 1, x), hermite(n + 2, x)
    scale = abs(h2) + abs(2 * x * h1) + abs(2 * (n + 1) * h0) + 1e-300
    assert abs(h2 - 2 * x * h1 + 2 * (n + 1) * h0) <= 1e-10 * scale


@given(st.integers(0, 10), st.floats(-0.9, 4), st.floats(-0.9, 4), st.floats(-1, 1))
@settings(max_examples=60, deadline=None)
def test_jacobi_reflection(n, a, b, x):
    lhs = jacobi(n, a, b, -x)
    rhs = (-1) ** n * jacobi(n, b, a, x)
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))


@pytest.mark.parametrize("n,a,b,x", [(3, 0.5, 1.5, 0.3), (6, 2.0, 7.0, -0.8), (9, 4.25, 0.5, 0.95)])
def test_jacobi_vs_mpmath(n, a, b, x):
    assert jacobi(n, a, b, x) == pytest.approx(float(mp.jacobi(n, a, b, x)), rel=1e-11)


def test_jacobi_complex_parameters_vs_mpmath():
    # pseudo-Jacobi use: complex parameters, imaginary argument
    n, a, b, x = 3, -4.0 + 1.7j, -4.0 - 1.7j, 0.6j
    ref = complex(mp.jacobi(n, a, b, x))
    assert abs(complex(jacobi(n, a, b, x)) - ref) < 1e-11 * abs(ref)


def test_hermite_vs_mpmath():
    assert hermite(12, 1.3) == pytest.approx(float(mp.hermite(12, 1.3)), rel=1e-12)


# ---------------------------------------------------------- gamma family
def test_gamma_family_trivial():
    assert gamma_family("gamma", 0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_family("lower_incomplete", 1.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-13)
    assert gamma_family("erfc", 0.0) == 1.0
    with pytest.raises(InvalidArgument):
        gamma_family("digamma", 1.0)


def test_gamma_pole():
    with pytest.raises(ParameterPole):
        gamma(-2.0)


@given(st.floats(0.5, 30))
@settings(max_examples=80, deadline=None)
def test_gamma_recurrence(s):
    assert gamma(s + 1) == pytest.approx(s * gamma(s), rel=1e-12)


@pytest.mark.parametrize("s", [0.5, 1.3, 7.77, 25.5, 49.9])
def test_gamma_vs_mpmath(s):
    assert gamma(s) == pytest.approx(float(mp.gamma(s)), rel=1e-13)


def test_complex_gamma_vs_mpmath():
    z = 2.5 - 3.25j
    assert abs(complex(gamma(z)) - complex(mp.gamma(z))) < 1e-12 * abs(complex(mp.gamma(z)))


@pytest.mark.parametrize("s,x", [(0.5, 0.3), (2.5, 1.0), (3.5, 12.0), (10.5, 4.0), (1.5, 40.0)])
def test_lower_incomplete_vs_mpmath(s, x):
    assert lower_incomplete_gamma(s, x) == pytest.approx(float(mp.gammainc(s, 0, x)), rel=1e-12)


@pytest.mark.parametrize("x", [-3.0, -0.5, 0.1, 0.9, 2.0, 5.0, 9.0])
def test_erfc_vs_mpmath(x):
    assert abs(erfc(x) - float(mp.erfc(x))) < 1e-12


# ---------------------------------------------------------- incomplete beta
def test_incomplete_beta_trivial():
    assert incomplete_beta(0.3, 1.0, 1.0) == pytest.approx(0.3)
    assert incomplete_beta(1.0, 2.0, 2.0) == pytest.approx(1 / 6)
    assert incomplete_beta(0.5, 1.0, 2.0) == pytest.approx(3 / 8)


@given(st.floats(0.01, 0.99), st.floats(0.2, 20), st.floats(0.2, 20))
@settings(max_examples=40, deadline=None)
def test_incomplete_beta_vs_mpmath(x, a, b):
    ref = float(mp.betainc(a, b, 0, x))
    assert incomplete_beta(x, a, b) == pytest.approx(ref, rel=1e-11)


def test_incomplete_beta_rejects():
    with pytest.raises(InvalidArgument):
        incomplete_beta(1.5, 1.0, 1.0)
    with pytest.raises(InvalidArgument):
        incomplete_beta(0.5, -1.0, 1.0)


# ---------------------------------------------------------- 2F1
def test_2f1_trivial():
    assert gauss_2f1(0.3, 1.2, 2.5, 0.0) == 1.0
    assert gauss_2f1(1, 1, 2, 0.5).real == pytest.approx(-math.log(0.5) / 0.5, rel=1e-13)
    assert gauss_2f1(-2, 1, 1, 0.3).real == pytest.approx(0.49, rel=1e-14)


@pytest.mark.parametrize("a,b,c,z", [
    (0.5, 1.25, 2.0, 0.95),
    (0.3 + 1j, -0.2 + 0.5j, 1.7 - 0.3j, -0.97),
    (1.5j, -2.5 + 1.5j, 1 + 1.5j, np.exp(0.7j)),     # on the unit circle
    (0.25, 0.5, 2.0, np.exp(2.0j)),
])
def test_2f1_vs_mpmath(a, b, c, z):
    ref = complex(mp.hyp2f1(a, b, c, z))
    assert abs(complex(gauss_2f1(a, b, c, z)) - ref) < 1e-9 * max(1, abs(ref))


@given(st.floats(0.1, 2), st.floats(0.1, 2), st.floats(2.5, 5), st.floats(-0.85, 0.85))
@settings(max_examples=40, deadline=None)
def test_2f1_contiguous_relation(a, b, c, z):
    # c(c-1)(z-1) F(c-1) + c[c-1-(2c-a-b-1)z] F(c) + (c-a)(c-b) z F(c+1) = 0
    f_m = gauss_2f1(a, b, c - 1, z)
    f0 = gauss_2f1(a, b, c, z)
    f_p = gauss_2f1(a, b, c + 1, z)
    t = [c * (c - 1) * (z - 1) * f_m, c * (c - 1 - (2 * c - a - b - 1) * z) * f0, (c - a) * (c - b) * z * f_p]
    assert abs(sum(t)) < 1e-9 * max(abs(v) for v in t)


def test_2f1_failures():
    with pytest.raises(ParameterPole):
        gauss_2f1(0.5, 0.5, -1.0, 0.2)
    with pytest.raises(ConvergenceFailure):
        gauss_2f1(0.5, 0.5, 1.0, 1.0)              # Re(c-a-b) = 0 at z = 1
    with pytest.raises(ConvergenceFailure):
        gauss_2f1(0.5, 0.5, 1.0, 3.0 + 3.0j)


# ---------------------------------------------------------- pochhammer
def test_pochhammer():
    assert pochhammer(2.2, 0) == 1
    assert pochhammer(1, 4) == 24
    assert pochhammer(0.5, 2) == pytest.approx(0.75)


@given(st.floats(-5, 5), st.integers(0, 12))
@settings(max_examples=40, deadline=None)
def test_pochhammer_vs_mpmath(x, n):
    ref = float(mp.rf(x, n))
    assume(abs(ref) > 1e-200)
    assert complex(pochhammer(x, n)).real == pytest.approx(ref, rel=1e-12, abs=1e-12)
