import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cusp_oracle
from selberg_levy import lfunc
from selberg_levy.lfunc import get_instance


def mp_zeta(s, derivative=0):
    with mp.workdps(30):
        return complex(mp.zeta(mp.mpc(s), derivative=derivative))


@pytest.mark.parametrize(
    "s",
    [2, 0.5 + 14.134725j, 0.3 + 1j, -3.5 + 2j, 0.5 + 999j, 1.5 - 250j, 3 + 40j, 0.999999 + 0j, -20.5],
)
def test_zeta_against_mpmath(s):
    got = complex(lfunc.zeta_eval(s))
    ref = mp_zeta(s)
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))


def test_zeta_special_values():
    assert abs(lfunc.zeta_eval(0.0) + 0.5) < 1e-15
    assert abs(lfunc.zeta_eval(-1.0) + 1 / 12) < 1e-14
    assert abs(lfunc.zeta_eval(2.0) - math.pi**2 / 6) < 1e-15
    with pytest.raises(lfunc.PoleError):
        get_instance("zeta")(1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(-5, 5), st.floats(-300, 300))
def test_zeta_derivative_against_mpmath(sr, si):
    s = complex(sr, si)
    if abs(s - 1) < 1e-3:
        return
    got = complex(lfunc.zeta_deriv(s))
    ref = mp_zeta(s, 1)
    assert abs(got - ref) <= 1e-9 * max(1.0, abs(ref))


@pytest.mark.parametrize("k", [12, 18, 22, 26])
@pytest.mark.parametrize("s", [0.5 + 0j, 0.75 + 3j, 0.5 + 20j, -1 + 7j, 2 - 12j, 0.5 + 60j])
def test_cusp_against_mellin_oracle(k, s):
    got = complex(lfunc.cuspform_eval(k, s))
    ref = cusp_oracle(k, s)
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))


@pytest.mark.parametrize("name,sigma,n_terms,tol", [
    ("zeta", 4.0, 20000, 1e-11),
    ("cusp12", 4.0, 10000, 1e-9),
    ("cusp26", 4.0, 10000, 1e-9),
    ("cusp18", 3.0, 10000, 1e-6),
])
def test_dirichlet_series_region(name, sigma, n_terms, tol):
    F = get_instance(name)
    s = sigma + 1j * np.array([0, 5, 17.5, 100])
    assert np.max(np.abs(F(s) - lfunc.direct_sum(F, s, n_terms))) < tol


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(lfunc.INSTANCE_NAMES), st.floats(-2, 3), st.floats(0.5, 80))
def test_functional_equation(name, sr, si):
    # xi_F(s) = omega * conj(xi_F(1 - conj s)) with real coefficients
    F = get_instance(name)
    s = complex(sr, si)
    lhs = complex(lfunc.xi_eval(F, s))
    rhs = complex(F.omega * np.conj(lfunc.xi_eval(F, 1 - np.conj(s))))
    assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), 1e-300)


def test_xi_log_derivative_against_mpmath():
    F = get_instance("zeta")

    def mp_xi(s):
        return s * (s - 1) * mp.pi ** (-s / 2) * mp.gamma(s / 2) * mp.zeta(s)

    for s in (2.5 - 1j, 3.5 + 0j, 1.3 + 4j):
        with mp.workdps(30):
            ref = complex(mp.diff(mp_xi, mp.mpc(s)) / mp_xi(mp.mpc(s)))
        assert abs(complex(lfunc.xi_log_deriv(F, s)) - ref) < 1e-11


def test_xi_log_derivative_cusp_finite_difference():
    F = get_instance("cusp18")
    s = 2.5 - 1j
    h = 1e-4
    fd = (lfunc.log_xi(F, s + h) - lfunc.log_xi(F, s - h)) / (2 * h)
    assert abs(complex(lfunc.xi_log_deriv(F, s)) - complex(fd)) < 1e-7


def test_product_instance():
    z = get_instance("zeta")
    z2 = get_instance("zeta2")
    s = np.array([0.5 + 3j, 2.0, -1 + 10j])
    assert np.allclose(z2.kernel(s, 1e-12), z.kernel(s, 1e-12) ** 2, rtol=1e-13)
    assert z2.m_F == 2 and z2.degree == 2 and z2.self_dual_sign == 1
    # coefficients of zeta^2 are the divisor counts
    assert list(z2.coefficients(12)) == [1, 2, 2, 3, 2, 4, 2, 4, 3, 4, 2, 6]
    mixed = get_instance("zeta*cusp18")
    assert mixed.self_dual_sign == -1
    assert abs(lfunc.xi_log_deriv(mixed, 2.5) - lfunc.xi_log_deriv(z, 2.5)
               - lfunc.xi_log_deriv(get_instance("cusp18"), 2.5)) < 1e-9


def test_instance_data():
    assert get_instance("zeta").degree == 1
    for k in (12, 18, 22, 26):
        F = get_instance(f"cusp{k}")
        assert F.degree == 2
        assert F.self_dual_sign == (1 if k % 4 == 0 else -1)
    with pytest.raises(KeyError):
        get_instance("cusp99")


def test_selberg_data_validation():
    with pytest.raises(ValueError):
        lfunc.SelbergData("bad", 0, 1.0, ((0.5, 0j),), 2.0, kernel=lambda s, tol: s)
    with pytest.raises(ValueError):
        lfunc.SelbergData("bad", 0, -1.0, ((0.5, 0j),), 1.0, kernel=lambda s, tol: s)
    with pytest.raises(ValueError):
        lfunc.SelbergData("bad", 0, 1.0, ((0.5, -1 + 0j),), 1.0, kernel=lambda s, tol: s)


def test_envelope_limits():
    with pytest.raises(lfunc.AccuracyError):
        lfunc.cuspform_eval(12, 0.5 + 1500j)
    with pytest.raises(lfunc.InsufficientCoefficients):
        lfunc.cuspform_eval(12, 0.5 + 900j, max_coeffs=64)
    with pytest.raises(lfunc.ZeroOfXiError):
        lfunc.xi_log_deriv(get_instance("cusp18"), 0.5)
