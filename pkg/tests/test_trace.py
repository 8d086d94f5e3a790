import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmvkit.borg import borg_forward
from cmvkit.core import Arc, DomainError, Periodic
from cmvkit.trace import (J_CAP, L_coeffs, exp_taylor, log_taylor, moments,
                          trace_coefficients, xi_quadrature_check)
from cmvkit.weyl import M_functions

from conftest import random_explicit, random_periodic


def test_first_moment_formula(rng):
    for _ in range(10):
        seq = random_explicit(rng, -50, 50)
        k = int(rng.integers(-20, 20))
        want = -2 * seq.alpha(k) * np.conj(seq.alpha(k + 1))
        assert abs(moments(seq, k, 1)[0] - want) < 1e-13
        assert abs(L_coeffs(seq, k, 1)[0] - want) < 1e-13


def test_free_moments():
    np.testing.assert_array_equal(moments(Periodic([0.0]), 0, 6), 0)
    np.testing.assert_array_equal(L_coeffs(Periodic([0.0]), 3, 6), 0)


def test_n_independence(rng):
    seq = random_explicit(rng, -100, 100)
    a = moments(seq, 1, 3, n=32)
    b = moments(seq, 1, 3, n=64)
    np.testing.assert_allclose(a, b, atol=1e-14)
    with pytest.raises(DomainError):
        moments(seq, 0, 8, n=20)


def test_log_taylor_examples():
    c = np.zeros(6)
    c[0] = 1
    np.testing.assert_allclose(log_taylor(c), [(-1) ** (j + 1) / j for j in range(1, 7)],
                               atol=1e-15)
    np.testing.assert_array_equal(log_taylor(np.zeros(5)), 0)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=50)
def test_exp_log_round_trip(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=8) + 1j * rng.normal(size=8)
    np.testing.assert_allclose(exp_taylor(log_taylor(c)), c, atol=1e-12 * max(1, np.abs(c).max() ** 8))


def test_series_fit_of_log_m11(rng):
    seq = random_periodic(rng)
    N, r = 64, 0.1
    t = 2 * np.pi * np.arange(N) / N
    z = r * np.exp(1j * t)
    lm = np.log(M_functions(seq, 0, z).M11)
    fit = np.array([np.mean(lm * np.exp(-1j * j * t)) / r ** j for j in range(1, 5)])
    np.testing.assert_allclose(fit, L_coeffs(seq, 0, 4), atol=1e-6)


def test_borg_first_coefficient():
    seq = borg_forward(Arc(0, np.pi))
    L = L_coeffs(seq, 0, 4)
    assert abs(L[0] + 1j) < 1e-13
    res = xi_quadrature_check(seq, 0, 4)
    assert np.all(res < 1e-5)


def test_free_quadrature_check():
    np.testing.assert_allclose(xi_quadrature_check(Periodic([0.0]), 0, 3), 0, atol=1e-14)


def test_random_periodic_residual(rng):
    seq = random_periodic(rng, 4)
    res = xi_quadrature_check(seq, 1, 3, N=4096)
    assert np.all(res < 1e-4)


def test_cap_warns():
    seq = Periodic([0.2, 0.3])
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        tc = trace_coefficients(seq, 0, J_CAP + 3, N=512, check=False)
    assert len(tc.L) == J_CAP
    assert any("capped" in str(w.message) for w in rec)
    assert tc.to_csv().startswith("j,re_L,im_L,residual\n1,")
