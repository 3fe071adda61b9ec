import math

import numpy as np
import pytest
from scipy import integrate
from scipy.special import k0, k1

from boundary_ising import (RangeError, eval_phi, ln2_identity, pair_correlators, sigma0,
                            sigma_fixed, sigma_fixed_derivs, sigma_free, sigma_free_derivs,
                            tail_J)
from boundary_ising.verify import first_order_residuals

S0 = sigma0(1.0)


def area(table, r):
    phi, dphi, _ = eval_phi(table, r)
    return r * (math.sinh(phi) ** 2 - dphi ** 2)


def test_J_at_r_max(table):
    f = lambda r: r * (4 / math.pi ** 2) * (k0(r) ** 2 - k1(r) ** 2)
    ref, _ = integrate.quad(f, 14.0, 80.0, epsabs=1e-20, epsrel=1e-13)
    assert abs(tail_J(table, 14.0) - ref) < 1e-12


def test_J_negative_increasing(table):
    t = np.linspace(4, 14, 101)
    J = tail_J(table, t)
    assert np.all(J < 0) and np.all(np.diff(J) > 0)


@pytest.mark.parametrize("t", [0.01, 0.3, 1.0, 3.0, 6.5])
def test_J_additivity(table, t):
    direct, _ = integrate.quad(lambda r: area(table, r), t, 2 * t,
                               epsabs=1e-14, epsrel=1e-13, limit=500)
    assert abs(tail_J(table, t) - tail_J(table, 2 * t) - direct) < 1e-10


def test_J_beyond_r_max_continuous(table):
    assert tail_J(table, 14.0 + 1e-9) == pytest.approx(tail_J(table, 14.0), abs=1e-15)
    with pytest.raises(RangeError):
        tail_J(table, 1e-4)


@pytest.mark.parametrize("t", [1e-3, 0.01, 0.5, 2.0, 9.0, 13.0, 20.0])
def test_pair_identity(table, t):
    b = pair_correlators(table, t)
    assert b.G > b.G_tilde > 0
    assert b.G ** 2 - b.G_tilde ** 2 == pytest.approx(S0 ** 2 * math.exp(b.J / 2), rel=1e-9)


def test_G_tilde_large_t(table):
    b = pair_correlators(table, 12.0)
    assert abs(b.G_tilde / S0 - k0(12.0) / math.pi) < 1e-8
    assert abs(b.G / S0 - 1) < 1e-8


def _fd(f, t, h):
    # five-point stencils for the first and second derivative
    v = [f(t + k * h) for k in (-2, -1, 1, 2)]
    return (v[0] - 8 * v[1] + 8 * v[2] - v[3]) / (12 * h)


@pytest.mark.parametrize("t", [1.0, 2.0, 5.0])
def test_G_derivatives_fd(table, t):
    b = pair_correlators(table, t)
    h = 1e-3 * t
    assert _fd(lambda x: pair_correlators(table, x).G, t, h) == pytest.approx(b.dG, rel=1e-7)
    assert _fd(lambda x: pair_correlators(table, x).G_tilde, t, h) == \
        pytest.approx(b.dG_tilde, rel=1e-7)
    assert _fd(lambda x: pair_correlators(table, x).dG, t, h) == pytest.approx(b.d2G, rel=1e-7)
    assert _fd(lambda x: pair_correlators(table, x).dG_tilde, t, h) == \
        pytest.approx(b.d2G_tilde, rel=1e-7)


def test_free_examples(table):
    assert abs(sigma_free(table, 12.0) / S0 - 1) < 1e-4
    t = np.geomspace(1e-3, 1e-2, 30)
    slope = np.polyfit(np.log(t), np.log(sigma_free(table, t)), 1)[0]
    assert abs(slope - 0.375) < 0.01


def test_fixed_examples(table):
    assert abs(1e-3 ** 0.125 * sigma_fixed(table, 1e-3) / 2 ** 0.25 - 1) < 0.02
    t = np.geomspace(1e-3, 14, 400)
    assert np.all(np.diff(sigma_fixed(table, t)) < 0)
    assert np.all(np.diff(sigma_free(table, t)) > 0)


def test_first_order_equations(table):
    for t in np.geomspace(0.1, 10, 25):
        free, fixed = first_order_residuals(table, t)
        assert abs(free) < 1e-8 * S0 ** 2
        assert abs(fixed) < 1e-8 * S0 ** 2


def test_log_derivative_consistency(table):
    for t in np.geomspace(0.1, 10, 25):
        b = pair_correlators(table, t)
        s, ds, _ = sigma_free_derivs(table, t)
        rate = (b.dG - b.dG_tilde + b.G_tilde) / (2 * (b.G - b.G_tilde))
        assert ds / s == pytest.approx(rate, rel=1e-7)


@pytest.mark.parametrize("t", [0.05, 1.0, 4.0])
def test_closed_form_derivatives_fd(table, t):
    h = 1e-3 * t
    for fn, fd in ((sigma_free, sigma_free_derivs), (sigma_fixed, sigma_fixed_derivs)):
        _, d1, d2 = fd(table, t)
        assert _fd(lambda x: fn(table, x), t, h) == pytest.approx(d1, rel=1e-7)
        assert _fd(lambda x: fd(table, x)[1], t, h) == pytest.approx(d2, rel=1e-7)


def test_vectorized_matches_scalar(table):
    t = np.array([0.002, 0.7, 3.3, 13.9])
    assert np.array_equal(sigma_free(table, t), [sigma_free(table, x) for x in t])
    assert np.array_equal(tail_J(table, t), [tail_J(table, x) for x in t])


def test_ln2(table):
    val = ln2_identity(table)
    assert abs(val - math.log(2)) < 1e-4
    without = ln2_identity(table, include_core=False)
    assert 0.95e-3 < val - without < 1e-3


def test_ln2_integrand_bounds(table):
    r = np.geomspace(1e-3, 14, 500)
    g = 1 - np.exp(-eval_phi(table, r)[0])
    assert np.all((g > 0) & (g < 1))
