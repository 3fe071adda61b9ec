import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from boundary_ising import (DomainError, ff_magnetization, ff_term, ff_term_tensor, sigma0,
                            sigma_fixed, sigma_free)

F1_T2_L1 = -0.00266955046706950223   # mpmath quadrature of the k=1 integral


def _f1_adaptive(t, lam):
    def g(u):
        ch = math.cosh(u)
        return (ch - 1) / (2 * ch) * (ch + 1 - lam) / (ch - 1 + lam) * math.exp(-t * ch)
    val, _ = integrate.quad(g, 0, math.acosh(1 + 50 / t), epsabs=1e-16, epsrel=1e-13, limit=200)
    return -val / math.pi


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0, 5.0])
def test_f1_lambda_one_adaptive(t):
    assert abs(ff_term(1, t, 1.0) - _f1_adaptive(t, 1.0)) < 1e-10


def test_f1_mpmath_value():
    assert ff_term(1, 2.0, 1.0) == pytest.approx(F1_T2_L1, rel=1e-13)


@pytest.mark.parametrize("lam", [0.0, 0.3, 1.0, 1.7, 2.0])
def test_f1_sign(lam):
    for t in (0.5, 1.0, 3.0):
        assert ff_term(1, t, lam) <= 0


def test_f1_sign_beyond_two():
    # (ch u + 1 - lam) changes sign for lam > 2; the integral is positive there
    assert ff_term(1, 1.0, 5.0) > 0


def test_f1_small_at_t10():
    assert abs(ff_term(1, 10.0, 1.0)) < math.exp(-10)


def test_node_doubling():
    assert abs(ff_term(2, 1.0, 2.0, nodes=48) - ff_term(2, 1.0, 2.0, nodes=96)) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("t,lam", [(1.0, 0.5), (2.0, 2.0), (4.0, 5.0)])
def test_default_nodes_converged(k, t, lam):
    a = ff_term(k, t, lam, nodes=32)
    b = ff_term(k, t, lam, nodes=64)
    c = ff_term(k, t, lam, nodes=128)
    assert abs(a - b) < 1e-10 and abs(b - c) < 1e-10


@pytest.mark.parametrize("k", [2, 3])
def test_trace_equals_tensor_sum(k):
    for t, lam in ((1.0, 0.5), (2.0, 3.0)):
        assert ff_term(k, t, lam, nodes=24) == pytest.approx(ff_term_tensor(k, t, lam, nodes=24),
                                                             rel=1e-13)


def test_cyclic_axis_permutation():
    ref = ff_term_tensor(3, 1.5, 0.7, nodes=16)
    for order in itertools.permutations(range(3)):
        assert ff_term_tensor(3, 1.5, 0.7, nodes=16, order=order) == pytest.approx(ref, rel=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 6.0), st.floats(0.0, 8.0))
def test_hierarchy(t, lam):
    f = [abs(ff_term(k, t, lam)) for k in (1, 2, 3)]
    assert f[2] < f[1] < f[0]


def test_exponential_decay_rate():
    # |f_k| <= C e^(-k t) with one C for all k and t >= 1
    vals = [(k, t, abs(ff_term(k, t, 1.0))) for k in (1, 2, 3) for t in (1.0, 2.0, 4.0, 8.0)]
    C = max(v * math.exp(k * t) for k, t, v in vals)
    assert C < 1.0


def test_derivative_fd():
    t, lam, h = 2.0, 0.7, 1e-4
    est = ff_magnetization(t, lam)
    fd = (ff_magnetization(t + h, lam).value - ff_magnetization(t - h, lam).value) / (2 * h)
    assert est.derivative == pytest.approx(fd, rel=1e-7)


def test_lambda_zero_closed_form(table):
    for t in (1.0, 2.0, 4.0):
        est = ff_magnetization(t, 0.0)
        assert abs(est.value - sigma_free(table, t) / sigma0()) < est.trunc_bound + 1e-8


@pytest.mark.parametrize("lam", [0.0, 0.5, 2.0, 5.0])
def test_large_t(lam):
    assert abs(ff_magnetization(12.0, lam).value - 1) < 1e-4


def test_large_lambda_fixed(table):
    est = ff_magnetization(2.0, 1e4)
    assert abs(est.value - sigma_fixed(table, 2.0) / sigma0()) < est.trunc_bound


def test_estimate_fields():
    est = ff_magnetization(2.0, 1.0, K=3)
    assert est.K == 3 and len(est.terms) == 3 and est.nodes == 64
    assert est.trunc_bound > 0 and not est.warning
    assert math.exp(est.log_value) == est.value


def test_warning_flag():
    with pytest.warns(RuntimeWarning):
        est = ff_magnetization(0.3, 1.0)
    assert est.warning


@pytest.mark.parametrize("args", [(0, 1.0, 1.0), (5, 1.0, 1.0), (1, 0.0, 1.0), (1, 1.0, -0.1)])
def test_domain(args):
    with pytest.raises(DomainError):
        ff_term(*args)


def test_deterministic():
    a = ff_magnetization(1.3, 0.9, K=4)
    b = ff_magnetization(1.3, 0.9, K=4)
    assert a == b


def test_large_lambda_converges_like_inverse_lambda(table):
    ref = sigma_fixed(table, 2.0) / sigma0()
    d4 = ff_magnetization(2.0, 1e4).value - ref
    d6 = ff_magnetization(2.0, 1e6).value - ref
    assert d4 / d6 == pytest.approx(100, rel=0.01)
    est = ff_magnetization(2.0, 1e12)
    assert abs(est.value - ref) < est.trunc_bound
