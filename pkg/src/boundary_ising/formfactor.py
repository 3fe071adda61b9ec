"""Truncated form-factor expansion of the boundary magnetization.

    sigma(t, lam) / sigma0 = exp(sum_k f_k / k)

    f_k = -pi^-k int_0^inf du_1 ... du_k
          prod_l (ch u_l - 1)/(ch u_l + ch u_{l+1}) (ch u_l + 1 - lam)/(ch u_l - 1 + lam)
                 exp(-t ch u_l),                       u_{k+1} = u_1

Each f_k is a k-dimensional Gauss-Legendre tensor-product sum on
[0, U_cut]^k.  Because the integrand is a cyclic chain, that sum equals
the trace of the k-th power of one n x n matrix,
M_ij = w_i g(u_i) / (ch u_i + ch u_j), so the cost is O(k n^3) rather
than O(n^k); :func:`ff_term_tensor` keeps the literal tensor sum for
cross-checking.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

MAX_ORDER = 4
DEFAULT_NODES = 64
WARN_T = 0.5
WARN_BOUND = 1e-3


@dataclass(frozen=True)
class FormFactorEstimate:
    t: float
    lam: float
    K: int
    value: float                 # sigma_FF / sigma0
    terms: tuple[float, ...]     # f_1 ... f_K
    trunc_bound: float
    nodes: int
    derivative: float            # d(value)/dt
    warning: bool

    @property
    def log_value(self) -> float:
        return sum(f / k for k, f in enumerate(self.terms, start=1))


@lru_cache(maxsize=None)
def _nodes(n):
    return np.polynomial.legendre.leggauss(n)


def u_cut(t: float) -> float:
    """Truncation point with exp(-t ch U) = exp(-t - 40)."""
    return math.acosh(1.0 + 40.0 / t)


def _chain(t: float, lam: float, nodes: int):
    """Nodes' ch u, and the single-variable weight w_i g(u_i)."""
    x, w = _nodes(nodes)
    U = u_cut(t)
    u = 0.5 * U * (x + 1.0)
    w = 0.5 * U * w
    ch = np.cosh(u)
    chm1 = 2.0 * np.sinh(0.5 * u) ** 2          # ch u - 1 without cancellation
    # (ch-1)/(ch-1+lam) -> 1 at lam = 0 (the (ch-1) factors cancel exactly)
    ratio = np.ones_like(u) if lam == 0 else chm1 / (chm1 + lam)
    g = ratio * (ch + 1.0 - lam) * np.exp(-t * ch)
    return ch, w * g


def _matmul(a, b):
    # plain loops, no BLAS: reductions in a fixed order, bit-stable across threads
    return np.einsum("ij,jk->ik", a, b, optimize=False)


def _trace_powers(t, lam, kmax, nodes):
    ch, wg = _chain(t, lam, nodes)
    M = wg[:, None] / (ch[:, None] + ch[None, :])
    traces, dtraces = [], []
    P = np.eye(nodes)
    for k in range(1, kmax + 1):
        P = _matmul(P, M)
        diag = np.diagonal(P)
        traces.append(math.fsum(diag))
        # d/dt Tr M^k = -k Tr(C M^k), C = diag(ch u)
        dtraces.append(-k * math.fsum(ch * diag))
    return traces, dtraces


def _check_order(k):
    if not 1 <= k <= MAX_ORDER:
        raise DomainError(f"form-factor order must be in 1..{MAX_ORDER}, got {k}")


def _check_point(t, lam):
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")
    if not lam >= 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")


def ff_term(k: int, t: float, lam: float, nodes: int = DEFAULT_NODES,
            derivative: bool = False):
    """f_k(t, lam); with ``derivative=True`` returns (f_k, d f_k / dt)."""
    _check_order(k)
    _check_point(t, lam)
    traces, dtraces = _trace_powers(t, lam, k, nodes)
    scale = -math.pi ** (-k)
    if derivative:
        return scale * traces[-1], scale * dtraces[-1]
    return scale * traces[-1]


def ff_term_tensor(k: int, t: float, lam: float, nodes: int = 24, order=None) -> float:
    """f_k as the literal k-dimensional tensor-product sum.

    ``order`` permutes the quadrature axes; by cyclic symmetry the result
    must not depend on it.
    """
    _check_order(k)
    _check_point(t, lam)
    ch, wg = _chain(t, lam, nodes)
    axes = list(range(k)) if order is None else list(order)
    total = np.ones((nodes,) * k)
    for l in range(k):
        a, b = axes[l], axes[(l + 1) % k]
        shape_a = [1] * k
        shape_a[a] = nodes
        shape_b = [1] * k
        shape_b[b] = nodes
        total = total * (wg.reshape(shape_a) / (ch.reshape(shape_a) + ch.reshape(shape_b)))
    return -math.pi ** (-k) * float(total.sum())


def ff_magnetization(t: float, lam: float, K: int = 3,
                     nodes: int = DEFAULT_NODES) -> FormFactorEstimate:
    """sigma/sigma0 from the first K form factors, with a truncation estimate.

    The omitted tail sum_{k>K} f_k/k is estimated by geometric extrapolation
    |f_K / K| rho / (1 - rho), rho = |f_K / f_{K-1}|.
    """
    _check_order(K)
    _check_point(t, lam)
    traces, dtraces = _trace_powers(t, lam, K, nodes)
    terms = tuple(-math.pi ** (-k) * tr for k, tr in enumerate(traces, start=1))
    dterms = [-math.pi ** (-k) * d for k, d in enumerate(dtraces, start=1)]
    log_value = sum(f / k for k, f in enumerate(terms, start=1))
    value = math.exp(log_value)
    dvalue = value * sum(d / k for k, d in enumerate(dterms, start=1))

    if K == 1:
        bound = abs(terms[0])
    else:
        rho = abs(terms[-1] / terms[-2]) if terms[-2] != 0 else math.inf
        bound = abs(terms[-1] / K) * rho / (1.0 - rho) if rho < 1 else math.inf
    bound = max(bound, np.finfo(float).tiny)
    flag = t < WARN_T or not bound <= WARN_BOUND
    if flag:
        warnings.warn(f"form-factor series unreliable at t={t}, lambda={lam} "
                      f"(truncation bound {bound:.3g})", RuntimeWarning, stacklevel=2)
    return FormFactorEstimate(t=float(t), lam=float(lam), K=K, value=value, terms=terms,
                              trunc_bound=bound, nodes=nodes, derivative=dvalue, warning=flag)
