"""Bulk two-point functions and the free/fixed boundary magnetizations.

Everything here is at m = 1.  With A(r) = r (sinh^2 phi - phi'^2):

    J(t)        = int_t^inf A dr
    G(t)        = sigma0 cosh(phi/2) exp(J/4)
    G~(t)       = sigma0 sinh(phi/2) exp(J/4)
    sigma_free  = sigma0 exp{-phi/4 + 1/4 int_t^inf [1 - e^phi  + A/2] dr}
    sigma_fixed = sigma0 exp{+phi/4 + 1/4 int_t^inf [e^-phi - 1 + A/2] dr}

sigma_free is the solution of 2(G - G~) s' = (G' - G~' + G~) s that tends to
sigma0, and grows like t^(3/8) near the boundary; sigma_fixed solves the
companion equation with G + G~ and behaves like 2^(1/4) t^(-1/8).

Tail integrals are accumulated once per table over the knot partition
(Gauss-Legendre in s = ln r on every knot interval) and cached on it.
Beyond r_max phi is replaced by (2/pi) K0(r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import QuadratureError, RangeError
from .painleve import TWO_OVER_PI, PainleveTable, eval_phi
from .specfun import EULER_GAMMA, bessel_k, sigma0

# rows of the integrand stack
_A, _FREE, _FIXED, _ETA = range(4)
_TAIL_SPAN = 60.0  # exp(-2 * 60) is far below double precision


@dataclass(frozen=True)
class CorrelatorBundle:
    t: float
    G: float
    G_tilde: float
    dG: float
    dG_tilde: float
    d2G: float
    d2G_tilde: float
    J: float


@lru_cache(maxsize=None)
def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _integrands(phi, dphi, r):
    area = r * (np.sinh(phi) ** 2 - dphi ** 2)
    return np.stack([
        area,
        -np.expm1(phi) + 0.5 * area,
        np.expm1(-phi) + 0.5 * area,
        -np.expm1(-phi),
    ])


def _far_integrands(r):
    phi = TWO_OVER_PI * bessel_k(0, r)
    dphi = -TWO_OVER_PI * bessel_k(1, r)
    return _integrands(np.float64(phi), np.float64(dphi), np.float64(r))


def _far_tail(a: float) -> np.ndarray:
    """int_a^inf of every integrand row, with phi = (2/pi) K0."""
    out = np.empty(4)
    for row in range(4):
        val, err = integrate.quad(lambda r: _far_integrands(r)[row], a, a + _TAIL_SPAN,
                                  epsabs=1e-22, epsrel=1e-13, limit=200)
        if err > 1e-14 + 1e-10 * abs(val):
            raise QuadratureError("far-tail quadrature did not converge", val, err)
        out[row] = val
    return out


def _segment_integrals(table: PainleveTable, s_lo, s_hi, n):
    """Integrals of all rows over [exp(s_lo), exp(s_hi)] (arrays of segments)."""
    x, w = _gauss(n)
    half = 0.5 * (s_hi - s_lo)
    s = (s_lo + half)[:, None] + half[:, None] * x[None, :]
    r = np.exp(s)
    phi, dphi, _ = eval_phi(table, r)
    vals = _integrands(phi, dphi, r) * r          # dr = r ds
    return np.einsum("ksn,n->ks", vals, w) * half


def _cumulative(table: PainleveTable):
    cached = table.cache.get("cumulative")
    if cached is not None:
        return cached
    n = table.config.segment_nodes
    s = np.log(table.knots)
    fine = _segment_integrals(table, s[:-1], s[1:], n)
    coarse = _segment_integrals(table, s[:-1], s[1:], max(2, n // 2))
    err = np.abs(fine - coarse).sum(axis=1)
    total = np.abs(fine).sum(axis=1)
    if np.any(err > 1e-9 * np.maximum(total, 1.0)):
        raise QuadratureError("knot-partition quadrature did not converge",
                              fine.sum(axis=1), err)
    tail = _far_tail(table.r_max)
    # cum[:, i] = int_{knot_i}^inf
    cum = np.empty((4, table.knots.size))
    cum[:, -1] = tail
    cum[:, :-1] = tail[:, None] + np.cumsum(fine[:, ::-1], axis=1)[:, ::-1]
    table.cache["cumulative"] = cum
    return cum


def _integrals(table: PainleveTable, t) -> np.ndarray:
    """int_t^inf of each integrand row; result has shape (4,) + shape(t)."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~(t_arr >= table.t_min * (1 - 1e-12))):
        raise RangeError(f"t below the tabulated range (t_min = {table.t_min})")
    out = np.empty((4, t_arr.size))
    inside = t_arr <= table.r_max
    if np.any(inside):
        cum = _cumulative(table)
        ti = np.clip(t_arr[inside], table.t_min, table.r_max)
        idx = np.clip(np.searchsorted(table.knots, ti, side="right"), 1, table.knots.size - 1)
        part = _segment_integrals(table, np.log(ti), np.log(table.knots[idx]),
                                  table.config.segment_nodes)
        out[:, inside] = part + cum[:, idx]
    for j in np.flatnonzero(~inside):
        out[:, j] = _far_tail(float(t_arr[j]))
    return out.reshape((4,) + np.shape(t))


def _phi_any(table: PainleveTable, t):
    """phi, phi', phi'' on [t_min, inf): table inside, K0 asymptotics outside."""
    t_arr = np.asarray(t, dtype=float)
    if np.all(t_arr <= table.r_max):
        return eval_phi(table, t)
    flat = np.atleast_1d(t_arr).ravel()
    phi = np.empty_like(flat)
    dphi = np.empty_like(flat)
    inside = flat <= table.r_max
    if np.any(inside):
        phi[inside], dphi[inside], _ = eval_phi(table, flat[inside])
    for j in np.flatnonzero(~inside):
        phi[j] = TWO_OVER_PI * bessel_k(0, flat[j])
        dphi[j] = -TWO_OVER_PI * bessel_k(1, flat[j])
    d2phi = 0.5 * np.sinh(2 * phi) - dphi / flat
    if np.ndim(t) == 0:
        return float(phi[0]), float(dphi[0]), float(d2phi[0])
    return phi.reshape(t_arr.shape), dphi.reshape(t_arr.shape), d2phi.reshape(t_arr.shape)


def _scalar(x, like):
    return float(x) if np.ndim(like) == 0 else x


def tail_J(table: PainleveTable, t):
    """J(t) = int_t^inf r (sinh^2 phi - phi'^2) dr."""
    return _scalar(_integrals(table, t)[_A], t)


def pair_correlators(table: PainleveTable, t: float) -> CorrelatorBundle:
    """G, G~ and their first two t-derivatives, all in closed form."""
    phi, d1, d2 = _phi_any(table, t)
    J = tail_J(table, t)
    sh2, dphi2 = math.sinh(phi) ** 2, d1 * d1
    dJ = -t * (sh2 - dphi2)
    # J'' = -(sinh^2 - phi'^2) - t phi' (sinh 2phi - 2 phi''), and on the
    # solution sinh 2phi - 2 phi'' = 2 phi'/t
    d2J = -sh2 - dphi2
    amp = sigma0(1.0) * math.exp(0.25 * J)
    ch, sh = math.cosh(0.5 * phi), math.sinh(0.5 * phi)

    def derivs(c, s):
        # c = cosh or sinh(phi/2), s = its derivative partner
        d1c = 0.5 * s * d1
        d2c = 0.25 * c * dphi2 + 0.5 * s * d2
        g = amp * c
        dg = amp * (d1c + 0.25 * c * dJ)
        d2g = amp * (d2c + 0.5 * d1c * dJ + 0.25 * c * d2J + c * dJ * dJ / 16.0)
        return g, dg, d2g

    G, dG, d2G = derivs(ch, sh)
    Gt, dGt, d2Gt = derivs(sh, ch)
    return CorrelatorBundle(t=float(t), G=G, G_tilde=Gt, dG=dG, dG_tilde=dGt,
                            d2G=d2G, d2G_tilde=d2Gt, J=J)


def sigma_free(table: PainleveTable, t):
    """Local magnetization for free boundary conditions (absolute, m = 1)."""
    phi, _, _ = _phi_any(table, t)
    expo = -0.25 * phi + 0.25 * _integrals(table, t)[_FREE]
    return _scalar(sigma0(1.0) * np.exp(expo), t)


def sigma_fixed(table: PainleveTable, t):
    """Local magnetization for fixed boundary conditions (absolute, m = 1)."""
    phi, _, _ = _phi_any(table, t)
    expo = 0.25 * phi + 0.25 * _integrals(table, t)[_FIXED]
    return _scalar(sigma0(1.0) * np.exp(expo), t)


def _log_derivs(table, t, sign):
    phi, d1, d2 = _phi_any(table, t)
    t = np.asarray(t, dtype=float)
    sh2 = np.sinh(phi) ** 2
    area = t * (sh2 - d1 * d1)
    darea = sh2 + d1 * d1  # -J''
    if sign > 0:   # free: integrand 1 - e^phi + A/2
        integrand = -np.expm1(phi) + 0.5 * area
        dintegrand = -np.exp(phi) * d1 + 0.5 * darea
    else:          # fixed: integrand e^-phi - 1 + A/2
        integrand = np.expm1(-phi) + 0.5 * area
        dintegrand = -np.exp(-phi) * d1 + 0.5 * darea
    first = -sign * 0.25 * d1 - 0.25 * integrand
    second = -sign * 0.25 * d2 - 0.25 * dintegrand
    return first, second


def sigma_free_derivs(table: PainleveTable, t):
    """(sigma_free, d/dt, d^2/dt^2) from the closed form."""
    s = sigma_free(table, t)
    l1, l2 = _log_derivs(table, t, +1)
    return s, _scalar(s * l1, t), _scalar(s * (l2 + l1 * l1), t)


def sigma_fixed_derivs(table: PainleveTable, t):
    """(sigma_fixed, d/dt, d^2/dt^2) from the closed form."""
    s = sigma_fixed(table, t)
    l1, l2 = _log_derivs(table, t, -1)
    return s, _scalar(s * l1, t), _scalar(s * (l2 + l1 * l1), t)


def ln2_identity(table: PainleveTable, include_core: bool = True) -> float:
    """int_0^inf (1 - exp(-phi)) dr, which should equal ln 2.

    On (0, t_min) phi is replaced by its short-distance form, for which
    1 - exp(-phi) = 1 + r Omega / 2 integrates in closed form.
    """
    total = float(_cumulative(table)[_ETA, 0])
    if include_core:
        a = table.t_min
        c = EULER_GAMMA - math.log(8.0)
        # int_0^a r (ln r + c) dr = a^2/2 (ln a + c) - a^2/4
        total += a + 0.5 * (0.5 * a * a * (math.log(a) + c) - 0.25 * a * a)
    return total
