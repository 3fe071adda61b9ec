"""Magnetization with a boundary magnetic field.

sigma(t, lam) = u(t, lam) * sigma_free(t), where u solves

    u'' - (phi' - ch phi + lam) u' + (lam/2)(phi' - ch phi + 1) u = 0

and u -> 1 as t -> inf.  The equation has the two large-t behaviours
u ~ 1 and u ~ exp((lam - 1) t).  For lam <= 1 the second one grows when
integrating backwards, so the seed at t0 must be accurate well beyond
the leading "u = 1": it is taken from the form-factor series (order
``config.seed_order``), which leaves an O(exp(-3 t0)) seed error.

All integrations run backwards in s = ln t with state (u, t u'), which
keeps the logarithmic growth of u near the boundary well resolved.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .correlators import (CorrelatorBundle, pair_correlators, sigma_fixed,
                          sigma_free, sigma_free_derivs)
from .errors import DomainError, RangeError, SolverError
from .formfactor import ff_magnetization
from .painleve import PainleveTable, SolverConfig, eval_phi
from .specfun import sigma0, tricomi_psi

BRANCHES = ("stable", "metastable", "highT_fixed")
DEFAULT_POINTS = 200


@dataclass(frozen=True, eq=False)
class MagnetizationProfile:
    lam: float
    ts: np.ndarray
    u: np.ndarray
    sigma_ratio: np.ndarray
    sigma_abs: np.ndarray
    branch: str
    meta: dict
    table: PainleveTable = field(repr=False)
    u_of_t: Callable = field(repr=False)
    seed: tuple = (math.nan, math.nan)   # (u(t0), u'(t0)) as seeded

    @property
    def t0(self) -> float:
        return self.meta["t0"]


def _grid(table: PainleveTable, t0: float, ts):
    if ts is None:
        return np.geomspace(table.t_min, t0, DEFAULT_POINTS)
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or np.any(np.diff(ts) <= 0):
        raise DomainError("evaluation grid must be a non-empty increasing 1-d array")
    if ts[0] < table.t_min * (1 - 1e-12) or ts[-1] > t0 * (1 + 1e-12):
        raise RangeError(f"grid must lie within [{table.t_min}, {t0}]")
    return np.clip(ts, table.t_min, t0)


def _u_rhs_factory(table: PainleveTable, lam: float):
    interp = table.interpolant

    def rhs(s, y):
        t = math.exp(s)
        phi = float(interp(s))
        dphi = float(interp(s, 1)) / t
        a = dphi - math.cosh(phi)
        # d(t u')/ds = t u' + t^2 u''
        return [y[1], y[1] + t * (a + lam) * y[1] - 0.5 * lam * t * t * (a + 1.0) * y[0]]

    return rhs


def _integrate_u(table, lam, config, t0, u0, du0):
    s0, s1 = math.log(t0), math.log(table.t_min)
    sol = solve_ivp(_u_rhs_factory(table, lam), (s0, s1), [u0, t0 * du0],
                    method="DOP853", rtol=config.rel_tol, atol=config.abs_tol,
                    dense_output=True)
    if sol.status != 0:
        raise SolverError(f"u integration failed: {sol.message}", math.exp(sol.t[-1]))
    return sol.sol


def _profile(table, lam, config, t0, u0, du0, ts, branch, meta):
    dense = _integrate_u(table, lam, config, t0, u0, du0)
    lo = table.t_min

    def u_of_t(t):
        t_arr = np.asarray(t, dtype=float)
        if np.any((t_arr < lo * (1 - 1e-12)) | (t_arr > t0 * (1 + 1e-12))):
            raise RangeError(f"t outside profile range [{lo}, {t0}]")
        s = np.log(np.clip(t_arr, lo, t0))
        y = dense(s)
        if np.ndim(t) == 0:
            return float(y[0]), float(y[1]) / float(t_arr)
        return y[0], y[1] / t_arr

    ts = _grid(table, t0, ts)
    u, _ = u_of_t(ts)
    u[-1] = u0 if ts[-1] == t0 else u[-1]
    ratio = u * sigma_free(table, ts) / sigma0(1.0)
    meta = dict(meta, t0=t0, config=config)
    return MagnetizationProfile(lam=float(lam), ts=ts, u=u, sigma_ratio=ratio,
                                sigma_abs=ratio * sigma0(1.0), branch=branch, meta=meta,
                                table=table, u_of_t=u_of_t, seed=(u0, du0))


def _seed_point(table: PainleveTable, config: SolverConfig) -> float:
    return min(config.seed_point, table.r_max)


def _stable_ff(t0, lam, config):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return ff_magnetization(t0, lam, K=config.seed_order, nodes=config.ff_nodes)


def solve_u(table: PainleveTable, lam: float, config: SolverConfig | None = None,
            ts=None) -> MagnetizationProfile:
    """Stable-branch profile: u(t, lam) on [t_min, t0] seeded by the form factors."""
    if not lam >= 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    config = config or table.config
    t0 = _seed_point(table, config)
    est = _stable_ff(t0, lam, config)
    s0 = sigma0(1.0)
    sf, dsf, _ = sigma_free_derivs(table, t0)
    u0 = est.value * s0 / sf
    du0 = (est.derivative * s0 - u0 * dsf) / sf
    meta = {"seed": "form_factor", "seed_order": config.seed_order}
    return _profile(table, lam, config, t0, u0, du0, ts, "stable", meta)


def metastable_amplitude(lam: float) -> float:
    """Coefficient (lam / (2 - lam))^(1/2) of exp(-(1 - lam) t) on the metastable branch."""
    return math.sqrt(lam / (2.0 - lam))


def solve_metastable(table: PainleveTable, lam: float, config: SolverConfig | None = None,
                     ts=None) -> MagnetizationProfile:
    """Metastable branch (sigma -> -sigma0) for 0 < lam < 1.

    Seeded at t0 with sigma/sigma0 = -sigma_stable/sigma0 + a exp(-(1-lam) t0),
    i.e. the two-term large-t asymptotics with the leading -1 replaced by the
    form-factor value of the stable branch, and its exact t-derivative.
    """
    if not 0 < lam < 1:
        raise DomainError(f"metastable branch needs 0 < lambda < 1, got {lam}")
    config = config or table.config
    t0 = _seed_point(table, config)
    est = _stable_ff(t0, lam, config)
    a = metastable_amplitude(lam)
    decay = math.exp(-(1.0 - lam) * t0)
    ratio0 = -est.value + a * decay
    dratio0 = -est.derivative - (1.0 - lam) * a * decay
    s0 = sigma0(1.0)
    sf, dsf, _ = sigma_free_derivs(table, t0)
    u0 = ratio0 * s0 / sf
    du0 = (dratio0 * s0 - u0 * dsf) / sf
    meta = {"seed": "asymptotic+form_factor", "seed_order": config.seed_order,
            "amplitude": a}
    return _profile(table, lam, config, t0, u0, du0, ts, "metastable", meta)


def magnetization(profile: MagnetizationProfile, t):
    """(sigma/sigma0, sigma) at t from a solved profile, m = 1."""
    u, _ = profile.u_of_t(t)
    ratio = u * sigma_free(profile.table, t) / sigma0(1.0)
    return ratio, ratio * sigma0(1.0)


def magnetization_derivs(profile: MagnetizationProfile, t: float):
    """(sigma, sigma', sigma'') in absolute units from u and the free closed form."""
    u, du = profile.u_of_t(t)
    sf, dsf, d2sf = sigma_free_derivs(profile.table, t)
    phi, dphi, _ = eval_phi(profile.table, t)
    a = dphi - math.cosh(phi)
    lam = profile.lam
    d2u = (a + lam) * du - 0.5 * lam * (a + 1.0) * u
    return u * sf, du * sf + u * dsf, d2u * sf + 2.0 * du * dsf + u * d2sf


# --- high-temperature phase -------------------------------------------------

def sigma_fixed_highT(table: PainleveTable, t):
    """Fixed-b.c. magnetization above T_c: exp(-t/2) sigma_fixed(t)."""
    out = np.exp(-0.5 * np.asarray(t, dtype=float)) * sigma_fixed(table, t)
    return float(out) if np.ndim(t) == 0 else out


def sigma_free_highT(table: PainleveTable, t):
    """Free-b.c. magnetization above T_c, identically zero."""
    return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))


def highT_rate(bundle: CorrelatorBundle) -> float:
    """d ln sigma / dt from 2(G + G~) s' = (G' + G~' - G) s."""
    return (bundle.dG + bundle.dG_tilde - bundle.G) / (2.0 * (bundle.G + bundle.G_tilde))


def solve_fixed_highT(table: PainleveTable, config: SolverConfig | None = None,
                      ts=None) -> MagnetizationProfile:
    """Integrate the high-temperature first-order equation backwards.

    Seeded with the leading large-t behaviour sigma0 exp(-t0/2) only; the
    closed form exp(-t/2) sigma_fixed is not used.
    """
    config = config or table.config
    t0 = _seed_point(table, config)
    s0 = sigma0(1.0)

    def rhs(s, y):
        t = math.exp(s)
        return [t * highT_rate(pair_correlators(table, t))]

    sol = solve_ivp(rhs, (math.log(t0), math.log(table.t_min)), [math.log(s0) - 0.5 * t0],
                    method="DOP853", rtol=config.rel_tol, atol=config.abs_tol,
                    dense_output=True)
    if sol.status != 0:
        raise SolverError(f"high-T integration failed: {sol.message}", math.exp(sol.t[-1]))
    lo = table.t_min

    def u_of_t(t):
        t_arr = np.asarray(t, dtype=float)
        if np.any((t_arr < lo * (1 - 1e-12)) | (t_arr > t0 * (1 + 1e-12))):
            raise RangeError(f"t outside profile range [{lo}, {t0}]")
        sig = np.exp(sol.sol(np.log(np.clip(t_arr, lo, t0)))[0])
        u = sig / sigma_free(table, t_arr)
        return (float(u), math.nan) if np.ndim(t) == 0 else (u, np.full_like(u, np.nan))

    grid = _grid(table, t0, ts)
    sig = np.exp(sol.sol(np.log(grid))[0])
    u = sig / sigma_free(table, grid)
    meta = {"seed": "leading_asymptotic", "seed_order": 0, "t0": t0, "config": config}
    return MagnetizationProfile(lam=math.inf, ts=grid, u=u, sigma_ratio=sig / s0,
                                sigma_abs=sig, branch="highT_fixed", meta=meta,
                                table=table, u_of_t=u_of_t,
                                seed=(math.exp(math.log(s0) - 0.5 * t0), math.nan))


# --- massless limit and the second-order equation for sigma ------------------

def massless_reference(lam: float, t):
    """Critical-bulk profile 2^(1/4) lam^(1/2) t^(3/8) Psi(1/2, 1, lam t) at m = 1."""
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(~(t_arr > 0)):
        raise DomainError("t must be positive")
    out = np.array([2.0 ** 0.25 * math.sqrt(lam) * x ** 0.375 * tricomi_psi(0.5, 1.0, lam * x)
                    for x in t_arr])
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def full_ode_residual(bundle: CorrelatorBundle, sigma, lam: float) -> float:
    """Residual of the second-order equation for sigma written with G, G~.

    ``sigma`` is (sigma, sigma', sigma'') at ``bundle.t``.
    """
    s, ds, d2s = sigma
    G, Gt = bundle.G, bundle.G_tilde
    dsum = bundle.dG + bundle.dG_tilde
    d2sum = bundle.d2G + bundle.d2G_tilde
    return ((G + Gt) * d2s
            - (dsum - G + lam * (G + Gt)) * ds
            + 0.25 * (d2sum - dsum / bundle.t - 2.0 * bundle.dG - Gt
                      + 2.0 * lam * (dsum + Gt)) * s)
