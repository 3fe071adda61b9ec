"""The Painleve III transcendent behind the boundary Ising correlators.

phi(r) solves the radial sinh-Gordon equation

    phi'' + phi'/r = sinh(2 phi) / 2

and is singled out by phi ~ (2/pi) K0(r) at large r.  Going inward the
deviations from this separatrix decay, so the solution is integrated from
``r_max`` down to ``t_min`` in the variable s = ln r, where the system

    d phi / ds = psi,   d psi / ds = r^2 sinh(2 phi) / 2,   psi = r phi'

stays smooth through the logarithmic region near r = 0.  The knot values
are joined by a quintic Hermite interpolant in s (phi, psi, dpsi/ds are
all known exactly at the knots).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import BPoly

from .errors import DomainError, RangeError, SolverError
from .specfun import EULER_GAMMA, bessel_k

TWO_OVER_PI = 2.0 / math.pi
_RANGE_SLACK = 1e-12
RESIDUAL_FLOOR = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Numerical policy shared by every solver in the package.

    ``abs_tol`` is the absolute floor of the ODE error test.  The inward phi
    solve starts from phi(r_max) ~ 1e-7 and must stay on the separatrix, so
    there the floor is scaled by the size of the initial data.
    """

    r_max: float = 14.0
    t_min: float = 1e-3
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    log_step: float = 0.01      # knot spacing in ln r below r = 1
    lin_step: float = 0.01      # knot spacing in r above r = 1
    t0: float | None = None     # seed point for the u equation; None -> r_max
    segment_nodes: int = 10     # Gauss-Legendre nodes per knot interval
    ff_nodes: int = 64          # nodes per dimension in form-factor integrals
    seed_order: int = 2         # form-factor truncation used to seed u(t0)

    def __post_init__(self):
        if not self.r_max >= 8:
            raise DomainError(f"r_max must be >= 8, got {self.r_max}")
        if not 0 < self.t_min < 1 < self.r_max:
            raise DomainError("need 0 < t_min < 1 < r_max")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("tolerances must be positive")
        if not (0 < self.log_step <= 0.1 and 0 < self.lin_step <= 0.1):
            raise DomainError("knot steps must lie in (0, 0.1]")
        if self.t0 is not None and not 1 < self.t0:
            raise DomainError(f"t0 must exceed 1, got {self.t0}")
        if self.segment_nodes < 2 or self.ff_nodes < 2:
            raise DomainError("quadrature orders must be >= 2")

    @property
    def seed_point(self) -> float:
        return self.r_max if self.t0 is None else min(self.r_max, self.t0)


@dataclass(frozen=True, eq=False)
class PainleveTable:
    knots: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    interpolant: BPoly = field(repr=False)
    config: SolverConfig
    # lazily filled by the correlators module; never part of identity
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def t_min(self) -> float:
        return float(self.knots[0])

    @property
    def r_max(self) -> float:
        return float(self.knots[-1])


def _knot_grid(config: SolverConfig) -> np.ndarray:
    n_log = max(2, int(math.ceil(-math.log(config.t_min) / config.log_step)) + 1)
    inner = np.exp(np.linspace(math.log(config.t_min), 0.0, n_log))
    n_lin = max(2, int(math.ceil((config.r_max - 1.0) / config.lin_step)) + 1)
    outer = np.linspace(1.0, config.r_max, n_lin)
    knots = np.concatenate([inner[:-1], outer])
    knots[0] = config.t_min
    knots[-1] = config.r_max
    return knots


def _rhs(s, y):
    r = math.exp(s)
    return [y[1], 0.5 * r * r * math.sinh(2.0 * y[0])]


def solve_phi(config: SolverConfig | None = None) -> PainleveTable:
    """Integrate the radial sinh-Gordon equation inward from ``r_max``."""
    config = config or SolverConfig()
    knots = _knot_grid(config)
    s_knots = np.log(knots)
    r_max = config.r_max
    y0 = [TWO_OVER_PI * bessel_k(0, r_max), -TWO_OVER_PI * bessel_k(1, r_max) * r_max]

    # |phi| and |psi| only grow inward, so this floor keeps the test relative
    atol = config.abs_tol * np.abs(y0)
    sol = solve_ivp(_rhs, (s_knots[-1], s_knots[0]), y0, method="DOP853",
                    t_eval=s_knots[::-1], rtol=config.rel_tol, atol=atol)
    if sol.status != 0 or sol.y.shape[1] != knots.size:
        where = math.exp(sol.t[-1]) if sol.t.size else r_max
        raise SolverError(f"phi integration failed: {sol.message}", where)

    phi = sol.y[0, ::-1].copy()
    psi = sol.y[1, ::-1].copy()
    phi[-1], psi[-1] = y0  # t_eval output at the start point is the initial value
    dpsi = 0.5 * knots ** 2 * np.sinh(2.0 * phi)
    interp = BPoly.from_derivatives(s_knots, np.column_stack([phi, psi, dpsi]))

    table = PainleveTable(knots=knots, values=phi, derivs=psi / knots,
                          interpolant=interp, config=config)
    _check_table(table)
    return table


def _check_table(table: PainleveTable):
    bad = np.flatnonzero(~((table.values > 0) & (table.derivs < 0)))
    if bad.size:
        raise SolverError("phi > 0, phi' < 0 violated", float(table.knots[bad[0]]))

    # ODE residual of the interpolant itself at knot midpoints, s-form
    s = np.log(table.knots)
    mid = 0.5 * (s[1:] + s[:-1])
    r = np.exp(mid)
    p = table.interpolant(mid)
    p1 = table.interpolant(mid, 1)
    p2 = table.interpolant(mid, 2)
    source = 0.5 * r * r * np.sinh(2.0 * p)
    # p2 = r^2 phi'' + r phi', so the largest term is bounded by these three
    scale = np.maximum.reduce([np.abs(p2 - p1), np.abs(p1), np.abs(source)])
    resid = np.abs(p2 - source) / scale
    worst = int(np.argmax(resid))
    # global error grows ~ (number of steps) * rel_tol, and the interpolant's
    # second derivative carries ~eps |phi| / h^2 of roundoff on top (~1e-10)
    if resid[worst] > max(1000.0 * table.config.rel_tol, RESIDUAL_FLOOR):
        raise SolverError(f"interpolant ODE residual {resid[worst]:.3g} too large",
                          float(r[worst]))


def small_r_reference(r):
    """Short-distance form -ln(-r Omega / 2), Omega = ln(e^gamma r / 8)."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(~((r_arr > 0) & (r_arr < 0.1))):
        raise DomainError("small_r_reference is only valid for 0 < r < 0.1")
    omega = np.log(math.exp(EULER_GAMMA) * r_arr / 8.0)
    out = -np.log(-0.5 * r_arr * omega)
    return float(out) if np.ndim(r) == 0 else out


def _check_range(table: PainleveTable, r: np.ndarray) -> np.ndarray:
    lo, hi = table.t_min, table.r_max
    if np.any(~((r >= lo * (1 - _RANGE_SLACK)) & (r <= hi * (1 + _RANGE_SLACK)))):
        raise RangeError(f"r outside tabulated range [{lo}, {hi}]")
    return np.clip(r, lo, hi)


def eval_phi(table: PainleveTable, r):
    """Return phi, phi', phi'' at r (scalar or array).

    phi'' is taken from the differential equation, not from the interpolant.
    """
    r_arr = _check_range(table, np.asarray(r, dtype=float))
    s = np.log(r_arr)
    phi = np.asarray(table.interpolant(s), dtype=float)
    dphi = np.asarray(table.interpolant(s, 1), dtype=float) / r_arr

    idx = np.clip(np.searchsorted(table.knots, r_arr), 0, table.knots.size - 1)
    hit = table.knots[idx] == r_arr
    if np.any(hit):
        phi = np.where(hit, table.values[idx], phi)
        dphi = np.where(hit, table.derivs[idx], dphi)

    d2phi = 0.5 * np.sinh(2.0 * phi) - dphi / r_arr
    if np.ndim(r) == 0:
        return float(phi), float(dphi), float(d2phi)
    return phi, dphi, d2phi


def eta(table: PainleveTable, x):
    """Painleve III function eta(x) = exp(-phi(2x))."""
    phi, _, _ = eval_phi(table, 2.0 * np.asarray(x, dtype=float))
    out = np.exp(-phi)
    return float(out) if np.ndim(x) == 0 else out
