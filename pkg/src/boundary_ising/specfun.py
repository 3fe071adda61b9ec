"""Special functions and physical constants.

Only what the magnetization code needs.  The Bessel functions K_0 and K_1
are implemented here for real positive arguments; the Tricomi function
Psi(a, c, x) comes from its Laplace integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import DomainError, QuadratureError

EULER_GAMMA = 0.57721566490153286061
GLAISHER = 1.2824271291006226369  # Glaisher-Kinkelin constant A

# K_n(x) = exp(-x) * scaled; exp(-x) underflows to subnormals beyond this.
BESSEL_X_MAX = 700.0
_SERIES_SWITCH = 2.0


@dataclass(frozen=True)
class PhysicalInputs:
    m: float
    h: float
    y: float

    def __post_init__(self):
        if self.m == 0:
            raise DomainError("mass parameter m must be non-zero")
        if not self.y > 0:
            raise DomainError(f"distance y must be positive, got {self.y}")


@dataclass(frozen=True)
class DimensionlessPoint:
    t: float
    lam: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"t must be positive, got {self.t}")
        if not self.lam >= 0:
            raise DomainError(f"lambda must be non-negative, got {self.lam}")


def to_dimensionless(inputs: PhysicalInputs) -> DimensionlessPoint:
    """Map (m, h, y) to (t, lambda) = (2 m y, 4 pi h^2 / m)."""
    if not inputs.m > 0:
        raise DomainError(f"low-temperature mapping needs m > 0, got {inputs.m}")
    return DimensionlessPoint(t=2.0 * inputs.m * inputs.y,
                              lam=4.0 * math.pi * inputs.h ** 2 / inputs.m)


def sigma0(m: float = 1.0) -> float:
    """Bulk spontaneous magnetization 2^(1/12) e^(-1/8) A^(3/2) m^(1/8)."""
    if not m > 0:
        raise DomainError(f"sigma0 needs m > 0, got {m}")
    return 2.0 ** (1.0 / 12.0) * math.exp(-0.125) * GLAISHER ** 1.5 * m ** 0.125


def _bessel_k_series(x):
    # Power series about 0, written with harmonic numbers H_k:
    #   K0 = -(ln(x/2)+g) I0 + sum y^k/(k!)^2 H_k
    #   K1 = 1/x + ln(x/2) I1 - (x/4) sum y^k/(k!(k+1)!) (H_k + H_{k+1} - 2g)
    y = 0.25 * x * x
    log_half = math.log(0.5 * x)
    term = 1.0
    harm = 0.0
    i0 = s0 = i1 = s1 = 0.0
    k = 0
    while True:
        harm_next = harm + 1.0 / (k + 1)
        i0 += term
        s0 += term * harm
        i1 += term / (k + 1)
        s1 += term / (k + 1) * (harm + harm_next - 2.0 * EULER_GAMMA)
        if term < 1e-17 * i0 and k > 1:
            break
        k += 1
        term *= y / (k * k)
        harm = harm_next
    k0 = -(log_half + EULER_GAMMA) * i0 + s0
    k1 = 1.0 / x + log_half * (0.5 * x) * i1 - 0.25 * x * s1
    return k0, k1


def _bessel_k_scaled_cf(x):
    """exp(x) K0(x), exp(x) K1(x) by Steed's continued fraction (x >= 2)."""
    a1 = 0.25
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    else:  # pragma: no cover - converges in < 200 terms for x >= 2
        raise DomainError(f"Bessel K continued fraction did not converge at x={x}")
    k0 = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - a1 * h) / x
    return k0, k1


def bessel_k_scaled(order: int, x: float) -> float:
    """exp(x) * K_order(x) for order in {0, 1}; valid for every x > 0."""
    if order not in (0, 1):
        raise DomainError(f"only orders 0 and 1 are supported, got {order}")
    if not x > 0:
        raise DomainError(f"Bessel K needs x > 0, got {x}")
    x = float(x)
    if x < _SERIES_SWITCH:
        vals = _bessel_k_series(x)
        return vals[order] * math.exp(x)
    return _bessel_k_scaled_cf(x)[order]


def bessel_k(order: int, x: float) -> float:
    """Modified Bessel function of the second kind, K_0 or K_1.

    Raises DomainError for x <= 0 and for x > BESSEL_X_MAX, where the
    result leaves the normal floating-point range; use
    :func:`bessel_k_scaled` there.
    """
    if order not in (0, 1):
        raise DomainError(f"only orders 0 and 1 are supported, got {order}")
    if not x > 0:
        raise DomainError(f"Bessel K needs x > 0, got {x}")
    if x > BESSEL_X_MAX:
        raise DomainError(f"K_{order}({x}) underflows; use bessel_k_scaled")
    x = float(x)
    if x < _SERIES_SWITCH:
        return _bessel_k_series(x)[order]
    return _bessel_k_scaled_cf(x)[order] * math.exp(-x)


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise DomainError(f"gamma_fn is defined here for x > 0 only, got {x}")
    return math.gamma(x)


def tricomi_psi(a: float, c: float, x: float) -> float:
    """Tricomi function Psi(a, c, x) from its Laplace integral.

    With t = s / (1 - s) the integral becomes
    ``int_0^1 s^(a-1) (1-s)^(-c) exp(-x s / (1-s)) ds / Gamma(a)``;
    the s^(a-1) endpoint factor is handled by QUADPACK's algebraic weight.
    """
    if not a > 0:
        raise DomainError(f"tricomi_psi needs a > 0, got {a}")
    if not x > 0:
        raise DomainError(f"tricomi_psi needs x > 0, got {x}")

    def integrand(s):
        if s >= 1.0:
            return 0.0
        return (1.0 - s) ** (-c) * math.exp(-x * s / (1.0 - s))

    # the integrand lives on s <~ 1/x; split there so QUADPACK sees the scale
    split = min(0.5, 1.0 / (1.0 + x))
    total = 0.0
    err = 0.0
    for lo, hi in ((0.0, split), (split, 1.0)):
        if lo == 0.0:
            val, e = integrate.quad(integrand, lo, hi, weight="alg", wvar=(a - 1.0, 0.0),
                                    epsabs=0.0, epsrel=1e-13, limit=200)
        else:
            val, e = integrate.quad(lambda s: s ** (a - 1.0) * integrand(s), lo, hi,
                                    epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
        err += e
    if not err <= 1e-11 * abs(total):
        raise QuadratureError("Tricomi integral did not converge", total, err)
    return total / gamma_fn(a)
