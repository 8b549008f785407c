"""Fall-shape integrals f, g, their k-derivatives, h = g/f and phi = k h^2.

With u = sin^2(theta) the defining integrals over u in [0, 1] become

    f(k)  = 2 int_0^{pi/2} sin^2 / Delta          g(k)  = 2 int sin^4 / Delta
    f'(k) =   int_0^{pi/2} sin^4 / Delta^3        g'(k) =   int sin^6 / Delta^3

with Delta^2 = 1 - k sin^2 = (1-k) + k cos^2.  For k <= 1/2 the integrand is
tame on the whole range.  For larger k it peaks near theta = pi/2 with width
sqrt(1-k); there we split at pi/4 and, on the upper part, write
sin(phi) = sqrt((1-k)/k) sinh(s) with phi = pi/2 - theta.  That turns the peak
into a plateau of length ~ log(1/(1-k)), so the cost stays flat all the way
to k -> 1.

The shape parameter keeps log(1 - k) next to k so that shapes extremely
close to 1 (needed for very large mean fields) are not rounded to k = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .errors import DomainError
from .quadrature import DEFAULT, Quadrature, integrate

__all__ = [
    "ShapeParam", "Quadrature", "ShapeIntegrals", "shape_integrals",
    "f", "g", "f_prime", "g_prime", "h", "phi", "solve_phi", "k0",
]

# below this log(1-k) the leading logarithmic asymptotics are exact in double
# precision (corrections are O((1-k) log(1-k)))
_LOG_KC_ASYMPTOTIC = -700.0
_SPLIT_K = 0.5


@dataclass(frozen=True)
class ShapeParam:
    """Shape k = m q0^2 / 2 in [0, 1), stored together with log(1 - k)."""

    k: float
    log_kc: float

    def __post_init__(self):
        if not (0.0 <= self.k <= 1.0) or not (self.log_kc <= 0.0) or math.isnan(self.log_kc):
            raise DomainError(f"shape parameter outside [0, 1): k={self.k!r}")
        if self.log_kc == -math.inf:
            raise DomainError("shape parameter k = 1 is excluded")

    @classmethod
    def from_k(cls, k: float) -> "ShapeParam":
        k = float(k)
        if not (0.0 <= k < 1.0):
            raise DomainError(f"k must lie in [0, 1), got {k!r}")
        return cls(k, math.log1p(-k))

    @classmethod
    def from_logit(cls, y: float) -> "ShapeParam":
        """k = 1/(1 + exp(-y)); accurate complement for large y."""
        y = float(y)
        log_kc = -np.logaddexp(0.0, y)
        return cls(float(expit(y)), float(log_kc))

    @classmethod
    def from_complement(cls, kc: float) -> "ShapeParam":
        kc = float(kc)
        if not (0.0 < kc <= 1.0):
            raise DomainError(f"1 - k must lie in (0, 1], got {kc!r}")
        return cls(1.0 - kc, math.log(kc))

    @property
    def kc(self) -> float:
        """1 - k (underflows to 0 for log_kc below about -745)."""
        return math.exp(self.log_kc)

    @property
    def logit(self) -> float:
        return math.log(self.k) - self.log_kc if self.k > 0 else -math.inf


def as_shape(k) -> ShapeParam:
    if isinstance(k, ShapeParam):
        return k
    return ShapeParam.from_k(k)


class ShapeIntegrals(NamedTuple):
    f: float
    g: float
    f_prime: float
    g_prime: float
    errors: tuple  # absolute error estimates, same order as the values


def _direct(k, kc):
    def integrand(theta):
        s2 = np.sin(theta) ** 2
        c2 = np.cos(theta) ** 2
        d2 = kc + k * c2
        inv = 1.0 / np.sqrt(d2)
        inv3 = inv / d2
        s4 = s2 * s2
        return np.stack([2 * s2 * inv, 2 * s4 * inv, s4 * inv3, s4 * s2 * inv3])
    return integrand


def _plateau(k, log_kc):
    # sin(phi) = alpha sinh(s), alpha = sqrt(kc/k); Delta = sqrt(kc) cosh(s)
    log_alpha = 0.5 * (log_kc - math.log(k))
    rk = 1.0 / math.sqrt(k)
    inv_kc = math.exp(-log_kc)

    def integrand(s):
        x = np.exp(log_alpha) * np.sinh(s)
        cphi = np.sqrt((1.0 - x) * (1.0 + x))
        c3 = cphi ** 3
        sech2 = 1.0 / np.cosh(s) ** 2
        return np.stack([
            2 * rk * cphi,
            2 * rk * c3,
            rk * inv_kc * c3 * sech2,
            rk * inv_kc * c3 * cphi * cphi * sech2,
        ])
    upper = math.asinh(math.sqrt(0.5) * math.exp(-log_alpha))
    return integrand, upper


@lru_cache(maxsize=4096)
def _integrals(k: float, log_kc: float, quad: Quadrature) -> ShapeIntegrals:
    if log_kc < _LOG_KC_ASYMPTOTIC:
        big_l = math.log(4.0) - 0.5 * log_kc
        return ShapeIntegrals(2 * (big_l - 1), 2 * (big_l - 4.0 / 3.0), math.inf, math.inf,
                              (0.0, 0.0, math.inf, math.inf))
    kc = math.exp(log_kc)
    if k <= _SPLIT_K:
        val, err = integrate(_direct(k, kc), 0.0, 0.5 * math.pi, quad)
    else:
        v1, e1 = integrate(_direct(k, kc), 0.0, 0.25 * math.pi, quad)
        fn, upper = _plateau(k, log_kc)
        v2, e2 = integrate(fn, 0.0, upper, quad)
        val, err = v1 + v2, e1 + e2
    return ShapeIntegrals(float(val[0]), float(val[1]), float(val[2]), float(val[3]),
                          tuple(float(e) for e in err))


def shape_integrals(k, quad: Quadrature = DEFAULT) -> ShapeIntegrals:
    """f, g, f', g' at one shape, from a single adaptive pass."""
    sp = as_shape(k)
    return _integrals(sp.k, sp.log_kc, quad)


def f(k, quad: Quadrature = DEFAULT) -> float:
    """int_0^1 sqrt(u) / sqrt((1-u)(1-ku)) du."""
    return shape_integrals(k, quad).f


def g(k, quad: Quadrature = DEFAULT) -> float:
    """int_0^1 u^(3/2) / sqrt((1-u)(1-ku)) du."""
    return shape_integrals(k, quad).g


def f_prime(k, quad: Quadrature = DEFAULT) -> float:
    return shape_integrals(k, quad).f_prime


def g_prime(k, quad: Quadrature = DEFAULT) -> float:
    return shape_integrals(k, quad).g_prime


def h(k, quad: Quadrature = DEFAULT) -> float:
    """g/f; this is the ratio mean height / initial height of a fall."""
    si = shape_integrals(k, quad)
    return si.g / si.f


def phi(k, quad: Quadrature = DEFAULT) -> float:
    sp = as_shape(k)
    return sp.k * h(sp, quad) ** 2


def solve_phi(target: float, quad: Quadrature = DEFAULT) -> ShapeParam:
    """The unique k with phi(k) = target, for target in (0, 1).

    phi is increasing with phi(0) = 0 and phi -> 1 as k -> 1; we search in the
    logit variable so that targets close to 1 stay resolvable.
    """
    target = float(target)
    if not (0.0 < target < 1.0):
        raise DomainError(f"phi target must lie in (0, 1), got {target!r}")

    def resid(y):
        sp = ShapeParam.from_logit(y)
        return sp.k * h(sp, quad) ** 2 - target

    lo, hi = -2.0, 2.0
    while resid(lo) > 0:
        lo *= 2.0
    while resid(hi) < 0:
        hi *= 2.0
    y = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=400)
    return ShapeParam.from_logit(y)


@lru_cache(maxsize=8)
def _k0(quad: Quadrature) -> ShapeParam:
    return solve_phi(0.5, quad)


def k0(quad: Quadrature = DEFAULT) -> ShapeParam:
    """Shape with phi(k0) = 1/2 (limit of kappa(r) as r -> 0)."""
    return _k0(quad)
