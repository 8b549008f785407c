"""Coupling the two electrons: mean field, height-ratio shape kappa(r), Psi(r), orbits.

Height ratio convention: r = q1(0)/q2(0).  With k2 = k and k1 = r^2 k the
matching condition m = 1/(qbar1 + qbar2)^2 reads K(r, k) = 0 and the
half-period ratio is Psi(r) = sigma1/sigma2 = r^{3/2} f(r^2 k)/f(k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import ellipk, ellipkinc

from . import freefall, specfun
from .errors import DomainError
from .freefall import FreeFallArc
from .quadrature import DEFAULT, Quadrature
from .specfun import ShapeParam

_EPS = np.finfo(float).eps
GRID_BASE = 2048
GRID_CAP = 2 ** 20


@dataclass(frozen=True)
class RatioSolution:
    r: float
    kappa: ShapeParam
    psi: float


@dataclass(frozen=True)
class OrbitPair:
    """Period-1 solution pair sampled at t_j = j/N, j = 0..N-1."""

    n1: int
    n2: int
    sigma1: float
    sigma2: float
    m: float
    arcs: Tuple[FreeFallArc, FreeFallArc]
    N: int
    q1: np.ndarray = field(repr=False)
    q2: np.ndarray = field(repr=False)
    qdot1: np.ndarray = field(repr=False)
    qdot2: np.ndarray = field(repr=False)
    qbar1: float
    qbar2: float
    # regularized time tau_q(t_j) of every sample (see levicivita)
    tau1: np.ndarray = field(repr=False)
    tau2: np.ndarray = field(repr=False)
    note: Optional[str] = None

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    @property
    def coupling(self) -> float:
        """1/(qbar1 + qbar2)^2, the mean field seen by both electrons."""
        return 1.0 / (self.qbar1 + self.qbar2) ** 2

    def component(self, i: int):
        if i == 1:
            return self.q1, self.qdot1, self.arcs[0], self.n1, self.tau1
        if i == 2:
            return self.q2, self.qdot2, self.arcs[1], self.n2, self.tau2
        raise ValueError("component index must be 1 or 2")


def solve_mean_field(sigma1: float, sigma2: float, quad: Quadrature = DEFAULT) -> float:
    """Unique m with f_sigma1(m) + f_sigma2(m) = 1."""
    if not (sigma1 > 0 and sigma2 > 0):
        raise DomainError("half-periods must be positive")

    def resid(log_m):
        m = math.exp(log_m)
        return freefall.f_sigma(m, sigma1, quad) + freefall.f_sigma(m, sigma2, quad) - 1.0

    lo, hi = math.log(1e-8), 0.0
    while resid(lo) > 0:
        lo -= math.log(10.0)
    while resid(hi) < 0:
        hi += math.log(10.0)
    log_m = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * _EPS, maxiter=500)
    return math.exp(log_m)


def big_K(r: float, k, quad: Quadrature = DEFAULT) -> float:
    """k - 1/(2 (r h(r^2 k) + h(k))^2)."""
    sp = specfun.as_shape(k)
    if r <= 0:
        raise DomainError("r must be positive")
    rk = r * r * sp.k
    if rk >= 1.0:
        raise DomainError(f"r^2 k = {rk!r} >= 1")
    s = r * specfun.h(rk, quad) + specfun.h(sp, quad)
    return sp.k - 0.5 / (s * s)


def kappa(r: float, quad: Quadrature = DEFAULT) -> ShapeParam:
    """Root of K(r, .) on [0, min(1, 1/r^2)).

    kappa decreases from k0 (r -> 0) and r^2 kappa(r) = kappa(1/r) < k0, so
    [0, min(k0, k0/r^2)] always brackets the root.
    """
    r = float(r)
    if not r > 0:
        raise DomainError("r must be positive")
    k0 = specfun.k0(quad).k
    hi = min(k0, k0 / (r * r))
    if big_K(r, hi, quad) < 0:  # should not happen; widen to the full domain
        hi = min(1.0, 1.0 / (r * r)) * (1.0 - 1e-12)
    k = brentq(lambda x: big_K(r, x, quad), 0.0, hi,
               xtol=1e-17 * hi, rtol=4 * _EPS, maxiter=500)
    return ShapeParam.from_k(k)


def psi(r: float, quad: Quadrature = DEFAULT) -> float:
    """Half-period ratio sigma1/sigma2 realised by the height ratio r."""
    kap = kappa(r, quad)
    return r ** 1.5 * specfun.f(r * r * kap.k, quad) / specfun.f(kap, quad)


def ratio_solution(r: float, quad: Quadrature = DEFAULT) -> RatioSolution:
    kap = kappa(r, quad)
    val = r ** 1.5 * specfun.f(r * r * kap.k, quad) / specfun.f(kap, quad)
    return RatioSolution(float(r), kap, val)


def psi_inverse(rho: float, quad: Quadrature = DEFAULT) -> float:
    """r with Psi(r) = rho (Psi is an increasing bijection of the positive reals)."""
    rho = float(rho)
    if not rho > 0:
        raise DomainError("rho must be positive")
    if rho == 1.0:
        return 1.0
    target = math.log(rho)

    def resid(x):
        return math.log(psi(math.exp(x), quad)) - target

    lo, hi = -0.5, 0.5
    while resid(lo) > 0:
        lo *= 2.0
    while resid(hi) < 0:
        hi *= 2.0
    x = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * _EPS, maxiter=500)
    return math.exp(x)


def orbit_scales_from_ratio(sigma1: float, sigma2: float, quad: Quadrature = DEFAULT):
    """Second construction path: (m, q10, q20, qbar1, qbar2) via psi_inverse and kappa."""
    r = psi_inverse(sigma1 / sigma2, quad)
    k2 = kappa(r, quad)
    k1 = specfun.as_shape(r * r * k2.k)
    q20 = (2.0 * sigma2 / specfun.f(k2, quad)) ** (2.0 / 3.0)
    q10 = r * q20
    qbar1 = q10 * specfun.h(k1, quad)
    qbar2 = q20 * specfun.h(k2, quad)
    return 1.0 / (qbar1 + qbar2) ** 2, q10, q20, qbar1, qbar2


def default_grid(n1: int, n2: int) -> int:
    n = GRID_BASE * n1 * n2
    return min(n, GRID_CAP)


def _check_positive_int(name, v):
    if isinstance(v, bool) or int(v) != v or v < 1:
        raise DomainError(f"{name} must be a positive integer, got {v!r}")
    return int(v)


def _periodic_samples(arc: FreeFallArc, n: int, N: int, quad):
    """q, qdot at t_j = j/N for the fall reflected about sigma and repeated with period 1/n."""
    period = N // n
    half = period // 2
    r = np.arange(half + 1)
    psi_r = freefall.angles_at_times(arc, r / N, quad)
    q_fall, v_fall = freefall.state_from_angles(arc, psi_r)
    q_fall[half] = 0.0
    idx = np.arange(N) % period
    rising = idx > half
    src = np.where(rising, period - idx, idx)
    q = q_fall[src]
    v = np.where(rising, -v_fall[src], v_fall[src])
    # regularized time: dt/q = dtau/||z||^2 turns the fall into a quarter
    # period of sn, tau = (1 - F(psi|k)/K(k)) / (2n) measured from the top
    kk = arc.k.k
    frac = ellipkinc(psi_r, kk) / ellipk(kk)
    frac[half] = 0.0
    frac[0] = 1.0
    j = np.arange(N)
    base = (j // period) / n
    tau = base + np.where(rising, 1.0 + frac[src], 1.0 - frac[src]) / (2 * n)
    return q, v, tau


def build_orbit(n1: int, n2: int, grid_n: Optional[int] = None,
                quad: Quadrature = DEFAULT) -> OrbitPair:
    """Orbit with n1 collisions of electron 1 and n2 of electron 2 per unit time."""
    n1 = _check_positive_int("n1", n1)
    n2 = _check_positive_int("n2", n2)
    note = None
    d = math.gcd(n1, n2)
    if d != 1:
        note = f"reduced ({n1},{n2}) by common factor {d} to ({n1 // d},{n2 // d})"
        n1, n2 = n1 // d, n2 // d
    N = default_grid(n1, n2) if grid_n is None else _check_positive_int("grid_n", grid_n)
    step = math.lcm(2 * n1, 2 * n2)
    if N % step:
        raise DomainError(f"grid size {N} must be a multiple of {step} so collisions fall on grid points")

    s1, s2 = 0.5 / n1, 0.5 / n2
    m = solve_mean_field(s1, s2, quad)
    a1 = freefall.solve_q0(m, s1, quad)
    a2 = freefall.solve_q0(m, s2, quad)
    q1, v1, tau1 = _periodic_samples(a1, n1, N, quad)
    q2, v2, tau2 = _periodic_samples(a2, n2, N, quad)
    return OrbitPair(
        n1=n1, n2=n2, sigma1=s1, sigma2=s2, m=m, arcs=(a1, a2), N=N,
        q1=q1, q2=q2, qdot1=v1, qdot2=v2,
        qbar1=freefall.mean_value(a1, quad), qbar2=freefall.mean_value(a2, quad),
        tau1=tau1, tau2=tau2, note=note,
    )
