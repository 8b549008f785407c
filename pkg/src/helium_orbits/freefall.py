"""Single free-fall arc: q'' = -2/q^2 + m from rest at q0, hitting q = 0 at t = sigma.

Everything is expressed through the angle psi with q = q0 sin^2(psi)
(psi = pi/2 at the top, psi = 0 at the collision).  Along the arc

    sigma - t = q0^{3/2} P(psi),   P(psi) = int_0^psi sin^2 / Delta,
    Delta = sqrt(1 - k sin^2),     qdot = -2 cos(psi) Delta / (sqrt(q0) sin(psi)),

so no time stepping through the collision is ever needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import specfun
from .errors import DomainError
from .quadrature import DEFAULT, Quadrature, integrate_batch
from .specfun import ShapeParam

Q_FLOOR_REL = 1e-8


@dataclass(frozen=True)
class FreeFallArc:
    m: float
    sigma: float
    q0: float
    k: ShapeParam
    energy: float
    # optional tabulation; qdot is NaN where q <= Q_FLOOR_REL * q0
    t: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    q: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    qdot: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def q_floor(self) -> float:
        return Q_FLOOR_REL * self.q0

    @property
    def qbar(self) -> float:
        return mean_value(self)


def _energy(m, q0):
    return -2.0 / q0 - m * q0


def time_of_flight(m: float, q0: float, quad: Quadrature = DEFAULT) -> float:
    """sigma = q0^{3/2} f(k) / 2 with k = m q0^2 / 2."""
    if m < 0 or q0 <= 0:
        raise DomainError("need m >= 0 and q0 > 0")
    k = 0.5 * m * q0 * q0
    if k >= 1.0:
        raise DomainError(f"k = m q0^2/2 = {k!r} >= 1: the fall never reaches the nucleus")
    return 0.5 * q0 ** 1.5 * specfun.f(k, quad)


def _log_sigma(y, m, quad):
    sp = ShapeParam.from_logit(y)
    log_k = math.log(sp.k) if sp.k > 0 else y  # k ~ e^y for very negative y
    log_q0 = 0.5 * (math.log(2.0) + log_k - math.log(m))
    return 1.5 * log_q0 - math.log(2.0) + math.log(specfun.f(sp, quad))


def solve_q0(m: float, sigma: float, quad: Quadrature = DEFAULT) -> FreeFallArc:
    """Arc header (m, sigma, q0, k, E) for the fall of duration sigma.

    The unknown is the logit of k, on which sigma is increasing; this keeps
    shapes extremely close to 1 (huge m) resolvable.
    """
    if not (m >= 0) or not (sigma > 0):
        raise DomainError("need m >= 0 and sigma > 0")
    m = float(m)
    sigma = float(sigma)
    if m == 0.0:
        q0 = (4.0 * sigma / math.pi) ** (2.0 / 3.0)
        return FreeFallArc(0.0, sigma, q0, ShapeParam(0.0, 0.0), _energy(0.0, q0))

    target = math.log(sigma)

    def resid(y):
        return _log_sigma(y, m, quad) - target

    lo, hi = -4.0, 4.0
    while resid(lo) > 0:
        lo = 2.0 * lo - 4.0
    while resid(hi) < 0:
        hi = 2.0 * hi + 4.0
    y = brentq(resid, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    sp = ShapeParam.from_logit(y)
    q0 = math.sqrt(2.0 * sp.k / m)
    return FreeFallArc(m, sigma, q0, sp, _energy(m, q0))


def f_sigma(m: float, sigma: float, quad: Quadrature = DEFAULT) -> float:
    """sqrt(m) * qbar of the sigma-fall; equals sqrt(2k) h(k), increasing in m, below sqrt(2)."""
    if m < 0 or sigma <= 0:
        raise DomainError("need m >= 0 and sigma > 0")
    if m == 0:
        return 0.0
    arc = solve_q0(m, sigma, quad)
    return math.sqrt(2.0 * arc.k.k) * specfun.h(arc.k, quad)


def mean_value(arc: FreeFallArc, quad: Quadrature = DEFAULT) -> float:
    return arc.q0 * specfun.h(arc.k, quad)


# --- angle <-> time ---------------------------------------------------------

def _partial_time(k: ShapeParam, psi: np.ndarray, quad: Quadrature) -> np.ndarray:
    """P(psi) = int_0^psi sin^2/Delta for an array of angles in [0, pi/2]."""
    psi = np.asarray(psi, dtype=float)
    kk, kc = k.k, k.kc
    out = np.empty_like(psi)

    def direct(x):
        s2 = np.sin(x) ** 2
        return s2 / np.sqrt(kc + kk * np.cos(x) ** 2)

    if kk <= 0.5:
        low = np.ones(psi.shape, dtype=bool)
    else:
        low = psi <= 0.25 * math.pi
    if low.any():
        val, _ = integrate_batch(direct, np.zeros(low.sum()), psi[low], quad)
        out[low] = val[0]
    if (~low).any():
        # remaining piece up to pi/2 in the plateau variable (see specfun)
        log_alpha = 0.5 * (k.log_kc - math.log(kk))
        alpha = math.exp(log_alpha)
        rk = 1.0 / math.sqrt(kk)

        def plateau(s):
            x = alpha * np.sinh(s)
            return rk * np.sqrt((1.0 - x) * (1.0 + x))

        upper = np.arcsinh(np.cos(psi[~low]) / alpha)
        val, _ = integrate_batch(plateau, np.zeros(upper.size), upper, quad)
        out[~low] = 0.5 * specfun.f(k, quad) - val[0]
    return out


def _velocity(arc: FreeFallArc, psi: np.ndarray) -> np.ndarray:
    s = np.sin(psi)
    c = np.cos(psi)
    delta = np.sqrt(arc.k.kc + arc.k.k * c * c)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -2.0 * c * delta / (math.sqrt(arc.q0) * s)
    return v


def angles_at_times(arc: FreeFallArc, t, quad: Quadrature = DEFAULT) -> np.ndarray:
    """Angle psi(t) for times in [0, sigma], by safeguarded Newton on P^{1/3}."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > arc.sigma * (1 + 1e-14)):
        raise DomainError("times must lie in [0, sigma]")
    scale = arc.q0 ** 1.5
    half_f = 0.5 * specfun.f(arc.k, quad)
    rem = np.clip((arc.sigma - t) / scale, 0.0, half_f)
    target = np.cbrt(rem)

    # coarse table for the starting guess
    table = np.linspace(0.0, 0.5 * math.pi, 257)
    ptab = np.cbrt(_partial_time(arc.k, table, quad))
    ptab[-1] = np.cbrt(half_f)
    psi = np.interp(target, ptab, table)
    lo = table[np.clip(np.searchsorted(ptab, target) - 1, 0, 256)]
    hi = table[np.clip(np.searchsorted(ptab, target), 0, 256)]

    interior = (rem > 0) & (rem < half_f)
    for _ in range(60):
        idx = np.nonzero(interior)[0]
        if idx.size == 0:
            break
        p = _partial_time(arc.k, psi[idx], quad)
        gval = np.cbrt(p)
        s2 = np.sin(psi[idx]) ** 2
        dp = s2 / np.sqrt(arc.k.kc + arc.k.k * np.cos(psi[idx]) ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            dg = dp / (3.0 * gval * gval)
        r = gval - target[idx]
        lo[idx] = np.where(r < 0, psi[idx], lo[idx])
        hi[idx] = np.where(r > 0, psi[idx], hi[idx])
        step = np.where(np.isfinite(dg) & (dg > 0), r / dg, np.inf)
        new = psi[idx] - step
        bad = ~((new >= lo[idx]) & (new <= hi[idx]))
        new = np.where(bad, 0.5 * (lo[idx] + hi[idx]), new)
        new = np.where(r == 0, psi[idx], new)  # already exact; keep it
        change = np.abs(new - psi[idx])
        psi[idx] = new
        interior[idx[(change <= 1e-15 * psi[idx]) | (r == 0)]] = False
    psi[rem <= 0] = 0.0
    psi[rem >= half_f] = 0.5 * math.pi
    return psi


def state_from_angles(arc: FreeFallArc, psi: np.ndarray):
    """(q, qdot) along the fall; qdot is exactly 0 at the top, NaN below the floor."""
    psi = np.asarray(psi, dtype=float)
    q = arc.q0 * np.sin(psi) ** 2
    q[psi == 0.5 * math.pi] = arc.q0
    q[psi == 0.0] = 0.0
    v = _velocity(arc, psi)
    v[psi == 0.5 * math.pi] = 0.0
    v[q <= arc.q_floor] = np.nan
    return q, v


def times_from_angles(arc: FreeFallArc, psi, quad: Quadrature = DEFAULT) -> np.ndarray:
    psi = np.asarray(psi, dtype=float)
    t = arc.sigma - arc.q0 ** 1.5 * _partial_time(arc.k, psi, quad)
    t[psi == 0.5 * math.pi] = 0.0
    t[psi == 0.0] = arc.sigma
    return t


def sample_arc(m: float, sigma: float, n_samples: int, grid: str = "theta",
               quad: Quadrature = DEFAULT) -> FreeFallArc:
    """Tabulate the arc; ``grid`` is "theta" (uniform in psi) or "t" (uniform in time)."""
    if int(n_samples) != n_samples or n_samples < 2:
        raise ValueError("n_samples must be an integer >= 2")
    n_samples = int(n_samples)
    arc = solve_q0(m, sigma, quad)
    if grid == "theta":
        psi = np.linspace(0.5 * math.pi, 0.0, n_samples)
        psi[-1] = 0.0
        t = times_from_angles(arc, psi, quad)
    elif grid == "t":
        t = np.linspace(0.0, sigma, n_samples)
        t[-1] = sigma
        psi = angles_at_times(arc, t, quad)
    else:
        raise ValueError(f"unknown grid {grid!r}")
    q, v = state_from_angles(arc, psi)
    return FreeFallArc(arc.m, arc.sigma, arc.q0, arc.k, arc.energy, t=t, q=q, qdot=v)


# --- singular integrals over one fall -----------------------------------------

def _arc_integrands(k: ShapeParam):
    kk, kc = k.k, k.kc

    def direct(x):
        c = np.cos(x)
        d = np.sqrt(kc + kk * c * c)
        return np.stack([1.0 / d, c * c * d])
    return direct


def arc_integrals(arc: FreeFallArc, quad: Quadrature = DEFAULT):
    """(int dt/q, int qdot^2 dt) over one fall from q0 to the collision.

    In the angle variable both are regular: dt/q = sqrt(q0) dpsi/Delta and
    qdot^2 dt = 4 sqrt(q0) cos^2(psi) Delta dpsi.
    """
    k = arc.k
    kk = k.k
    direct = _arc_integrands(k)
    if kk <= 0.5:
        val, _ = integrate_batch(direct, [0.0], [0.5 * math.pi], quad)
        i1, i2 = val[0, 0], val[1, 0]
    else:
        v1, _ = integrate_batch(direct, [0.0], [0.25 * math.pi], quad)
        # upper part with phi = pi/2 - psi and sin(phi) = alpha sinh(s)
        log_alpha = 0.5 * (k.log_kc - math.log(kk))
        alpha = math.exp(log_alpha)
        rk = 1.0 / math.sqrt(kk)
        kc = k.kc

        def plateau(s):
            x = alpha * np.sinh(s)
            cphi = np.sqrt((1.0 - x) * (1.0 + x))
            ch = np.cosh(s)
            return np.stack([rk / cphi, rk * kc * (x * ch) ** 2 / cphi])
        upper = math.asinh(math.sqrt(0.5) / alpha)
        v2, _ = integrate_batch(plateau, [0.0], [upper], quad)
        i1 = v1[0, 0] + v2[0, 0]
        i2 = v1[1, 0] + v2[1, 0]
    root = math.sqrt(arc.q0)
    return root * float(i1), 4.0 * root * float(i2)
