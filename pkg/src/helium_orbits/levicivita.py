"""Levi-Civita correspondence between collision trajectories and loops.

A loop z on the circle (or an anti-periodic "twisted" loop) produces a
trajectory through

    q(t) = z(tau)^2,   dt/dtau = z(tau)^2 / ||z||^2,

so that dt/q = dtau/||z||^2 and every transverse zero of z becomes a
collision of q.  Going back, |z| = sqrt(q) in the regularized time
tau_q(t) = ||z||^2 int_0^t ds/q, with the sign of z switching at each zero.
An odd number of zeros forces a twisted lift.

Trajectories remember, when available, the regularized times of their
samples and a way to resample the lift exactly: that is the case for
trajectories made by ``forward_lc`` and for constructed orbits.  Only
externally supplied samples go through the generic reconstruction, whose
accuracy is limited by how sparsely uniform time samples cover the
neighbourhood of a collision in regularized time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.special import ellipj, ellipk

from . import freefall, spectral
from .errors import DegenerateError, DomainError, RegularityError
from .matching import OrbitPair
from .quadrature import DEFAULT, Quadrature

PERIODIC = "periodic"
TWISTED = "twisted"
ZERO_SAMPLE_REL = 1e-12
V_FIT_TOL = 0.1


# --- loops ----------------------------------------------------------------------

def _loop_zeros(values: np.ndarray, twisted: bool) -> Tuple[float, ...]:
    """Zero positions in [0, 1): sign changes (linear crossing) and exact zero samples."""
    v = values
    n = v.size
    if not np.any(v):
        raise DegenerateError("signal is identically zero")
    nxt = np.roll(v, -1)
    prv = np.roll(v, 1)
    if twisted:
        nxt[-1] = -v[0]
        prv[0] = -v[-1]
    zero = v == 0.0
    if np.any(zero & (nxt == 0.0)):
        raise DegenerateError("zeros must be isolated (adjacent zero samples)")
    if np.any(zero & (prv * nxt > 0)):
        raise DegenerateError("non-transverse zero: the signal touches zero without changing sign")
    out = list(np.nonzero(zero)[0] / n)
    cross = np.nonzero(v * nxt < 0)[0]
    out += list((cross + v[cross] / (v[cross] - nxt[cross])) / n)
    return tuple(sorted(float(x) % 1.0 for x in out))


@dataclass(frozen=True, eq=False)
class LoopSignal:
    """Uniform samples z(j/n), j < n, of a periodic or twisted loop."""

    values: np.ndarray = field(repr=False)
    parity: str
    zeros: Tuple[float, ...]

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def twisted(self) -> bool:
        return self.parity == TWISTED

    @cached_property
    def norm2(self) -> float:
        """||z||^2."""
        return spectral.mean_square(self.values)

    @cached_property
    def d1(self) -> np.ndarray:
        return spectral.derivative(self.values, self.twisted, 1)

    @cached_property
    def d2(self) -> np.ndarray:
        return spectral.derivative(self.d1, self.twisted, 1)

    @cached_property
    def interpolant(self) -> spectral.Interpolant:
        return spectral.Interpolant(self.values, self.twisted)

    @cached_property
    def derivative_interpolant(self) -> spectral.Interpolant:
        return spectral.Interpolant(self.d1, self.twisted)

    def __neg__(self) -> "LoopSignal":
        return LoopSignal(-self.values, self.parity, self.zeros)

    def shift(self, s: int) -> "LoopSignal":
        """The loop tau -> z(tau + s/n), for an integer number of samples s."""
        s = int(s)
        n = self.n
        q, r = divmod(s, n)
        vals = np.roll(self.values, -r)
        if self.twisted:
            sign = -1.0 if q % 2 else 1.0
            vals = sign * vals
            vals[n - r:] = -vals[n - r:]
        return make_loop(vals, self.parity)

    def resampled(self, m: int) -> "LoopSignal":
        return make_loop(spectral.resample(self.values, m, self.twisted), self.parity)


def make_loop(values, parity: Optional[str] = None) -> LoopSignal:
    """Validate samples and detect zeros; parity is inferred from the zero count if omitted."""
    v = np.array(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise DomainError("a loop needs a 1-d array of at least two samples")
    if not np.all(np.isfinite(v)):
        raise DomainError("loop samples must be finite")
    if parity is None:
        # keep the closures with a consistent zero count; prefer the one that continues
        # the samples most smoothly across the seam (linear extrapolation from both sides)
        err = None
        ok = []
        for cand, sg in ((PERIODIC, 1.0), (TWISTED, -1.0)):
            jump = (abs(2 * v[-1] - v[-2] - sg * v[0])
                    + abs(2 * sg * v[0] - sg * v[1] - v[-1]))
            try:
                zs = _loop_zeros(v, cand == TWISTED)
            except DegenerateError as exc:
                err = err or exc
                continue
            if (len(zs) % 2 == 1) == (cand == TWISTED):
                ok.append((jump, cand))
        if not ok:
            raise err or DomainError("no consistent parity")
        parity = min(ok)[1]
    elif parity not in (PERIODIC, TWISTED):
        raise DomainError(f"unknown parity {parity!r}")
    zs = _loop_zeros(v, parity == TWISTED)
    if (len(zs) % 2 == 1) != (parity == TWISTED):
        raise DomainError(f"{len(zs)} sign changes per period is inconsistent with parity {parity}")
    v.setflags(write=False)
    return LoopSignal(v, parity, zs)


def refine_zeros(z: LoopSignal, iterations: int = 8) -> np.ndarray:
    """Zeros of the trigonometric interpolant, by Newton from the detected crossings."""
    tau = np.array(z.zeros, dtype=float)
    if tau.size == 0:
        return tau
    on_grid = np.isclose(tau * z.n, np.round(tau * z.n), rtol=0, atol=1e-12)
    for _ in range(iterations):
        f = z.interpolant(tau)
        d = z.derivative_interpolant(tau)
        step = np.where((d != 0) & ~on_grid, f / np.where(d == 0, 1.0, d), 0.0)
        tau = tau - step
        if np.all(np.abs(step) < 1e-16):
            break
    return np.mod(tau, 1.0)


# --- trajectories -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CollisionTrajectory:
    """Nonnegative samples q(j/n), j < n, with isolated zeros.

    Optional data:
      qdot            velocity samples (NaN at and next to collisions)
      tau             exact regularized times of the samples
      lift            m -> samples of the lift on m uniform points, first segment positive
      inv_q_integral  int_0^1 dt/q, kinetic = int_0^1 qdot^2 dt, mean = int_0^1 q dt
    """

    values: np.ndarray = field(repr=False)
    zeros: Tuple[float, ...]
    qdot: Optional[np.ndarray] = field(default=None, repr=False)
    tau: Optional[np.ndarray] = field(default=None, repr=False)
    lift: Optional[Callable[[int], np.ndarray]] = field(default=None, repr=False)
    inv_q_integral: Optional[float] = None
    kinetic: Optional[float] = None
    mean: Optional[float] = None

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def zero_count(self) -> int:
        return len(self.zeros)

    @property
    def parity(self) -> str:
        return TWISTED if self.zero_count % 2 else PERIODIC


def _q_zeros(q: np.ndarray) -> Tuple[float, ...]:
    n = q.size
    top = float(q.max())
    if top <= 0:
        raise DegenerateError("trajectory is identically zero")
    small = q <= ZERO_SAMPLE_REL * top
    if np.any(small & np.roll(small, -1)):
        raise DegenerateError("zeros must be isolated (adjacent zero samples)")
    out = list(np.nonzero(small)[0] / n)
    # collisions between samples: q^{3/2} is locally V-shaped, |t - t*| to leading order
    f = q ** 1.5
    prv, nxt = np.roll(q, 1), np.roll(q, -1)
    cand = np.nonzero(~small & (q < prv) & (q <= nxt) & ~np.roll(small, 1) & ~np.roll(small, -1))[0]
    for j in cand:
        fl2, fl1 = f[(j - 2) % n], f[(j - 1) % n]
        fr1, fr2 = f[(j + 1) % n], f[(j + 2) % n]
        sl, sr = fl1 - fl2, fr2 - fr1           # slopes per sample
        if not (sl < 0 < sr):
            continue
        # arms f = fl1 + sl (x + 1) and f = fr1 + sr (x - 1), x in samples from j
        x = (fr1 - sr - fl1 - sl) / (sl - sr)
        fx = fl1 + sl * (x + 1)
        if abs(fx) <= V_FIT_TOL * 0.5 * (sr - sl) and -1 < x < 1:
            out.append(((j + x) / n) % 1.0)
    return tuple(sorted(out))


def make_trajectory(values, qdot=None, zeros=None) -> CollisionTrajectory:
    """Validate samples of q on the uniform grid and locate collisions."""
    q = np.array(values, dtype=float)
    if q.ndim != 1 or q.size < 4:
        raise DomainError("a trajectory needs a 1-d array of at least four samples")
    if not np.all(np.isfinite(q)):
        raise DomainError("trajectory samples must be finite")
    if np.any(q < 0):
        raise DomainError("trajectory samples must be nonnegative")
    zs = _q_zeros(q) if zeros is None else tuple(sorted(float(z) % 1.0 for z in zeros))
    v = None if qdot is None else np.array(qdot, dtype=float)
    q.setflags(write=False)
    return CollisionTrajectory(q, zs, qdot=v)


# --- time maps ---------------------------------------------------------------------

class LoopTimeMap:
    """t_z(tau) = int_0^tau z^2 / ||z||^2, a homeomorphism of [0, 1]."""

    def __init__(self, z: LoopSignal):
        if z.norm2 <= 0:
            raise DegenerateError("signal is identically zero")
        self.z = z
        c = spectral.squared_coefficients(z.values, z.twisted)   # period 1
        m = c.size
        k = np.fft.fftfreq(m, d=1.0 / m)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(k != 0, c / (2j * math.pi * k), 0.0) / z.norm2
        if m % 2 == 0:
            g[m // 2] = 0.0
        self._g = spectral.Interpolant(np.fft.ifft(g).real * m, False)
        self._g0 = float(self._g(np.array([0.0]))[0])
        # tabulate on the fine grid for brackets
        fine = spectral.UPSAMPLE * z.n
        self._grid = np.arange(fine + 1) / fine
        self._table = np.maximum.accumulate(self(self._grid))

    def __call__(self, tau) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)
        out = tau + self._g(tau) - self._g0
        return np.where(tau == 0, 0.0, np.where(tau == 1, 1.0, out))

    def inverse(self, t, tol: float = 1e-15) -> np.ndarray:
        """tau_z(t): safeguarded Newton with bisection fallback."""
        t = np.asarray(t, dtype=float)
        shape = t.shape
        t = t.ravel()
        j = np.clip(np.searchsorted(self._table, t, side="right") - 1, 0, self._grid.size - 2)
        lo, hi = self._grid[j].copy(), self._grid[j + 1].copy()
        tau = 0.5 * (lo + hi)
        nrm = self.z.norm2
        active = np.ones(t.size, dtype=bool)
        for _ in range(200):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            x = tau[idx]
            r = self(x) - t[idx]
            zx = self.z.interpolant(x)
            d = zx * zx / nrm
            lo[idx] = np.where(r <= 0, x, lo[idx])
            hi[idx] = np.where(r >= 0, x, hi[idx])
            with np.errstate(divide="ignore", invalid="ignore"):
                new = x - r / d
            bad = ~((new > lo[idx]) & (new < hi[idx])) | ~np.isfinite(new)
            new = np.where(bad, 0.5 * (lo[idx] + hi[idx]), new)
            tau[idx] = new
            done = (np.abs(new - x) <= tol) | (r == 0) | (hi[idx] - lo[idx] <= tol)
            active[idx[done]] = False
        tau[t <= 0] = 0.0
        tau[t >= 1] = 1.0
        return tau.reshape(shape)


def time_map_tz(z: LoopSignal) -> LoopTimeMap:
    return LoopTimeMap(z)


class TrajectoryTimeMap:
    """tau_q on [0, 1]: exact sample values plus monotone interpolation in between."""

    def __init__(self, t: np.ndarray, tau: np.ndarray):
        tt = np.concatenate([t, [1.0]])
        uu = np.concatenate([tau, [1.0]])
        if np.any(np.diff(uu) <= 0):
            raise RegularityError("regularized time is not strictly increasing")
        self.at_samples = tau
        self._fwd = PchipInterpolator(tt, uu)
        self._inv = PchipInterpolator(uu, tt)

    def __call__(self, t) -> np.ndarray:
        return self._fwd(np.asarray(t, dtype=float))

    def inverse(self, tau) -> np.ndarray:
        return self._inv(np.asarray(tau, dtype=float))


_SMOOTHSTEP_C = 30.0


def _smoothstep(s):
    return s ** 3 * (10.0 - 15.0 * s + 6.0 * s * s)


def _smoothstep_inverse(u):
    # Newton from the endpoint asymptotics S(s) ~ 10 s^3, 1 - S(1 - s) ~ 10 s^3
    u = np.asarray(u, dtype=float)
    s = np.where(u < 0.5, np.cbrt(u / 10.0), 1.0 - np.cbrt((1.0 - u) / 10.0))
    for _ in range(50):
        f = _smoothstep(s) - u
        d = _SMOOTHSTEP_C * s * s * (1 - s) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(d > 0, f / d, 0.0)
        s = np.clip(s - step, 0.0, 1.0)
        if np.all(np.abs(step) <= 1e-15 * np.maximum(s, 1e-300)):
            break
    return s


def _segment_cumulative(t_nodes, f_nodes, a, b):
    """int_a^t f at the nodes and over [a, b], for f ~ |t - t*|^{-2/3} (or milder) at a and b.

    With t = a + (b - a) S(s), S the quintic smoothstep (S' = 30 s^2 (1-s)^2),
    the transformed integrand 30 (b - a) s^2 (1-s)^2 f is smooth for the
    collision behaviour q ~ |t - t*|^{2/3} (f = 1/q or qdot^2) and for f = q.
    """
    if t_nodes.size < 4:
        raise RegularityError("too few samples between two collisions")
    length = b - a
    s = _smoothstep_inverse((t_nodes - a) / length)
    y = (s * (1 - s)) ** 2 * f_nodes
    # local exponent at both ends: f ~ d^{-p} must have p < 1
    for near, far, end in ((0, 1, a), (-1, -2, b)):
        d_near, d_far = abs(t_nodes[near] - end), abs(t_nodes[far] - end)
        fn, ff = f_nodes[near], f_nodes[far]
        if d_far > d_near > 0 and fn > 0 and ff > 0:
            p = math.log(fn / ff) / math.log(d_far / d_near)
            if p >= 1.0:
                raise RegularityError(
                    f"integrand grows like |t - t*|^-{p:.2f} at a collision; the integral diverges")
    spline = CubicSpline(s, y, bc_type="not-a-knot", extrapolate=True)
    anti = spline.antiderivative()
    base = anti(0.0)
    cum = _SMOOTHSTEP_C * length * (anti(s) - base)
    total = _SMOOTHSTEP_C * length * (anti(1.0) - base)
    return cum, total


def _singular_cumulative(q: CollisionTrajectory, f: np.ndarray):
    """Cumulative int_0^{t_j} f and the total over [0, 1), segment by segment between collisions.

    Samples where f is not finite (e.g. velocities at collisions) are skipped.
    """
    n = q.n
    t = np.arange(n) / n
    zs = np.array(q.zeros)
    if zs.size == 0:
        total = float(f.mean())
        c = np.fft.fft(f - total)
        k = np.fft.fftfreq(n, d=1.0 / n)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.where(k != 0, c / (2j * math.pi * k), 0.0)
        if n % 2 == 0:
            g[n // 2] = 0.0
        anti = np.fft.ifft(g).real * 1.0
        return total * t + anti - anti[0], total
    # measure from the first collision
    shifted = np.where(t >= zs[0] - 1e-15, t, t + 1.0)
    bounds = np.concatenate([zs, [zs[0] + 1.0]])
    cum = np.full(n, np.nan)
    zero_cum = []
    running = 0.0
    usable = np.isfinite(f)
    for a, b in zip(bounds[:-1], bounds[1:]):
        zero_cum.append(running)
        idx = np.nonzero((shifted > a + 1e-15) & (shifted < b - 1e-15) & usable)[0]
        idx = idx[np.argsort(shifted[idx])]
        c, tot = _segment_cumulative(shifted[idx], f[idx], a, b)
        cum[idx] = running + c
        running += tot
    total = running
    for j in np.nonzero(np.isnan(cum))[0]:
        # samples on a collision (or skipped next to one): nearest zero's value
        k = int(np.argmin(np.abs(((zs - t[j] + 0.5) % 1.0) - 0.5)))
        cum[j] = zero_cum[k]
    return np.mod(cum - cum[0], total), total


def _generic_tau(q: CollisionTrajectory):
    """tau_q at the samples and int_0^1 dt/q, from the samples alone."""
    with np.errstate(divide="ignore"):
        inv = 1.0 / q.values
    cum, total = _singular_cumulative(q, inv)
    tau = cum / total
    tau[0] = 0.0
    return tau, total


def singular_integral(q: CollisionTrajectory, f) -> float:
    """int_0^1 f dt for samples f with at most |t - t*|^{-2/3} growth at the collisions of q."""
    return _singular_cumulative(q, np.asarray(f, dtype=float))[1]


def time_map_tauq(q: CollisionTrajectory) -> TrajectoryTimeMap:
    """tau_q(t) = int_0^t ds/q / int_0^1 ds/q."""
    t = np.arange(q.n) / q.n
    if q.tau is not None:
        return TrajectoryTimeMap(t, np.asarray(q.tau, dtype=float))
    tau, _ = _generic_tau(q)
    return TrajectoryTimeMap(t, tau)


def inverse_height_integral(q: CollisionTrajectory) -> float:
    """int_0^1 dt/q: stored (exact) value when known, else the singular-aware sample rule."""
    if q.inv_q_integral is not None:
        return float(q.inv_q_integral)
    return _generic_tau(q)[1]


def kinetic_integral(q: CollisionTrajectory) -> float:
    """int_0^1 qdot^2 dt."""
    if q.kinetic is not None:
        return float(q.kinetic)
    if q.qdot is None:
        raise DomainError("trajectory carries no velocities")
    return singular_integral(q, np.asarray(q.qdot) ** 2)


def mean_height(q: CollisionTrajectory) -> float:
    """qbar = int_0^1 q dt."""
    if q.mean is not None:
        return float(q.mean)
    if q.zero_count == 0:
        return float(np.mean(q.values))
    return singular_integral(q, q.values)


# --- the correspondence ----------------------------------------------------------

def _first_segment_sign(z: LoopSignal) -> float:
    """Sign of z just after tau = 0 (on the first segment)."""
    v = z.values
    nz = np.nonzero(v)[0]
    return 1.0 if v[nz[0]] > 0 else -1.0


def forward_lc(z: LoopSignal, n_samples: Optional[int] = None) -> CollisionTrajectory:
    """q(t) = z(tau_z(t))^2 on n_samples uniform times (default: as many as z has)."""
    m = z.n if n_samples is None else int(n_samples)
    if m < 4:
        raise DomainError("need at least four output samples")
    tmap = LoopTimeMap(z)
    t = np.arange(m) / m
    tau = tmap.inverse(t)
    tz = refine_zeros(z)
    t_star = tmap(tz)
    # T - t is cubic in tau at a collision, so samples sitting on one take the zero itself
    for a, b in zip(tz, t_star):
        j = int(round(b * m)) % m
        if abs(b * m - round(b * m)) <= 1e-9:
            tau[j] = a if j or a < 0.5 else 0.0
    zt = z.interpolant(tau)
    q = zt * zt
    nrm = z.norm2
    with np.errstate(divide="ignore", invalid="ignore"):
        qdot = 2.0 * nrm * z.derivative_interpolant(tau) / zt
    qdot[q <= freefall.Q_FLOOR_REL * q.max()] = np.nan
    zeros = tuple(sorted(float(x) % 1.0 for x in t_star))
    sign = _first_segment_sign(z)
    src = z.values * sign
    twisted = z.twisted

    def lift(k: int) -> np.ndarray:
        return src.copy() if k == src.size else spectral.resample(src, k, twisted)

    fourth = spectral.mean_square(z.values * z.values)
    q.setflags(write=False)
    return CollisionTrajectory(
        q, zeros, qdot=qdot, tau=tau, lift=lift,
        inv_q_integral=1.0 / nrm,
        kinetic=4.0 * nrm * spectral.mean_square(z.d1),
        mean=fourth / nrm,
    )


def _generic_lift(q: CollisionTrajectory, m: int) -> Tuple[np.ndarray, str]:
    """Signed sqrt(q) against regularized time, re-interpolated onto a uniform tau grid."""
    n = q.n
    tmap = time_map_tauq(q)
    tau = tmap.at_samples
    t = np.arange(n) / n
    zs = np.array(q.zeros)
    count = zs.size
    twisted = count % 2 == 1
    # segment index of each sample: number of zeros at or before t (first segment = 0)
    seg = np.searchsorted(zs, t, side="right")
    if count and zs[0] == 0.0:
        seg = seg - 1
    sign = np.where(seg % 2 == 0, 1.0, -1.0)
    zvals = sign * np.sqrt(q.values)
    ztau = tmap(zs) if count else np.array([])
    knots_t = np.concatenate([tau, ztau])
    knots_z = np.concatenate([zvals, np.zeros(count)])
    order = np.argsort(knots_t, kind="stable")
    kt, kz = knots_t[order], knots_z[order]
    keep = np.concatenate([[True], np.diff(kt) > 1e-14])
    kt, kz = kt[keep], kz[keep]
    s = -1.0 if twisted else 1.0
    xt = np.concatenate([kt - 1.0, kt, kt + 1.0])
    xz = np.concatenate([s * kz, kz, s * kz])
    spline = CubicSpline(xt, xz)
    return spline(np.arange(m) / m), (TWISTED if twisted else PERIODIC)


def lift_lc(q: CollisionTrajectory, global_sign: int = 1,
            n_samples: Optional[int] = None) -> LoopSignal:
    """One of the two lifts of q (the other is its negative), on n_samples uniform tau."""
    if global_sign not in (1, -1):
        raise DomainError("global_sign must be +1 or -1")
    m = q.n if n_samples is None else int(n_samples)
    parity = q.parity
    if q.lift is not None:
        vals = q.lift(m)
    else:
        vals, parity = _generic_lift(q, m)
    return make_loop(global_sign * np.asarray(vals, dtype=float), parity)


# --- constructed orbits ------------------------------------------------------------

def _sn_lift(arc, n: int):
    """z(tau) = sqrt(q0) sn(K (1 - 2 n tau) | k): top at tau = 0, n zeros per unit tau."""
    kk = arc.k.k
    big_k = float(ellipk(kk))
    amp = math.sqrt(arc.q0)

    def lift(m: int) -> np.ndarray:
        j = np.arange(m)
        u = big_k * (m - 2 * n * j) / m
        sn, _, _, _ = ellipj(u, kk)
        sn[(m - 2 * n * j) == 0] = 0.0
        return amp * sn
    return lift


def orbit_trajectory(orbit: OrbitPair, i: int, quad: Quadrature = DEFAULT) -> CollisionTrajectory:
    """Component i of a constructed orbit, with exact regularized times and lift."""
    q, v, arc, n, tau = orbit.component(i)
    zeros = tuple((2 * j + 1) / (2 * n) for j in range(n))
    inv_q, kin = freefall.arc_integrals(arc, quad)
    return CollisionTrajectory(
        q, zeros, qdot=v, tau=tau, lift=_sn_lift(arc, n),
        inv_q_integral=2 * n * inv_q, kinetic=2 * n * kin,
        mean=orbit.qbar1 if i == 1 else orbit.qbar2,
    )


def lift_orbit(orbit: OrbitPair, n_samples: Optional[int] = None,
               signs: Tuple[int, int] = (1, 1)) -> Tuple[LoopSignal, LoopSignal]:
    """Both lifts of a constructed orbit on a common tau grid (default: the orbit's N)."""
    m = orbit.N if n_samples is None else int(n_samples)
    return (lift_lc(orbit_trajectory(orbit, 1), signs[0], m),
            lift_lc(orbit_trajectory(orbit, 2), signs[1], m))


# --- energies -----------------------------------------------------------------------

def energy_q(q, qdot, qbar_sum: float) -> np.ndarray:
    """E(t) = qdot^2/2 - 2/q - q/(qbar1 + qbar2)^2 (NaN where the velocity is unavailable)."""
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        e = 0.5 * qdot * qdot - 2.0 / q - q / qbar_sum ** 2
    e[~np.isfinite(e)] = np.nan
    return e


def energy_range(e: np.ndarray) -> float:
    e = e[np.isfinite(e)]
    return float(e.max() - e.min()) if e.size else math.nan


@dataclass(frozen=True)
class LoopEnergy:
    values: np.ndarray = field(repr=False)   # E_z at samples, NaN at zero samples
    zeros: np.ndarray = field(repr=False)    # refined zero positions
    mu: np.ndarray = field(repr=False)       # 2 ||z||^4 z'(tau*)^2 at each zero


def energy_z(z: LoopSignal, charge: float = 2.0) -> LoopEnergy:
    """E_z = (2 ||z||^4 z'^2 - charge) / z^2 and the collision strengths mu."""
    nrm = z.norm2
    v = z.values
    with np.errstate(divide="ignore", invalid="ignore"):
        e = (2.0 * nrm * nrm * z.d1 ** 2 - charge) / (v * v)
    e[v == 0] = np.nan
    tz = refine_zeros(z)
    dz = z.derivative_interpolant(tz) if tz.size else np.array([])
    return LoopEnergy(e, tz, 2.0 * nrm * nrm * dz * dz)
