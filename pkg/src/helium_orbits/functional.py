"""Regularized action on pairs of loops, its gradient, and the q-side action.

For loops z1, z2 (periodic or twisted) with the norms

    n_i = ||z_i||^2,  d_i = ||z_i'||^2,  p_i = ||z_i^2||^2,  D = p1 n2 + p2 n1,

the functional is B = Q(z1) + Q(z2) + A(z1, z2) with

    Q(z) = 2 ||z||^2 ||z'||^2 + 2 / ||z||^2,     A = -n1 n2 / D.

All norms are rectangle-rule means on the uniform grid and derivatives are
spectral, so the discrete gradient below is the exact gradient of the
discrete functional (with respect to the mean inner product).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np

from . import levicivita as lc
from . import spectral
from .errors import DegenerateError, DomainError
from .levicivita import CollisionTrajectory, LoopSignal


@dataclass(frozen=True, eq=False)
class LoopPair:
    z1: LoopSignal
    z2: LoopSignal

    def __post_init__(self):
        if self.z1.n != self.z2.n:
            raise DomainError("both loops must live on the same grid")
        if not (self.z1.norm2 > 0 and self.z2.norm2 > 0):
            raise DegenerateError("both loops must have positive norm")

    @property
    def n(self) -> int:
        return self.z1.n

    @cached_property
    def norms(self):
        """((n1, d1, p1), (n2, d2, p2))."""
        out = []
        for z in (self.z1, self.z2):
            out.append((z.norm2, spectral.mean_square(z.d1), spectral.mean_square(z.values ** 2)))
        return tuple(out)

    @cached_property
    def denominator(self) -> float:
        (n1, _, p1), (n2, _, p2) = self.norms
        return p1 * n2 + p2 * n1

    def swapped(self) -> "LoopPair":
        return LoopPair(self.z2, self.z1)


def make_pair(z1, z2) -> LoopPair:
    if not isinstance(z1, LoopSignal):
        z1 = lc.make_loop(z1)
    if not isinstance(z2, LoopSignal):
        z2 = lc.make_loop(z2)
    return LoopPair(z1, z2)


# --- the functional -----------------------------------------------------------------

def action_Q(z: LoopSignal) -> float:
    n = z.norm2
    if not n > 0:
        raise DomainError("Q needs a loop of positive norm")
    return 2.0 * n * spectral.mean_square(z.d1) + 2.0 / n


def action_A(pair: LoopPair) -> float:
    (n1, _, _), (n2, _, _) = pair.norms
    return -n1 * n2 / pair.denominator


def action_B(pair: LoopPair) -> float:
    return action_Q(pair.z1) + action_Q(pair.z2) + action_A(pair)


def _coupling(ni, pi, nj, pj, big_d):
    """Coefficients of z_i and z_i^3 in the interaction part of the gradient."""
    c = -2.0 * nj * nj * pi / big_d ** 2
    e = 4.0 * ni * nj * nj / big_d ** 2
    return c, e


def grad_B(pair: LoopPair) -> Tuple[np.ndarray, np.ndarray]:
    """L^2 gradient (mean inner product) of B with respect to z1 and z2."""
    (n1, d1, p1), (n2, d2, p2) = pair.norms
    big_d = pair.denominator
    out = []
    for z, (ni, di, pi), (nj, _, pj) in ((pair.z1, pair.norms[0], pair.norms[1]),
                                          (pair.z2, pair.norms[1], pair.norms[0])):
        c, e = _coupling(ni, pi, nj, pj, big_d)
        v = z.values
        out.append(4.0 * di * v - 4.0 * ni * z.d2 - 4.0 * v / ni ** 2 + c * v + e * v ** 3)
    return out[0], out[1]


def grad_norms(pair: LoopPair) -> Tuple[float, float]:
    """(sup norm, L^2 norm) of the gradient."""
    g1, g2 = grad_B(pair)
    sup = float(max(np.abs(g1).max(), np.abs(g2).max()))
    l2 = math.sqrt(spectral.mean_square(g1) + spectral.mean_square(g2))
    return sup, l2


def critical_constants(pair: LoopPair) -> Tuple[float, float, float, float]:
    """(a1, a2, b1, b2): grad_i = -4 ||z_i||^2 (z_i'' - a_i z_i - b_i z_i^3)."""
    (n1, d1, p1), (n2, d2, p2) = pair.norms
    big_d = pair.denominator
    a1 = d1 / n1 - 1.0 / n1 ** 3 - n2 * n2 * p1 / (2.0 * n1 * big_d ** 2)
    a2 = d2 / n2 - 1.0 / n2 ** 3 - n1 * n1 * p2 / (2.0 * n2 * big_d ** 2)
    b1 = n2 * n2 / big_d ** 2
    b2 = n1 * n1 / big_d ** 2
    return a1, a2, b1, b2


def critical_residual(pair: LoopPair) -> Tuple[np.ndarray, np.ndarray]:
    """r_i = z_i'' - a_i z_i - b_i z_i^3 at the samples."""
    a1, a2, b1, b2 = critical_constants(pair)
    z1, z2 = pair.z1, pair.z2
    return (z1.d2 - a1 * z1.values - b1 * z1.values ** 3,
            z2.d2 - a2 * z2.values - b2 * z2.values ** 3)


def shifted(pair: LoopPair, s1: int, s2: int) -> LoopPair:
    """Torus action on grid-aligned shifts."""
    return LoopPair(pair.z1.shift(s1), pair.z2.shift(s2))


def gauge(pair: LoopPair) -> LoopPair:
    """Representative with the maximum of each z_i^2 at tau = 0."""
    return shifted(pair, int(np.argmax(np.abs(pair.z1.values))),
                   int(np.argmax(np.abs(pair.z2.values))))


# --- second derivative (for the least-squares polish) ---------------------------------

def jacobian(pair: LoopPair) -> np.ndarray:
    """d grad / d samples as a dense (2n, 2n) matrix; symmetric (n times the Hessian)."""
    n = pair.n
    (n1, d1, p1), (n2, d2, p2) = pair.norms
    big_d = pair.denominator
    comps = ((pair.z1, (n1, d1, p1), (n2, d2, p2)), (pair.z2, (n2, d2, p2), (n1, d1, p1)))
    vals = [pair.z1.values, pair.z2.values]
    out = np.zeros((2 * n, 2 * n))
    for i, (z, (ni, di, pi), (nj, _, pj)) in enumerate(comps):
        v = z.values
        zj = vals[1 - i]
        d2mat = spectral.derivative_matrix(n, z.twisted, 2)
        c, e = _coupling(ni, pi, nj, pj, big_d)
        # linear functionals (mean inner product) of the scalar norms
        w_n = 2.0 * v / n
        w_p = 4.0 * v ** 3 / n
        w_d = -2.0 * z.d2 / n
        w_nj = 2.0 * zj / n
        w_pj = 4.0 * zj ** 3 / n
        # own block
        blk = -4.0 * ni * d2mat
        blk[np.diag_indices(n)] += 4.0 * di - 4.0 / ni ** 2 + c + 3.0 * e * v * v
        w_big_d = nj * w_p + pj * w_n
        w_c = -2.0 * nj * nj * w_p / big_d ** 2 + 4.0 * nj * nj * pi * w_big_d / big_d ** 3
        w_e = 4.0 * nj * nj * w_n / big_d ** 2 - 8.0 * ni * nj * nj * w_big_d / big_d ** 3
        blk += np.outer(4.0 * v, w_d)
        blk += np.outer(-4.0 * z.d2 + 8.0 * v / ni ** 3, w_n)
        blk += np.outer(v, w_c) + np.outer(v ** 3, w_e)
        # cross block
        w_big_d = pi * w_nj + ni * w_pj
        w_c = -4.0 * nj * pi * w_nj / big_d ** 2 + 4.0 * nj * nj * pi * w_big_d / big_d ** 3
        w_e = 8.0 * ni * nj * w_nj / big_d ** 2 - 8.0 * ni * nj * nj * w_big_d / big_d ** 3
        cross = np.outer(v, w_c) + np.outer(v ** 3, w_e)
        r = slice(i * n, (i + 1) * n)
        out[r, r] = blk
        out[r, slice((1 - i) * n, (2 - i) * n)] = cross
    return out


@dataclass(frozen=True)
class RefineResult:
    pair: LoopPair = field(repr=False)
    converged: bool
    iterations: int
    grad_l2_initial: float
    grad_l2_final: float
    message: str


def refine_critical(pair: LoopPair, max_iters: int = 20, tol: float = 1e-10,
                    reduction: float = 100.0) -> RefineResult:
    """Levenberg-Marquardt on ||grad B||^2 in the discrete loop space.

    Stops once the gradient is below ``tol`` or stagnates; ``converged``
    means it ended at least ``reduction`` times smaller than it started (or
    below ``tol``).  Failure is reported, not raised.
    """
    n = pair.n
    parities = (pair.z1.parity, pair.z2.parity)

    def l2(g):
        return math.sqrt((np.dot(g[:n], g[:n]) + np.dot(g[n:], g[n:])) / n)

    g = np.concatenate(grad_B(pair))
    start = current = l2(g)
    if start <= tol:
        return RefineResult(pair, True, 0, start, start, "already critical within tolerance")
    lam = None
    it = 0
    message = "iteration limit reached"
    while it < max_iters:
        it += 1
        lam_vals, vecs = np.linalg.eigh(jacobian(pair))
        if lam is None:
            lam = 1e-12 * float(np.max(lam_vals ** 2))
        coords = vecs.T @ g
        improved = False
        for _ in range(30):
            step = -vecs @ (lam_vals * coords / (lam_vals ** 2 + lam))
            x = np.concatenate([pair.z1.values, pair.z2.values]) + step
            try:
                trial = LoopPair(lc.make_loop(x[:n], parities[0]), lc.make_loop(x[n:], parities[1]))
                gt = np.concatenate(grad_B(trial))
                val = l2(gt)
            except (DomainError, DegenerateError):
                val = math.inf
            if val < current:
                pair, g, improved = trial, gt, True
                lam = max(lam / 10.0, 1e-300)
                break
            lam *= 10.0
        if not improved:
            message = "no further decrease of the gradient"
            break
        gain = current / val
        current = val
        if current <= tol:
            message = "gradient below tolerance"
            break
        if gain < 1.5 and start / current >= reduction:
            message = "gradient stagnated after the requested reduction"
            break
    converged = current <= tol or start / current >= reduction
    if not converged and message == "iteration limit reached":
        message = "did not reach the requested reduction"
    return RefineResult(pair, converged, it, start, current, message)


# --- Hamiltonian side -------------------------------------------------------------------

def legendre(pair: LoopPair, w: Tuple[np.ndarray, np.ndarray]):
    """Momenta eta_i = 4 ||z_i||^2 w_i."""
    (n1, _, _), (n2, _, _) = pair.norms
    return 4.0 * n1 * np.asarray(w[0], dtype=float), 4.0 * n2 * np.asarray(w[1], dtype=float)


def velocity(pair: LoopPair, eta):
    """Inverse Legendre map w_i = eta_i / (4 ||z_i||^2)."""
    (n1, _, _), (n2, _, _) = pair.norms
    return np.asarray(eta[0], dtype=float) / (4.0 * n1), np.asarray(eta[1], dtype=float) / (4.0 * n2)


def hamiltonian(pair: LoopPair, eta) -> float:
    (n1, _, _), (n2, _, _) = pair.norms
    kin = sum(spectral.mean_square(e) / (8.0 * ni) - 2.0 / ni
              for e, ni in ((eta[0], n1), (eta[1], n2)))
    return kin + n1 * n2 / pair.denominator


def hamiltonian_action(pair: LoopPair, eta) -> float:
    """<eta_1, z_1'> + <eta_2, z_2'> - H(z, eta)."""
    pairing = (float(np.dot(eta[0], pair.z1.d1)) + float(np.dot(eta[1], pair.z2.d1))) / pair.n
    return pairing - hamiltonian(pair, eta)


# --- q side -----------------------------------------------------------------------------

def action_S(q1: CollisionTrajectory, q2: CollisionTrajectory) -> float:
    """sum_i (||qdot_i||^2 / 2 + int 2/q_i) - 1/(qbar1 + qbar2)."""
    total = 0.0
    for q in (q1, q2):
        total += 0.5 * lc.kinetic_integral(q) + 2.0 * lc.inverse_height_integral(q)
    return total - 1.0 / (lc.mean_height(q1) + lc.mean_height(q2))


def q_side_constants(q1: CollisionTrajectory, q2: CollisionTrajectory) -> Tuple[float, float]:
    """c_i = ||qdot_i||^2/2 - int 2/q_i - qbar_i/(qbar1 + qbar2)^2."""
    qb1, qb2 = lc.mean_height(q1), lc.mean_height(q2)
    s2 = (qb1 + qb2) ** 2
    return tuple(0.5 * lc.kinetic_integral(q) - 2.0 * lc.inverse_height_integral(q) - qb / s2
                 for q, qb in ((q1, qb1), (q2, qb2)))


def _interior(q: CollisionTrajectory):
    top = float(q.values.max())
    ok = q.values > 1e-8 * top
    if q.qdot is not None:
        ok &= np.isfinite(q.qdot)
    return ok


def acceleration(q: CollisionTrajectory, z: LoopSignal) -> np.ndarray:
    """qddot at the samples from the lift: (2 ||z||^4 z''/z - qdot^2/2) / q (NaN at collisions)."""
    if q.tau is None:
        raise DomainError("need the regularized times of the samples")
    nrm = z.norm2
    tau = np.asarray(q.tau)
    zi = z.interpolant(tau)
    z2 = spectral.Interpolant(z.d2, z.twisted)(tau)
    out = np.full(q.n, np.nan)
    ok = _interior(q)
    qd = q.qdot[ok]
    out[ok] = (2.0 * nrm * nrm * z2[ok] / zi[ok] - 0.5 * qd * qd) / q.values[ok]
    return out


def ode_residual(q: CollisionTrajectory, qddot: np.ndarray, coupling: float) -> np.ndarray:
    """|qddot + 2/q^2 - coupling| / (2/q^2 + coupling) at interior samples (NaN elsewhere)."""
    qv = q.values
    with np.errstate(divide="ignore", invalid="ignore"):
        force = -2.0 / qv ** 2 + coupling
        r = np.abs(qddot - force) / (2.0 / qv ** 2 + coupling)
    r[~_interior(q)] = np.nan
    return r


def c_form_residual(q: CollisionTrajectory, qddot: np.ndarray, c: float, coupling: float) -> np.ndarray:
    """Relative residual of qddot = (c - qdot^2/2)/q + 2 coupling at interior samples."""
    qv, qd = q.values, q.qdot
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = (c - 0.5 * qd * qd) / qv + 2.0 * coupling
        r = np.abs(qddot - rhs) / (2.0 / qv ** 2 + coupling)
    r[~_interior(q)] = np.nan
    return r


# --- report -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionReport:
    Q1: float
    Q2: float
    A: float
    B: float
    grad_sup: float
    grad_l2: float
    residual_sup: float
    a1: float
    a2: float
    b1: float
    b2: float
    c1: Optional[float]
    c2: Optional[float]
    mu: Tuple[Tuple[float, ...], Tuple[float, ...]]
    energy_ranges: Optional[Tuple[float, float]]

    def as_dict(self) -> dict:
        return {
            "Q1": self.Q1, "Q2": self.Q2, "A": self.A, "B": self.B,
            "grad_sup": self.grad_sup, "grad_l2": self.grad_l2, "residual_sup": self.residual_sup,
            "a1": self.a1, "a2": self.a2, "b1": self.b1, "b2": self.b2,
            "c1": self.c1, "c2": self.c2,
            "mu": [list(self.mu[0]), list(self.mu[1])],
            "energy_ranges": None if self.energy_ranges is None else list(self.energy_ranges),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActionReport":
        er = d["energy_ranges"]
        return cls(d["Q1"], d["Q2"], d["A"], d["B"], d["grad_sup"], d["grad_l2"], d["residual_sup"],
                   d["a1"], d["a2"], d["b1"], d["b2"], d["c1"], d["c2"],
                   (tuple(d["mu"][0]), tuple(d["mu"][1])), None if er is None else tuple(er))


def action_report(pair: LoopPair, q1: Optional[CollisionTrajectory] = None,
                  q2: Optional[CollisionTrajectory] = None) -> ActionReport:
    q_1, q_2 = action_Q(pair.z1), action_Q(pair.z2)
    a = action_A(pair)
    gs, gl = grad_norms(pair)
    r1, r2 = critical_residual(pair)
    consts = critical_constants(pair)
    mu = tuple(tuple(float(x) for x in lc.energy_z(z).mu) for z in (pair.z1, pair.z2))
    c1 = c2 = None
    ranges = None
    if q1 is not None and q2 is not None:
        c1, c2 = q_side_constants(q1, q2)
        qsum = lc.mean_height(q1) + lc.mean_height(q2)
        ranges = tuple(lc.energy_range(lc.energy_q(q.values, q.qdot, qsum)) for q in (q1, q2))
    return ActionReport(
        q_1, q_2, a, q_1 + q_2 + a, gs, gl,
        float(max(np.abs(r1).max(), np.abs(r2).max())),
        *consts, c1, c2, mu, ranges,
    )
