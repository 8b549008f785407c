"""Consistency checks of an orbit document, one named PASS/FAIL line each."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from . import freefall, functional as fn, levicivita as lc
from .document import OrbitDocument
from .quadrature import DEFAULT, Quadrature

# default thresholds, overridable per run by name
TOLERANCES = {
    "match": 1e-11,      # |f1 + f2 - 1|
    "doc": 1e-9,         # |m (qbar1 + qbar2)^2 - 1|
    "ode": 1e-6,
    "energy": 1e-8,
    "mu": 1e-6,
    "residual": 1e-6,    # relative to sup |z''|
    "legendre": 1e-12,
    "action": 1e-6,
    "roundtrip": 1e-10,
    "fd": 1e-6,
}
FUZZ_STEP = 1e-2


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _fmt(x: float) -> str:
    return f"{x:.3e}"


def _smooth_direction(rng, n: int, twisted: bool, modes: int = 8) -> np.ndarray:
    t = np.arange(n) / n
    v = np.zeros(n)
    for k in range(1, modes + 1):
        w = (2 * k - 1) * math.pi if twisted else 2 * math.pi * k
        v += (rng.normal() * np.cos(w * t) + rng.normal() * np.sin(w * t)) / k ** 2
    if not twisted:
        v += rng.normal()
    return v


def gradient_fd_error(pair: fn.LoopPair, v1, v2, eps: float = 1e-5) -> float:
    """Error of <grad B, v> against a central difference of B, relative to |grad| |v|."""
    g1, g2 = fn.grad_B(pair)
    exact = (np.dot(g1, v1) + np.dot(g2, v2)) / pair.n
    scale = math.sqrt((np.dot(g1, g1) + np.dot(g2, g2)) * (np.dot(v1, v1) + np.dot(v2, v2))) / pair.n

    def b(s):
        return fn.action_B(fn.LoopPair(
            lc.make_loop(pair.z1.values + s * v1, pair.z1.parity),
            lc.make_loop(pair.z2.values + s * v2, pair.z2.parity)))
    fd = (b(eps) - b(-eps)) / (2 * eps)
    return abs(fd - exact) / max(scale, 1e-300)


def run_checks(doc: OrbitDocument, quad: Quadrature = DEFAULT,
               fuzz: int = 0, seed: Optional[int] = None,
               tolerances: Optional[dict] = None) -> List[Check]:
    tol = dict(TOLERANCES)
    if tolerances:
        unknown = set(tolerances) - set(tol)
        if unknown:
            raise ValueError(f"unknown tolerance names: {sorted(unknown)}")
        tol.update(tolerances)
    out: List[Check] = []
    n1, n2 = doc.n1, doc.n2

    # matching identity: the stored mean field solves the matching equation
    s1, s2 = 0.5 / n1, 0.5 / n2
    fsum = freefall.f_sigma(doc.m, doc.sigma1, quad) + freefall.f_sigma(doc.m, doc.sigma2, quad)
    ident = doc.m * (doc.qbar1 + doc.qbar2) ** 2
    ok = (abs(fsum - 1) <= tol["match"] and abs(ident - 1) <= tol["doc"]
          and doc.sigma1 == s1 and doc.sigma2 == s2)
    out.append(Check("matching identity", ok,
                     f"|f1+f2-1| = {_fmt(abs(fsum - 1))}, |m (qbar1+qbar2)^2 - 1| = {_fmt(abs(ident - 1))}"))

    # nonnegativity
    qmin = float(min(np.min(doc.q1), np.min(doc.q2)))
    out.append(Check("nonnegativity", qmin >= 0, f"min q = {qmin:.3e}"))
    if qmin < 0:
        return out

    t1, t2 = doc.trajectory(1), doc.trajectory(2)
    pair = doc.loops()
    z1, z2 = pair.z1, pair.z2

    # zero counts on both sides, from the samples
    qz = (lc.make_trajectory(doc.q1).zero_count, lc.make_trajectory(doc.q2).zero_count)
    zz = (len(z1.zeros), len(z2.zeros))
    out.append(Check("zero counts", qz == (n1, n2) and zz == (n1, n2),
                     f"q zeros {qz}, z zeros {zz}, expected {(n1, n2)}"))

    # parity law
    par = (z1.parity, z2.parity)
    want = tuple(lc.TWISTED if n % 2 else lc.PERIODIC for n in (n1, n2))
    out.append(Check("parity law", par == want, f"lifts {par}"))

    # reflection about t = 0
    nn = doc.N
    idx = (-np.arange(nn)) % nn
    sym = bool(np.array_equal(doc.q1, doc.q1[idx]) and np.array_equal(doc.q2, doc.q2[idx]))
    out.append(Check("reflection symmetry", sym, "q(-t) = q(t) at every grid point" if sym
                     else "q(-t) differs from q(t)"))

    # ODE of the mean interaction equations at interior samples
    coupling = 1.0 / (doc.qbar1 + doc.qbar2) ** 2
    acc1, acc2 = fn.acceleration(t1, z1), fn.acceleration(t2, z2)
    res = max(np.nanmax(fn.ode_residual(t1, acc1, coupling)),
              np.nanmax(fn.ode_residual(t2, acc2, coupling)))
    out.append(Check("ODE residual", res < tol["ode"], f"max relative residual {_fmt(res)}"))

    # c-form of the same equation with the q-side constants
    c1, c2 = fn.q_side_constants(t1, t2)
    cres = max(np.nanmax(fn.c_form_residual(t1, acc1, c1, coupling)),
               np.nanmax(fn.c_form_residual(t2, acc2, c2, coupling)))
    out.append(Check("q-side constants", cres < tol["ode"],
                     f"c1 = {c1:.12g}, c2 = {c2:.12g}, residual {_fmt(cres)}"))

    # energy constancy
    qsum = doc.qbar1 + doc.qbar2
    ranges = [lc.energy_range(lc.energy_q(t.values, t.qdot, qsum)) for t in (t1, t2)]
    out.append(Check("energy constancy", max(ranges) < tol["energy"],
                     f"ranges {_fmt(ranges[0])}, {_fmt(ranges[1])}"))

    # collision strength at every zero of the lifts
    mus = np.concatenate([lc.energy_z(z1).mu, lc.energy_z(z2).mu])
    dev = float(np.max(np.abs(mus - 2.0))) if mus.size else math.nan
    out.append(Check("collision strength mu = 2", mus.size > 0 and dev <= tol["mu"],
                     f"{mus.size} zeros, max |mu - 2| = {_fmt(dev)}"))

    # critical point of the regularized action
    r1, r2 = fn.critical_residual(pair)
    scale = max(1.0, float(np.abs(z1.d2).max()), float(np.abs(z2.d2).max()))
    rsup = float(max(np.abs(r1).max(), np.abs(r2).max()))
    a1, a2, b1, b2 = fn.critical_constants(pair)
    gsup, gl2 = fn.grad_norms(pair)
    ok = rsup <= tol["residual"] * scale and a1 < 0 and a2 < 0 and b1 > 0 and b2 > 0
    out.append(Check("gradient", ok,
                     f"|grad|_2 = {_fmt(gl2)}, sup|z'' - a z - b z^3| = {_fmt(rsup)} "
                     f"(scale {scale:.3g}), a = ({a1:.6g}, {a2:.6g}), b = ({b1:.6g}, {b2:.6g})"))

    # Legendre identity
    bval = fn.action_B(pair)
    eta = fn.legendre(pair, (z1.d1, z2.d1))
    gap = abs(fn.hamiltonian_action(pair, eta) - bval)
    out.append(Check("Legendre identity", gap <= tol["legendre"] * max(1.0, abs(bval)),
                     f"|A_H - B| = {_fmt(gap)}"))

    # action on both sides of the transformation
    sval = fn.action_S(t1, t2)
    out.append(Check("action identity", abs(sval - bval) <= tol["action"],
                     f"S = {sval:.15g}, B = {bval:.15g}"))

    # Levi-Civita roundtrip: the stored loops reproduce the stored trajectories
    f1, f2 = lc.forward_lc(z1, nn), lc.forward_lc(z2, nn)
    scale_q = max(1.0, float(doc.q1.max()), float(doc.q2.max()))
    rt = float(max(np.abs(f1.values - doc.q1).max(), np.abs(f2.values - doc.q2).max()))
    out.append(Check("LC roundtrip", rt <= tol["roundtrip"] * scale_q, f"max |q - forward(z)| = {_fmt(rt)}"))

    # 4-to-1: every sign choice gives the same trajectories and a distinct critical pair
    images = set()
    same = True
    for s_1 in (1, -1):
        for s_2 in (1, -1):
            p = fn.LoopPair(-z1 if s_1 < 0 else z1, -z2 if s_2 < 0 else z2)
            g1 = lc.forward_lc(p.z1, nn).values
            g2 = lc.forward_lc(p.z2, nn).values
            same &= bool(np.array_equal(g1, f1.values) and np.array_equal(g2, f2.values))
            same &= fn.action_B(p) == bval
            images.add((p.z1.values.tobytes(), p.z2.values.tobytes()))
    out.append(Check("4-to-1 lifts", same and len(images) == 4,
                     f"{len(images)} distinct sign choices map to the same orbit"))

    if fuzz:
        # at the critical point the gradient vanishes, so probe nearby loops
        rng = np.random.default_rng(seed)
        errs = []
        for _ in range(fuzz):
            w1 = _smooth_direction(rng, pair.n, z1.twisted)
            w2 = _smooth_direction(rng, pair.n, z2.twisted)
            near = fn.LoopPair(lc.make_loop(z1.values + FUZZ_STEP * w1, z1.parity),
                               lc.make_loop(z2.values + FUZZ_STEP * w2, z2.parity))
            errs.append(gradient_fd_error(near,
                                          _smooth_direction(rng, pair.n, z1.twisted),
                                          _smooth_direction(rng, pair.n, z2.twisted)))
        out.append(Check("fuzz: gradient directional derivatives", max(errs) <= tol["fd"],
                         f"{fuzz} random smooth directions, max relative error {_fmt(max(errs))}"))
    return out
