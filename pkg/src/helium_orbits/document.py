"""Self-describing JSON document for one constructed orbit."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import functional as fn, levicivita as lc, matching
from .matching import OrbitPair
from .quadrature import DEFAULT, Quadrature

SCHEMA_VERSION = 1


def lift_grid(n1: int, n2: int) -> int:
    """Loop grid: a power of two with at least 128 samples per zero of the busier loop."""
    need = 128 * max(n1, n2)
    return max(512, 1 << (need - 1).bit_length())


def _floats(a) -> list:
    return [None if not math.isfinite(x) else float(x) for x in np.asarray(a, dtype=float)]


def _array(a) -> np.ndarray:
    return np.array([math.nan if x is None else x for x in a], dtype=float)


@dataclass
class OrbitDocument:
    n1: int
    n2: int
    m: float
    sigma1: float
    sigma2: float
    qbar1: float
    qbar2: float
    N: int
    note: Optional[str]
    arcs: dict                       # per-component q0, k, log(1-k), energy
    integrals: dict                  # per-component int dt/q and int qdot^2 dt
    q1: np.ndarray = field(repr=False)
    q2: np.ndarray = field(repr=False)
    qdot1: np.ndarray = field(repr=False)
    qdot2: np.ndarray = field(repr=False)
    tau1: np.ndarray = field(repr=False)
    tau2: np.ndarray = field(repr=False)
    lift_n: int = 0
    parity1: str = lc.PERIODIC
    parity2: str = lc.PERIODIC
    z1: np.ndarray = field(default=None, repr=False)
    z2: np.ndarray = field(default=None, repr=False)
    diagnostics: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    # --- conversions ---------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "n1": self.n1, "n2": self.n2, "m": self.m,
            "sigma1": self.sigma1, "sigma2": self.sigma2,
            "qbar1": self.qbar1, "qbar2": self.qbar2,
            "N": self.N, "note": self.note,
            "arcs": self.arcs, "integrals": self.integrals,
            "q1": _floats(self.q1), "q2": _floats(self.q2),
            "qdot1": _floats(self.qdot1), "qdot2": _floats(self.qdot2),
            "tau1": _floats(self.tau1), "tau2": _floats(self.tau2),
            "lift_n": self.lift_n, "parity1": self.parity1, "parity2": self.parity2,
            "z1": _floats(self.z1), "z2": _floats(self.z2),
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OrbitDocument":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
        return cls(
            n1=d["n1"], n2=d["n2"], m=d["m"], sigma1=d["sigma1"], sigma2=d["sigma2"],
            qbar1=d["qbar1"], qbar2=d["qbar2"], N=d["N"], note=d["note"],
            arcs=d["arcs"], integrals=d["integrals"],
            q1=_array(d["q1"]), q2=_array(d["q2"]),
            qdot1=_array(d["qdot1"]), qdot2=_array(d["qdot2"]),
            tau1=_array(d["tau1"]), tau2=_array(d["tau2"]),
            lift_n=d["lift_n"], parity1=d["parity1"], parity2=d["parity2"],
            z1=_array(d["z1"]), z2=_array(d["z2"]),
            diagnostics=d["diagnostics"], schema_version=d["schema_version"],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, allow_nan=False) + "\n"

    @classmethod
    def loads(cls, text: str) -> "OrbitDocument":
        return cls.from_dict(json.loads(text))

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def read(cls, path) -> "OrbitDocument":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())

    # --- views ---------------------------------------------------------------------

    def trajectory(self, i: int) -> lc.CollisionTrajectory:
        """Component i with the stored regularized times and q-side integrals (no lift)."""
        q = self.q1 if i == 1 else self.q2
        n = self.n1 if i == 1 else self.n2
        return lc.CollisionTrajectory(
            q, tuple((2 * j + 1) / (2 * n) for j in range(n)),
            qdot=self.qdot1 if i == 1 else self.qdot2,
            tau=self.tau1 if i == 1 else self.tau2,
            inv_q_integral=self.integrals[f"inv_q{i}"],
            kinetic=self.integrals[f"kinetic{i}"],
            mean=self.qbar1 if i == 1 else self.qbar2,
        )

    def loops(self) -> fn.LoopPair:
        return fn.LoopPair(lc.make_loop(self.z1, self.parity1), lc.make_loop(self.z2, self.parity2))


def build_document(n1: int, n2: int, grid_n: Optional[int] = None,
                   quad: Quadrature = DEFAULT) -> OrbitDocument:
    orbit = matching.build_orbit(n1, n2, grid_n, quad)
    return document_from_orbit(orbit, quad)


def document_from_orbit(orbit: OrbitPair, quad: Quadrature = DEFAULT) -> OrbitDocument:
    nz = lift_grid(orbit.n1, orbit.n2)
    z1, z2 = lc.lift_orbit(orbit, nz)
    pair = fn.LoopPair(z1, z2)
    t1, t2 = lc.orbit_trajectory(orbit, 1, quad), lc.orbit_trajectory(orbit, 2, quad)
    report = fn.action_report(pair, t1, t2)
    arcs = {}
    for i, arc in ((1, orbit.arcs[0]), (2, orbit.arcs[1])):
        arcs[f"q0_{i}"] = arc.q0
        arcs[f"k{i}"] = arc.k.k
        arcs[f"log_kc{i}"] = arc.k.log_kc
        arcs[f"energy{i}"] = arc.energy
    integrals = {
        "inv_q1": t1.inv_q_integral, "inv_q2": t2.inv_q_integral,
        "kinetic1": t1.kinetic, "kinetic2": t2.kinetic,
    }
    return OrbitDocument(
        n1=orbit.n1, n2=orbit.n2, m=orbit.m, sigma1=orbit.sigma1, sigma2=orbit.sigma2,
        qbar1=orbit.qbar1, qbar2=orbit.qbar2, N=orbit.N, note=orbit.note,
        arcs=arcs, integrals=integrals,
        q1=orbit.q1, q2=orbit.q2, qdot1=orbit.qdot1, qdot2=orbit.qdot2,
        tau1=orbit.tau1, tau2=orbit.tau2,
        lift_n=nz, parity1=z1.parity, parity2=z2.parity,
        z1=np.asarray(z1.values), z2=np.asarray(z2.values),
        diagnostics=report.as_dict(),
    )
