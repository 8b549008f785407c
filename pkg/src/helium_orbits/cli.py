"""Command-line front end.

Subcommands: ``orbit`` builds and writes an orbit document, ``verify``
checks one, ``sweep-psi`` tabulates kappa and Psi on a log grid and
``falltable`` tabulates free falls for a list of mean fields.

Exit codes: 0 success, 1 a verification FAIL, 2 invalid arguments,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import freefall, matching
from .document import OrbitDocument, build_document
from .errors import AccuracyError, DegenerateError, DomainError, RegularityError
from .quadrature import DEFAULT, Quadrature
from .verify import TOLERANCES, run_checks

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
THREADS_ENV = "HELIUM_ORBITS_THREADS"


class NumericalFailure(RuntimeError):
    pass


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_g17(v) for v in row])


def _quad(tol) -> Quadrature:
    return DEFAULT if tol is None else Quadrature(abs_tol=tol, rel_tol=tol)


def _threads(flag) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(THREADS_ENV)
    if not env:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise DomainError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    if n < 1:
        raise DomainError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
    return n


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- argument types -----------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive finite number: {text}")
    return v


def _float_list(text: str):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _tol_override(text: str):
    name, sep, value = text.partition("=")
    if not sep or name not in TOLERANCES:
        raise argparse.ArgumentTypeError(
            f"expected NAME=VALUE with NAME in {', '.join(TOLERANCES)}: {text!r}")
    return name, _positive_float(value)


# --- commands -------------------------------------------------------------------

def cmd_orbit(args) -> int:
    doc = build_document(args.n1, args.n2, args.grid_n, _quad(args.tol))
    if args.out:
        doc.write(args.out)
    zc = [len(x) for x in doc.diagnostics["mu"]]
    line = (f"orbit ({doc.n1},{doc.n2}) N={doc.N} m={doc.m:.15g} "
            f"qbar1={doc.qbar1:.15g} qbar2={doc.qbar2:.15g} "
            f"zeros=({zc[0]},{zc[1]}) B={doc.diagnostics['B']:.15g}")
    if doc.note:
        line += f" note: {doc.note}"
    print(line)
    return 0


def cmd_verify(args) -> int:
    if args.fuzz and args.seed is None:
        raise DomainError("--fuzz requires --seed")
    try:
        doc = OrbitDocument.read(args.path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DomainError(f"cannot read document {args.path}: {exc}")
    checks = run_checks(doc, fuzz=args.fuzz, seed=args.seed, tolerances=dict(args.tol or []))
    for c in checks:
        print(c.line())
    ok = all(c.passed for c in checks)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"document": str(args.path), "passed": ok,
                       "checks": [c.as_dict() for c in checks]}, fh, indent=1)
            fh.write("\n")
    return 0 if ok else EXIT_FAIL


def cmd_sweep_psi(args) -> int:
    if not args.r_min < args.r_max:
        raise DomainError("need r_min < r_max")
    quad = _quad(args.tol)
    rs = np.logspace(math.log10(args.r_min), math.log10(args.r_max), args.count)

    def row(r):
        sol = matching.ratio_solution(float(r), quad)
        return (sol.r, sol.kappa.k, sol.psi)

    rows = _pmap(row, rs, _threads(args.threads))
    vals = [p for _, _, p in rows]
    if not all(b > a for a, b in zip(vals, vals[1:])):
        raise NumericalFailure("Psi is not strictly increasing on the grid")
    _write_csv(args.out, ["r", "kappa", "psi"], rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_falltable(args) -> int:
    quad = _quad(args.tol)
    for m in args.m:
        if not (m > 0 and math.isfinite(m)):
            raise DomainError(f"mean field values must be positive: {m}")

    def row(m):
        arc = freefall.solve_q0(m, args.sigma, quad)
        qbar = freefall.mean_value(arc, quad)
        return (m, arc.q0, arc.k.k, arc.k.log_kc, qbar, freefall.f_sigma(m, args.sigma, quad))

    rows = _pmap(row, sorted(args.m), _threads(args.threads))
    fs = [r[-1] for r in rows]
    if not all(b > a for a, b in zip(fs, fs[1:])) or max(fs) >= math.sqrt(2.0):
        raise NumericalFailure("f_sigma is not strictly increasing below sqrt(2)")
    _write_csv(args.out, ["m", "q0", "k", "log_1mk", "qbar", "f_sigma"], rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="helium-orbits", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("orbit", help="build the (n1, n2) orbit and write its document")
    o.add_argument("--n1", type=_positive_int, required=True)
    o.add_argument("--n2", type=_positive_int, required=True)
    o.add_argument("--grid-n", type=_positive_int, default=None,
                   help="time samples per period (default: grid rule of the matching step)")
    o.add_argument("--tol", type=_positive_float, default=None, help="quadrature tolerance")
    o.add_argument("--out", default=None, help="output JSON document")
    o.set_defaults(func=cmd_orbit)

    v = sub.add_parser("verify", help="check an orbit document")
    v.add_argument("path")
    v.add_argument("--tol", type=_tol_override, action="append",
                   help="override a threshold, NAME=VALUE (repeatable)")
    v.add_argument("--out", default=None, help="machine-readable JSON report")
    v.add_argument("--fuzz", type=_nonneg_int, default=0,
                   help="number of random finite-difference gradient probes")
    v.add_argument("--seed", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep-psi", help="tabulate kappa(r) and Psi(r) on a log grid")
    s.add_argument("--r-min", type=_positive_float, required=True)
    s.add_argument("--r-max", type=_positive_float, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--tol", type=_positive_float, default=None)
    s.add_argument("--threads", type=_positive_int, default=None)
    s.set_defaults(func=cmd_sweep_psi)

    f = sub.add_parser("falltable", help="tabulate free falls of half-period sigma")
    f.add_argument("--sigma", type=_positive_float, required=True)
    f.add_argument("--m", type=_float_list, required=True, help="comma-separated mean fields")
    f.add_argument("--out", required=True)
    f.add_argument("--tol", type=_positive_float, default=None)
    f.add_argument("--threads", type=_positive_int, default=None)
    f.set_defaults(func=cmd_falltable)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    if args.command == "sweep-psi" and args.count < 2:
        print("helium-orbits: error: --count must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"helium-orbits: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalFailure, AccuracyError, RegularityError, DegenerateError,
            ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"helium-orbits: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
