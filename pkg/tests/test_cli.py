import csv
import json
import math

import pytest

from helium_orbits import cli


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def doc11(tmp_path_factory):
    path = tmp_path_factory.mktemp("orbit") / "o11.json"
    assert cli.main(["orbit", "--n1", "1", "--n2", "1", "--out", str(path)]) == 0
    return path


def test_orbit_summary(capsys, tmp_path):
    code, out, _ = run(capsys, "orbit", "--n1", 2, "--n2", 3, "--out", tmp_path / "o.json")
    assert code == 0
    assert "zeros=(2,3)" in out and "m=" in out and "B=" in out
    assert json.loads((tmp_path / "o.json").read_text())["schema_version"] == 1


def test_orbit_reduction_note(capsys):
    code, out, _ = run(capsys, "orbit", "--n1", 2, "--n2", 4)
    assert code == 0
    assert "orbit (1,2)" in out and "common factor 2" in out


def test_symmetric_orbit_has_equal_components(doc11):
    d = json.loads(doc11.read_text())
    assert d["q1"] == d["q2"] and d["qbar1"] == d["qbar2"]


def test_verify_fresh_orbit_passes(capsys, doc11, tmp_path):
    code, out, _ = run(capsys, "verify", doc11, "--out", tmp_path / "r.json", "--fuzz", 2, "--seed", 4)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines and all(l.startswith("PASS ") for l in lines)
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["passed"] is True and len(report["checks"]) == len(lines)


def _corrupt(src, dst, edit):
    d = json.loads(src.read_text())
    edit(d)
    dst.write_text(json.dumps(d))
    return dst


def test_verify_detects_perturbed_mean_field(capsys, doc11, tmp_path):
    bad = _corrupt(doc11, tmp_path / "bad.json", lambda d: d.update(m=d["m"] * 1.01))
    code, out, _ = run(capsys, "verify", bad)
    assert code == 1
    assert "FAIL matching identity" in out


def test_verify_detects_negative_sample(capsys, doc11, tmp_path):
    def negate(d):
        d["q2"][7] = -d["q2"][7]
    bad = _corrupt(doc11, tmp_path / "neg.json", negate)
    code, out, _ = run(capsys, "verify", bad)
    assert code == 1
    assert "FAIL nonnegativity" in out


def test_verify_tolerance_flag(capsys, doc11):
    code, out, _ = run(capsys, "verify", doc11, "--tol", "roundtrip=1e-30")
    assert code == 1 and "FAIL LC roundtrip" in out


def test_usage_errors(capsys, doc11, tmp_path):
    assert run(capsys, "orbit", "--n1", 0, "--n2", 1)[0] == 2
    assert run(capsys, "orbit", "--n1", 2, "--n2", 3, "--grid-n", 100)[0] == 2
    assert run(capsys, "verify", doc11, "--fuzz", 3)[0] == 2          # fuzz needs a seed
    assert run(capsys, "verify", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "verify", doc11, "--tol", "nonsense")[0] == 2
    assert run(capsys, "sweep-psi", "--r-min", 2, "--r-max", 1, "--count", 5, "--out", tmp_path / "x")[0] == 2
    assert run(capsys, "sweep-psi", "--r-min", 1, "--r-max", 2, "--count", 1, "--out", tmp_path / "x")[0] == 2
    assert run(capsys, "falltable", "--sigma", 0.5, "--m", "1,-2", "--out", tmp_path / "x")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


def test_sweep_psi(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    out = tmp_path / "psi.csv"
    assert run(capsys, "sweep-psi", "--r-min", 0.1, "--r-max", 10, "--count", 21, "--out", out)[0] == 0
    header, rows = _read_csv(out)
    assert header == ["r", "kappa", "psi"]
    assert len(rows) == 21
    mid = rows[10]
    assert mid[0] == pytest.approx(1.0, rel=1e-15) and mid[2] == pytest.approx(1.0, abs=1e-10)
    for lo, hi in zip(rows[:10], rows[::-1][:10]):
        assert lo[2] * hi[2] == pytest.approx(1.0, abs=1e-8)
    kap = [r[1] for r in rows]
    assert all(b < a for a, b in zip(kap, kap[1:]))
    # 17 significant digits survive the text format
    text = out.read_text().splitlines()[5].split(",")
    assert float(text[2]) == rows[4][2]


def test_sweep_threads_do_not_change_output(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "sweep-psi", "--r-min", 0.5, "--r-max", 2, "--count", 7, "--out", a, "--threads", 1)
    run(capsys, "sweep-psi", "--r-min", 0.5, "--r-max", 2, "--count", 7, "--out", b, "--threads", 3)
    assert a.read_bytes() == b.read_bytes()


def test_falltable(capsys, tmp_path):
    out = tmp_path / "fall.csv"
    code, _, _ = run(capsys, "falltable", "--sigma", 0.5, "--m", "10000,0.1,1,10,100", "--out", out)
    assert code == 0
    header, rows = _read_csv(out)
    assert header == ["m", "q0", "k", "log_1mk", "qbar", "f_sigma"]
    ms = [r[0] for r in rows]
    fs = [r[-1] for r in rows]
    assert ms == sorted(ms)
    assert all(b > a for a, b in zip(fs, fs[1:])) and fs[-1] < math.sqrt(2)
    for m, q0, k, _, qbar, f in rows:
        assert f == pytest.approx(math.sqrt(m) * qbar, rel=1e-13)
        assert k == pytest.approx(m * q0 * q0 / 2, rel=1e-13)


def test_numerical_failure_exit_code(capsys, tmp_path, monkeypatch):
    def broken(*a, **k):
        raise ArithmeticError("forced")
    monkeypatch.setattr(cli, "build_document", broken)
    assert run(capsys, "orbit", "--n1", 1, "--n2", 1)[0] == 3


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "helium_orbits", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "sweep-psi" in res.stdout


def test_sweep_monotonicity_violation_exit_code(capsys, tmp_path, monkeypatch):
    from helium_orbits import matching
    real = matching.ratio_solution

    def flipped(r, quad):
        s = real(r, quad)
        return matching.RatioSolution(s.r, s.kappa, 1.0 / s.psi)
    monkeypatch.setattr(matching, "ratio_solution", flipped)
    out = tmp_path / "psi.csv"
    assert run(capsys, "sweep-psi", "--r-min", 0.5, "--r-max", 2, "--count", 5, "--out", out)[0] == 3
    assert not out.exists()
