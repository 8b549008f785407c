import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from helium_orbits import levicivita as lc, matching

settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_ORBITS = {}


def orbit(n1, n2):
    key = (n1, n2)
    if key not in _ORBITS:
        _ORBITS[key] = matching.build_orbit(n1, n2)
    return _ORBITS[key]


@pytest.fixture(scope="session")
def orbit11():
    return orbit(1, 1)


@pytest.fixture(scope="session")
def orbit12():
    return orbit(1, 2)


@pytest.fixture(scope="session")
def orbit23():
    return orbit(2, 3)


def smooth_loop(rng, n, twisted, modes=6, offset=0.0):
    """Random band-limited loop; periodic loops get a constant offset to keep the norm positive."""
    t = np.arange(n) / n
    v = np.zeros(n)
    for k in range(1, modes + 1):
        w = (2 * k - 1) * np.pi if twisted else 2 * np.pi * k
        v += (rng.normal() * np.cos(w * t) + rng.normal() * np.sin(w * t)) / k ** 2
    if not twisted:
        v += offset
    return lc.make_loop(v, lc.TWISTED if twisted else lc.PERIODIC)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    RESULTS = getattr(mod, "RESULTS", None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda s: (int(s.split()[0].rstrip("abcdef")), s)):
        terminalreporter.write_line(RESULTS[key])
