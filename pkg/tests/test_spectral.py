import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helium_orbits import spectral

N = 64
T = np.arange(N) / N


def test_derivatives_of_trig_modes():
    v = np.sin(2 * math.pi * 3 * T)
    assert np.allclose(spectral.derivative(v), 6 * math.pi * np.cos(6 * math.pi * T), atol=1e-11)
    assert np.allclose(spectral.derivative(v, order=2), -(6 * math.pi) ** 2 * v, atol=1e-9)


def test_twisted_derivative():
    v = np.sin(math.pi * T)
    assert np.allclose(spectral.derivative(v, twisted=True), math.pi * np.cos(math.pi * T), atol=1e-12)


@pytest.mark.parametrize("twisted", [False, True])
def test_derivative_matrix_is_skew_and_consistent(twisted):
    d = spectral.derivative_matrix(16, twisted)
    assert np.allclose(d, -d.T, atol=1e-13)
    d2 = spectral.derivative_matrix(16, twisted, order=2)
    assert np.allclose(d2, d @ d, atol=1e-10)
    v = np.random.default_rng(0).normal(size=16)
    assert np.allclose(d @ v, spectral.derivative(v, twisted), atol=1e-12)


def test_mean_square_exact_for_band_limited():
    v = 1 + np.cos(2 * math.pi * T) + 0.5 * np.sin(4 * math.pi * T)
    assert spectral.mean_square(v) == pytest.approx(1 + 0.5 + 0.125, rel=1e-14)


@pytest.mark.parametrize("twisted", [False, True])
def test_resample_reproduces_band_limited_signals(twisted):
    w = math.pi if twisted else 2 * math.pi
    f = lambda t: np.cos(w * t) + 0.3 * np.sin(3 * w * t)
    up = spectral.resample(f(T), 3 * N, twisted)
    assert np.allclose(up, f(np.arange(3 * N) / (3 * N)), atol=1e-13)
    down = spectral.resample(up, N, twisted)
    assert np.allclose(down, f(T), atol=1e-13)


def test_squared_coefficients_without_aliasing():
    v = np.cos(2 * math.pi * 31 * T)      # square has mode 62, beyond the grid
    c = spectral.squared_coefficients(v)
    assert c[0].real == pytest.approx(0.5, abs=1e-14)
    assert abs(c[62]) == pytest.approx(0.25, abs=1e-14)


@pytest.mark.parametrize("twisted", [False, True])
def test_interpolant_off_grid(twisted):
    w = math.pi if twisted else 2 * math.pi
    f = lambda t: np.exp(np.sin(w * t)) if not twisted else np.sin(w * t) * np.exp(np.cos(2 * w * t))
    it = spectral.Interpolant(f(np.arange(128) / 128), twisted)
    x = np.random.default_rng(1).uniform(-1, 2, 200)
    assert np.max(np.abs(it(x) - f(x))) < 1e-12
    assert it(np.array([0.25]))[0] == pytest.approx(f(0.25), abs=1e-14)


coefs = st.lists(st.floats(-1, 1), min_size=4, max_size=4)


@given(coefs, st.booleans(), st.integers(-50, 50))
def test_derivative_commutes_with_shift(c, twisted, s):
    w = math.pi if twisted else 2 * math.pi
    f = lambda t: c[0] * np.cos(w * t) + c[1] * np.sin(w * t) + c[2] * np.cos(3 * w * t) + c[3] * np.sin(3 * w * t)
    a = spectral.derivative(f(T + s / N), twisted)
    b = spectral.Interpolant(spectral.derivative(f(T), twisted), twisted)(T + s / N)
    assert np.allclose(a, b, atol=1e-11)


@given(st.lists(st.floats(-10, 10), min_size=8, max_size=8), st.booleans())
def test_derivative_is_antisymmetric_operator(v, twisted):
    v = np.array(v)
    u = np.roll(v, 3) - 1.0
    lhs = np.dot(u, spectral.derivative(v, twisted))
    rhs = -np.dot(spectral.derivative(u, twisted), v)
    assert lhs == pytest.approx(rhs, abs=1e-9)
