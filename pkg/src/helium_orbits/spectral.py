"""Trigonometric tools on uniform grids over [0, 1).

A periodic signal lives on [0, 1).  A twisted (anti-periodic) signal with
z(t + 1) = -z(t) is stored on [0, 1) as well and handled through its double
cover on [0, 2), which is periodic.  Derivatives drop the Nyquist mode so
that the first-derivative matrix is real and skew-symmetric; the second
derivative is its square, which keeps discrete gradients exact.
"""

from __future__ import annotations

import math

import numpy as np

UPSAMPLE = 16
STENCIL = 14


def cover(values: np.ndarray, twisted: bool) -> np.ndarray:
    """Samples over one full period of the periodic carrier."""
    values = np.asarray(values, dtype=float)
    return np.concatenate([values, -values]) if twisted else values


def wavenumbers(m: int, period: float) -> np.ndarray:
    k = np.fft.fftfreq(m, d=period / m) * (2.0 * math.pi)
    if m % 2 == 0:
        k[m // 2] = 0.0
    return k


def derivative(values, twisted: bool = False, order: int = 1) -> np.ndarray:
    """order-th spectral derivative, computed as repeated first derivatives."""
    values = np.asarray(values, dtype=float)
    n = values.size
    zz = cover(values, twisted)
    k = wavenumbers(zz.size, 2.0 if twisted else 1.0)
    coef = np.fft.fft(zz)
    for _ in range(order):
        coef = 1j * k * coef
    return np.fft.ifft(coef).real[:n]


def derivative_matrix(n: int, twisted: bool = False, order: int = 1) -> np.ndarray:
    """Dense matrix of ``derivative`` on n samples (column j is the image of e_j)."""
    eye = np.eye(n)
    zz = np.concatenate([eye, -eye], axis=0) if twisted else eye
    k = wavenumbers(zz.shape[0], 2.0 if twisted else 1.0)
    coef = np.fft.fft(zz, axis=0)
    for _ in range(order):
        coef = (1j * k)[:, None] * coef
    return np.fft.ifft(coef, axis=0).real[:n]


def mean_square(values) -> float:
    """Rectangle rule for int_0^1 v^2 (exact for band-limited data)."""
    v = np.asarray(values, dtype=float)
    return float(np.dot(v, v) / v.size)


def resample(values, m: int, twisted: bool = False) -> np.ndarray:
    """Band-limited interpolation of the samples onto m uniform points of [0, 1)."""
    values = np.asarray(values, dtype=float)
    n = values.size
    zz = cover(values, twisted)
    big = zz.size
    out_len = 2 * m if twisted else m
    coef = np.fft.fft(zz)
    padded = np.zeros(out_len, dtype=complex)
    half = (big - 1) // 2
    keep = min(half, (out_len - 1) // 2)
    padded[:keep + 1] = coef[:keep + 1]
    padded[out_len - keep:] = coef[big - keep:]
    if big % 2 == 0 and out_len > big:
        # split the Nyquist coefficient symmetrically
        padded[big // 2] = 0.5 * coef[big // 2]
        padded[out_len - big // 2] = 0.5 * coef[big // 2]
    res = np.fft.ifft(padded).real * (out_len / big)
    return res[:m]


def squared_coefficients(values, twisted: bool = False) -> np.ndarray:
    """Fourier coefficients (period 1) of v^2, computed without aliasing."""
    values = np.asarray(values, dtype=float)
    n = values.size
    fine = resample(values, 2 * n, twisted)
    return np.fft.fft(fine * fine) / fine.size


class Interpolant:
    """Evaluate the trigonometric interpolant of uniform samples anywhere.

    The samples are first refined by FFT onto a grid UPSAMPLE times finer;
    point values then come from local Lagrange interpolation on STENCIL
    neighbours of that grid, which is accurate to rounding level for the
    smooth signals handled here.
    """

    def __init__(self, values, twisted: bool = False):
        values = np.asarray(values, dtype=float)
        self.n = values.size
        self.twisted = bool(twisted)
        self.period = 2.0 if twisted else 1.0
        m = UPSAMPLE * self.n
        fine = resample(values, m, twisted)
        full = cover(fine, twisted)
        self._h = self.period / full.size
        self._data = full
        j = np.arange(STENCIL)
        w = np.array([(-1.0) ** i * math.comb(STENCIL - 1, i) for i in j])
        self._weights = w
        self._offsets = j - (STENCIL // 2 - 1)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        flat = np.mod(x.ravel(), self.period)
        u = flat / self._h
        base = np.floor(u).astype(np.int64)
        frac = u - base
        vals = self._data[np.mod(base[:, None] + self._offsets[None, :], self._data.size)]
        diff = frac[:, None] - self._offsets[None, :]
        exact = diff == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            c = self._weights[None, :] / diff
            out = (c * vals).sum(axis=1) / c.sum(axis=1)
        hit = exact.any(axis=1)
        if hit.any():
            out[hit] = vals[hit][exact[hit]]
        return out.reshape(x.shape)
