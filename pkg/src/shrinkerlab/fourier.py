"""Periodic Fourier collocation helpers on uniform grids of length ``period``."""

import numpy as np


def wavenumbers(n, period):
    return 2.0 * np.pi / period * np.fft.fftfreq(n, d=1.0 / n)


def diff(f, period, order=1):
    """Spectral derivative of periodic samples along the last axis.

    The Nyquist mode is dropped for odd orders so the result stays real and the
    operator stays skew-adjoint.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    k = wavenumbers(n, period)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0
    return np.fft.ifft(np.fft.fft(f, axis=-1) * mult, axis=-1).real


def diff_matrix(n, period):
    """Dense first-derivative matrix; exactly skew-symmetric for even ``n``."""
    if n % 2:
        raise ValueError("diff_matrix requires an even number of points")
    h = 2.0 * np.pi / n
    j = np.arange(1, n)
    col = np.zeros(n)
    col[1:] = 0.5 * (-1.0) ** j / np.tan(j * h / 2.0)
    # circulant with first column col: D[i, k] = col[(i - k) % n]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx] * (2.0 * np.pi / period)


def integrate(f, period):
    """Trapezoid rule over one period (spectrally accurate for smooth data)."""
    f = np.asarray(f, dtype=float)
    return f.sum(axis=-1) * (period / f.shape[-1])


def antiderivative(f, period):
    """Zero-mean antiderivative of the zero-mean part of ``f``."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    k = wavenumbers(n, period)
    fh = np.fft.fft(f, axis=-1)
    out = np.zeros_like(fh)
    nz = k != 0
    out[..., nz] = fh[..., nz] / (1j * k[nz])
    if n % 2 == 0:
        out[..., n // 2] = 0.0
    return np.fft.ifft(out, axis=-1).real


def evaluate(f, period, points):
    """Trigonometric interpolant of the samples ``f`` evaluated at ``points``."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    fh = np.fft.fft(f) / n
    k = wavenumbers(n, period)
    if n % 2 == 0:
        fh = fh.copy()
        fh[n // 2] *= 0.5
        fh = np.append(fh, fh[n // 2])
        k = np.append(k, -k[n // 2])
    pts = np.asarray(points, dtype=float)
    return (np.exp(1j * np.multiply.outer(pts, k)) @ fh).real


def mode_amplitudes(f, count):
    """Amplitudes ``|a_j cos + b_j sin|`` for j = 0..count-1 (j = 0 is the mean)."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    fh = np.fft.rfft(f) / n
    amps = 2.0 * np.abs(fh[:count])
    amps[0] = fh[0].real
    return amps


def staggered_diff_matrix(n, period):
    """Derivative from grid points to half points ``x_j + h/2``.

    The half-to-grid derivative is minus the transpose, and unlike the
    collocated matrix the Nyquist mode is not annihilated.
    """
    k = wavenumbers(n, period)
    h = period / n
    mult = 1j * k * np.exp(0.5j * k * h)
    return np.fft.ifft(np.fft.fft(np.eye(n), axis=0) * mult[:, None], axis=0).real


def shift_half(f, period):
    """Interpolate periodic samples to the half points ``x_j + h/2``."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    k = wavenumbers(n, period)
    mult = np.exp(0.5j * k * period / n)
    if n % 2 == 0:
        mult[n // 2] = 0.0
    return np.fft.ifft(np.fft.fft(f, axis=-1) * mult, axis=-1).real
