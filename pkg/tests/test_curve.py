import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinkerlab import curve, fourier


def test_fourier_diff_trig():
    n, L = 64, 3.0
    x = np.arange(n) * L / n
    f = np.sin(2 * np.pi * 3 * x / L)
    k = 2 * np.pi * 3 / L
    assert np.max(np.abs(fourier.diff(f, L) - k * np.cos(k * x))) < 1e-12
    assert np.max(np.abs(fourier.diff(f, L, order=2) + k * k * f)) < 1e-10


def test_diff_matrix_skew_and_matches_fft():
    n, L = 32, 5.0
    D = fourier.diff_matrix(n, L)
    assert np.max(np.abs(D + D.T)) < 1e-13
    f = np.exp(np.sin(2 * np.pi * np.arange(n) / n))
    assert np.max(np.abs(D @ f - fourier.diff(f, L))) < 1e-12


def test_staggered_derivative_and_half_shift():
    n, L = 48, 2 * np.pi
    x = np.arange(n) * L / n
    f = np.cos(3 * x) + 0.3 * np.sin(5 * x)
    D = fourier.staggered_diff_matrix(n, L)
    xh = x + L / (2 * n)
    assert np.max(np.abs(D @ f - (-3 * np.sin(3 * xh) + 1.5 * np.cos(5 * xh)))) < 1e-12
    assert np.max(np.abs(fourier.shift_half(f, L) - (np.cos(3 * xh) + 0.3 * np.sin(5 * xh)))) < 1e-12


def test_antiderivative_evaluate_and_modes():
    n, L = 64, 4.0
    x = np.arange(n) * L / n
    w = 2 * np.pi / L
    f = np.cos(w * x)
    assert np.max(np.abs(fourier.antiderivative(f, L) - np.sin(w * x) / w)) < 1e-12
    pts = np.array([0.123, 1.7, 3.99])
    assert np.max(np.abs(fourier.evaluate(f, L, pts) - np.cos(w * pts))) < 1e-12
    amps = fourier.mode_amplitudes(2.0 + 0.5 * np.cos(2 * w * x), 4)
    assert amps == pytest.approx([2.0, 0.0, 0.5, 0.0], abs=1e-13)
    assert fourier.integrate(np.ones(n), L) == pytest.approx(L)


def test_circle_geometry():
    c = curve.circle(n=128)
    assert c.is_arclength
    assert c.length == pytest.approx(2 * math.pi * math.sqrt(2))
    assert c.rotation_index() == 1
    assert c.shrinker_residual() < 1e-12
    assert np.allclose(c.support_function(), math.sqrt(2))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 4.0))
def test_recomputed_circle_matches_closed_forms(r):
    t = np.arange(128) * 2 * np.pi / 128
    c = curve.ClosedCurve.from_positions(r * np.column_stack([np.cos(t), np.sin(t)]), 2 * np.pi)
    assert np.allclose(c.kappa, 1 / r, atol=1e-11)
    assert np.allclose(c.normal, np.column_stack([np.cos(t), np.sin(t)]), atol=1e-12)
    assert c.shrinker_residual() == pytest.approx(abs(r / 2 - 1 / r), abs=1e-10)
    assert c.integrate(c.weight) == pytest.approx(r * math.sqrt(math.pi) * math.exp(-r * r / 4), rel=1e-12)


def test_ellipse_curvature():
    a, b, n = 2.0, 1.0, 256
    t = np.arange(n) * 2 * np.pi / n
    c = curve.ClosedCurve.from_positions(np.column_stack([a * np.cos(t), b * np.sin(t)]), 2 * np.pi)
    exact = a * b / (a * a * np.sin(t) ** 2 + b * b * np.cos(t) ** 2) ** 1.5
    assert np.max(np.abs(c.kappa - exact)) < 1e-10
    assert c.total_turning() == pytest.approx(2 * np.pi, abs=1e-12)


def test_clockwise_curve_has_negative_turning():
    t = np.arange(64) * 2 * np.pi / 64
    c = curve.ClosedCurve.from_positions(np.column_stack([np.cos(t), -np.sin(t)]), 2 * np.pi)
    assert c.rotation_index() == -1


def test_from_positions_validation():
    with pytest.raises(ValueError):
        curve.ClosedCurve.from_positions(np.zeros((10, 3)), 1.0)
    with pytest.raises(ValueError):
        curve.ClosedCurve.from_positions(np.zeros((9, 2)), 1.0)
    with pytest.raises(ValueError):
        curve.ClosedCurve.from_positions(np.zeros((8, 2)), 1.0)


def test_csv_round_trip(tmp_path, al23):
    path = tmp_path / "c.csv"
    curve.write_csv(al23, path, header={"c": al23.weight_constant})
    back = curve.read_csv(path)
    assert back.n == al23.n and back.period == pytest.approx(al23.period, rel=1e-15)
    assert np.array_equal(back.kappa, al23.kappa)
    assert np.max(np.abs(back.positions - al23.positions)) == 0.0
    assert back.shrinker_residual() < 1e-12
    assert back.meta["p"] == 2


def test_csv_missing_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2,3\n")
    with pytest.raises(ValueError):
        curve.read_csv(path)
