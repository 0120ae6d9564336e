import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc

from shrinkerlab import gauss


@pytest.mark.parametrize(
    "alpha, value",
    [((0,), 1), ((2,), 2), ((4,), 12), ((6,), 120), ((2, 2), 4), ((4, 2), 24), ((2, 2, 2), 8)],
)
def test_moment_table_exact(alpha, value):
    got = gauss.gaussian_moment(alpha)
    assert isinstance(got, Fraction)
    assert got == value
    assert gauss.MOMENT_TABLE[alpha] == value


def test_odd_entry_vanishes():
    assert gauss.gaussian_moment((1, 2)) == 0
    assert gauss.gaussian_moment_gamma((3,)) == 0.0


@given(st.lists(st.integers(0, 5), min_size=1, max_size=3))
def test_exact_matches_gamma_formula(entries):
    exact = float(gauss.gaussian_moment(entries))
    assert gauss.gaussian_moment_gamma(entries) == pytest.approx(exact, rel=1e-13, abs=0)


@given(st.permutations([4, 2, 0]))
def test_moment_permutation_invariant(perm):
    assert gauss.gaussian_moment(perm) == 24


def test_multiindex_validation():
    mi = gauss.MultiIndex((2, 0, 4))
    assert mi.degree == 6 and mi.dimension == 3 and mi.canonical() == (4, 2)
    with pytest.raises(ValueError):
        gauss.MultiIndex((1, -1))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_rule_normalized_and_positive(m):
    rule = gauss.gauss_hermite_rule(m, 8)
    assert np.all(rule.weights > 0)
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert rule.degree >= 8


@pytest.mark.parametrize("m", [1, 2, 3])
def test_quadrature_agrees_with_exact(m):
    rule = gauss.gauss_hermite_rule(m, 8)
    for alpha in itertools.product(range(9), repeat=m):
        if sum(alpha) % 2 or sum(alpha) > 8:
            continue
        exact = float(gauss.gaussian_moment(alpha))
        assert abs(gauss.moment_by_quadrature(alpha, rule) - exact) <= 1e-10 * max(1.0, exact)


@pytest.mark.parametrize("alpha, value", [((0,), 1.0), ((4,), 12.0), ((6,), 120.0)])
def test_quadrature_examples(alpha, value):
    rule = gauss.gauss_hermite_rule(1, 6)
    assert gauss.moment_by_quadrature(alpha, rule) == pytest.approx(value, rel=1e-12)


def test_quadrature_refuses_low_degree_and_mismatch():
    with pytest.raises(gauss.InsufficientDegreeError):
        gauss.moment_by_quadrature((6,), gauss.gauss_hermite_rule(1, 4))
    with pytest.raises(gauss.InsufficientDegreeError):
        gauss.moment_by_quadrature((2,), gauss.uniform_grid_rule(1))
    with pytest.raises(ValueError):
        gauss.moment_by_quadrature((2, 2), gauss.gauss_hermite_rule(1, 4))


def test_cutoff_tail_erfc_closed_form():
    assert gauss.cutoff_tail(1, 0, 2.0) == pytest.approx(2.0 * math.sqrt(math.pi) * erfc(1.0), rel=1e-13)


def test_cutoff_tail_matches_radial_quadrature():
    from scipy.integrate import quad

    for n, m, R in [(2, 3, 1.5), (3, 6, 4.0), (1, 2, 7.0)]:
        radial, _ = quad(lambda r: r ** (m + n - 1) * math.exp(-r * r / 4), R, np.inf, epsabs=0, epsrel=1e-13)
        assert gauss.cutoff_tail(n, m, R) == pytest.approx(gauss.sphere_area(n - 1) * radial, rel=1e-10)


def test_cutoff_tail_domain_errors():
    with pytest.raises(ValueError):
        gauss.cutoff_tail(1, 0, 0.5)
    with pytest.raises(ValueError):
        gauss.cutoff_tail(0, 0, 2.0)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", range(7))
def test_cutoff_tail_decreasing_and_ratio_bounded(n, m):
    radii = np.linspace(1.0, 10.0, 200)
    tails = np.array([gauss.cutoff_tail(n, m, r) for r in radii])
    assert np.all(np.diff(tails) < 0)
    ratio = gauss.cutoff_ratio(n, m, radii)
    assert np.all(np.isfinite(ratio))
    assert np.all(np.diff(ratio[radii >= 5.0]) <= 0)
    assert gauss.cutoff_constant(n, m) == pytest.approx(ratio.max(), rel=0.05)


def test_poincare_anchors():
    rule = gauss.gauss_hermite_rule(1, 6)
    y = rule.nodes[:, 0]
    assert gauss.gaussian_poincare_check(np.ones_like(y), np.zeros((y.size, 1)), rule) == pytest.approx((0.5, 1.0))
    assert gauss.gaussian_poincare_check(y, np.ones((y.size, 1)), rule) == pytest.approx((3.0, 6.0))
    assert gauss.gaussian_poincare_check(np.zeros_like(y), np.zeros((y.size, 1)), rule) == (0.0, 0.0)


def test_poincare_grid_mismatch():
    rule = gauss.gauss_hermite_rule(2, 4)
    with pytest.raises(ValueError):
        gauss.gaussian_poincare_check(np.ones(3), np.zeros((3, 2)), rule)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.floats(2.0, 8.0))
def test_poincare_random_bumps(coeffs, radius):
    rule = gauss.uniform_grid_rule(1, points=1601, half_width=radius)
    y = rule.nodes[:, 0]
    s = (y / radius) ** 2
    inside = s < 1
    b = np.zeros_like(y)
    db = np.zeros_like(y)
    b[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    db[inside] = -b[inside] / (1.0 - s[inside]) ** 2 * 2 * y[inside] / radius**2
    p = np.polyval(coeffs, y)
    dp = np.polyval(np.polyder(coeffs), y)
    lhs, rhs = gauss.gaussian_poincare_check(p * b, (dp * b + p * db)[:, None], rule)
    assert lhs <= rhs + 1e-14
