import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shrinkerlab import obstruction as ob

CIRCLE_F = math.sqrt(2 * math.pi) * math.exp(-0.5)
CIRCLE = ob.CrossSectionInvariants(CIRCLE_F, -CIRCLE_F / 8, (1, 2, 1), "circle")


def test_quadcoeffs_symmetry_enforced():
    with pytest.raises(ValueError):
        ob.QuadCoeffs(np.array([[1.0, 2.0], [0.0, 1.0]]))
    c = ob.QuadCoeffs.symmetrized([[1.0, 2.0], [0.0, 1.0]])
    assert np.array_equal(c.a, c.a.T) and c.a[0, 1] == 1.0
    with pytest.raises(ValueError):
        ob.CrossSectionInvariants(0.0, -1.0)


def test_jacobi_norm_examples():
    assert ob.jacobi_norm(ob.QuadCoeffs(np.zeros((2, 2))), CIRCLE) == 0.0
    unit = ob.CrossSectionInvariants(1.0, -1.0)
    assert ob.jacobi_norm(ob.QuadCoeffs([[1.0]]), unit) == 8.0
    assert ob.jacobi_norm(ob.QuadCoeffs(np.eye(2)), CIRCLE) == pytest.approx(24.325550417060496, rel=1e-14)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_jacobi_norm_quadrature(dim):
    rng = np.random.default_rng(dim)
    for a in ob.random_symmetric(rng, 20, dim):
        c = ob.QuadCoeffs(a)
        assert ob.jacobi_norm_quadrature(c, CIRCLE) == pytest.approx(ob.jacobi_norm(c, CIRCLE), rel=1e-10)


def test_closedform_examples():
    assert ob.quadratic_projection_closedform(ob.QuadCoeffs(np.zeros((1, 1))), 0, CIRCLE) == 0.0
    assert ob.quadratic_projection_closedform(ob.QuadCoeffs([[1.0]]), 0, CIRCLE) == pytest.approx(
        -24.325550417060496, rel=1e-14)
    with pytest.raises(IndexError):
        ob.quadratic_projection_closedform(ob.QuadCoeffs([[1.0]]), 1, CIRCLE)


def test_bruteforce_examples():
    assert ob.quadratic_projection_bruteforce(ob.QuadCoeffs([[1.0]]), 0) == 64.0
    assert ob.quadratic_projection_bruteforce(ob.QuadCoeffs([[3.0]]), 0) == 576.0
    off = ob.QuadCoeffs([[0.0, 1.0], [1.0, 0.0]])
    assert ob.quadratic_projection_bruteforce(off, 0) == 64.0
    assert ob.quadratic_projection_bruteforce(off, 1) == 64.0


def test_moment_tensor_integer_and_symmetric():
    m = ob.moment_tensor(3, 1)
    assert m.dtype == np.int64 and np.array_equal(m, m.T)
    with pytest.raises(ValueError):
        ob.moment_tensor(7, 0)
    with pytest.raises(IndexError):
        ob.moment_tensor(2, 2)


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_bruteforce_identity_ensemble(dim):
    a = ob.random_symmetric(np.random.default_rng(10 + dim), 1000, dim)
    for b in range(dim):
        ib = ob.bruteforce_batch(a, b)
        target = 64.0 * np.sum(a[:, b, :] ** 2, axis=1)
        assert np.max(np.abs(ib - target) / (1 + target)) < 1e-10


def test_bruteforce_matches_closedform_times_2B1():
    c = ob.QuadCoeffs(ob.random_symmetric(np.random.default_rng(3), 1, 3)[0])
    for b in range(3):
        assert 2 * CIRCLE.B1 * ob.quadratic_projection_bruteforce(c, b) == pytest.approx(
            ob.quadratic_projection_closedform(c, b, CIRCLE), rel=1e-12)


def test_lower_bound_equality_dim1():
    lhs, rhs = ob.obstruction_lower_bound(ob.QuadCoeffs([[-2.5]]), CIRCLE)
    assert abs(lhs / rhs - 1) < 1e-12


def test_lower_bound_diag_ratio_sqrt2():
    lhs, rhs = ob.obstruction_lower_bound(ob.QuadCoeffs(np.diag([1.0, 0.0])), CIRCLE)
    assert lhs / rhs == pytest.approx(math.sqrt(2), rel=1e-12)


def test_lower_bound_equal_row_norms_attain_equality():
    lhs, rhs = ob.obstruction_lower_bound(ob.QuadCoeffs(np.eye(3)), CIRCLE)
    assert lhs / rhs == pytest.approx(1.0, rel=1e-12)


def test_lower_bound_degenerate():
    with pytest.raises(ob.DegenerateInputError):
        ob.obstruction_lower_bound(ob.QuadCoeffs(np.zeros((2, 2))), CIRCLE)


sym = st.integers(1, 4).flatmap(lambda d: arrays(np.float64, (d, d), elements=st.floats(-10, 10)))


@settings(max_examples=60, deadline=None)
@given(sym, st.floats(0.1, 5.0))
def test_lower_bound_and_homogeneity(a, t):
    c = ob.QuadCoeffs.symmetrized(a)
    if not np.any(c.a):
        return
    lhs, rhs = ob.obstruction_lower_bound(c, CIRCLE)
    assert lhs >= rhs * (1 - 1e-12)
    ct = ob.QuadCoeffs(t * c.a)
    assert ob.jacobi_norm(ct, CIRCLE) == pytest.approx(t * t * ob.jacobi_norm(c, CIRCLE), rel=1e-12)
    for b in range(c.dim):
        assert ob.quadratic_projection_bruteforce(ct, b) == pytest.approx(
            t * t * ob.quadratic_projection_bruteforce(c, b), rel=1e-10, abs=1e-9)


def test_sphere_invariants():
    s1 = ob.sphere_invariants(1)
    assert s1.lam == pytest.approx(CIRCLE_F, rel=1e-14)
    assert s1.B1 == pytest.approx(-CIRCLE_F / 8, rel=1e-14)
    s2 = ob.sphere_invariants(2)
    assert s2.lam == pytest.approx(4 / math.e, rel=1e-14)
    assert s2.B1 == pytest.approx(-s2.lam / 32, rel=1e-14)


def test_invariants_from_curve(al23):
    inv = ob.CrossSectionInvariants.from_curve(al23)
    assert inv.B1 < 0 and inv.lam > 0


def test_ensemble_report_deterministic():
    a = ob.ensemble_json(ob.run_ensemble(CIRCLE, dims=(1, 2), count=50, seed=4))
    b = ob.ensemble_json(ob.run_ensemble(CIRCLE, dims=(1, 2), count=50, seed=4))
    assert a == b and '"passed": true' in a


@pytest.mark.parametrize("scale", [1e-150, 8.6e-81, 1e120])
def test_lower_bound_extreme_scales(scale):
    lhs, rhs = ob.obstruction_lower_bound(ob.QuadCoeffs(np.full((3, 3), scale)), CIRCLE)
    assert lhs / rhs == pytest.approx(1.0, abs=1e-12)
