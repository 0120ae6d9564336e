import os
import subprocess
import sys

import numpy as np
import pytest

from shrinkerlab import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def test_composition_consistent():
    assert _kernels.COMPOSITION.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(_kernels.COMPOSITION, _kernels.COMPOSITION[::-1])


@needs_numba
def test_propagate_paths_agree():
    w = np.log(np.array([0.9, 1.4, 2.5]))
    z = np.zeros(3)
    a = _kernels.propagate(w, z, z, 1e-3, 3000, 100, use_numba=False)
    b = _kernels.propagate(w, z, z, 1e-3, 3000, 100, use_numba=True)
    assert a.shape == b.shape == (3, 3, 31)
    assert np.max(np.abs(a - b)) < 1e-12


@needs_numba
def test_advance_to_turn_paths_agree():
    w = np.log(np.array([1.0, 2.0]))
    z = np.zeros(2)
    a = _kernels.advance_to_turn(w, z, z, 1e-3, 10**6, use_numba=False)
    b = _kernels.advance_to_turn(w, z, z, 1e-3, 10**6, use_numba=True)
    assert np.array_equal(a[3], b[3]) and np.all(a[4]) and np.all(b[4])
    for x, y in zip(a[:3], b[:3]):
        assert np.max(np.abs(x - y)) < 1e-12


@needs_numba
def test_quadform_paths_agree():
    rng = np.random.default_rng(0)
    v = rng.standard_normal((50, 9))
    m = rng.standard_normal((9, 9))
    ref = np.einsum("ki,ij,kj->k", v, m, v)
    assert np.allclose(_kernels.quadform(v, m, use_numba=False), ref, rtol=1e-13)
    assert np.allclose(_kernels.quadform(v, m, use_numba=True), ref, rtol=1e-13)


def test_env_flag_selects_numpy_path():
    code = "from shrinkerlab import _kernels, alcurve; print(_kernels.USE_NUMBA, alcurve.half_period(1.5)[1])"
    env = dict(os.environ, SHRINKERLAB_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    flag, value = out.stdout.split()
    assert flag == "False"
    from shrinkerlab import alcurve

    assert float(value) == pytest.approx(alcurve.half_period(1.5)[1], abs=1e-12)
