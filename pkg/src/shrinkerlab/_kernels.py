"""Hot inner loops, compiled with numba when available.

Set ``SHRINKERLAB_DISABLE_NUMBA=1`` to force the pure-numpy path. Both paths
implement the same arithmetic and are compared in ``benchmarks/``.
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SHRINKERLAB_DISABLE_NUMBA", "") in ("", "0")

# Yoshida's 6th-order symmetric composition of Stormer-Verlet (solution A).
_Y1 = -1.17767998417887
_Y2 = 0.235573213359357
_Y3 = 0.784513610477560
_Y0 = 1.0 - 2.0 * (_Y1 + _Y2 + _Y3)
COMPOSITION = np.array([_Y3, _Y2, _Y1, _Y0, _Y1, _Y2, _Y3])
ORDER = 6


def _verlet(w, p, th, tau):
    # Kick-drift-kick for w'' = 1/2 - exp(2w), carrying theta' = exp(w) in the kicks.
    half = 0.5 * tau
    ew = np.exp(w)
    p = p + half * (0.5 - ew * ew)
    th = th + half * ew
    w = w + tau * p
    ew = np.exp(w)
    p = p + half * (0.5 - ew * ew)
    th = th + half * ew
    return w, p, th


def _step(w, p, th, tau, coeffs):
    for c in coeffs:
        w, p, th = _verlet(w, p, th, c * tau)
    return w, p, th


def _propagate_numpy(w, p, th, tau, nsteps, record_every):
    nrec = nsteps // record_every + 1
    out = np.empty((3, w.shape[0], nrec))
    w = w.copy()
    p = p.copy()
    th = th.copy()
    out[0, :, 0], out[1, :, 0], out[2, :, 0] = w, p, th
    for k in range(1, nsteps + 1):
        w, p, th = _step(w, p, th, tau, COMPOSITION)
        if k % record_every == 0:
            j = k // record_every
            out[0, :, j], out[1, :, j], out[2, :, j] = w, p, th
    return out


def _advance_to_turn_numpy(w, p, th, tau, maxsteps):
    # Step each trajectory until p first becomes positive after the start
    # (the kappa minimum); return the last state with p <= 0 and its step count.
    w = w.copy()
    p = p.copy()
    th = th.copy()
    count = np.zeros(w.shape[0], dtype=np.int64)
    active = np.ones(w.shape[0], dtype=bool)
    for _ in range(maxsteps):
        if not active.any():
            break
        wn, pn, thn = _step(w[active], p[active], th[active], tau, COMPOSITION)
        crossed = pn > 0.0
        idx = np.flatnonzero(active)
        keep = idx[~crossed]
        w[keep], p[keep], th[keep] = wn[~crossed], pn[~crossed], thn[~crossed]
        count[keep] += 1
        active[idx[crossed]] = False
    return w, p, th, count, ~active


def _quadform_numpy(vecs, mat):
    return np.einsum("ni,ij,nj->n", vecs, mat, vecs)


if HAVE_NUMBA:

    @numba.njit(cache=True)
    def _step_scalar(w, p, th, tau, coeffs):
        for c in coeffs:
            t = c * tau
            half = 0.5 * t
            ew = np.exp(w)
            p += half * (0.5 - ew * ew)
            th += half * ew
            w += t * p
            ew = np.exp(w)
            p += half * (0.5 - ew * ew)
            th += half * ew
        return w, p, th

    @numba.njit(cache=True)
    def _propagate_numba(w, p, th, tau, nsteps, record_every):
        nrec = nsteps // record_every + 1
        out = np.empty((3, w.shape[0], nrec))
        for i in range(w.shape[0]):
            wi, pi, ti = w[i], p[i], th[i]
            out[0, i, 0], out[1, i, 0], out[2, i, 0] = wi, pi, ti
            for k in range(1, nsteps + 1):
                wi, pi, ti = _step_scalar(wi, pi, ti, tau, COMPOSITION)
                if k % record_every == 0:
                    j = k // record_every
                    out[0, i, j], out[1, i, j], out[2, i, j] = wi, pi, ti
        return out

    @numba.njit(cache=True)
    def _advance_to_turn_numba(w, p, th, tau, maxsteps):
        n = w.shape[0]
        wo, po, to = w.copy(), p.copy(), th.copy()
        count = np.zeros(n, dtype=np.int64)
        done = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            wi, pi, ti = w[i], p[i], th[i]
            for _ in range(maxsteps):
                wn, pn, tn = _step_scalar(wi, pi, ti, tau, COMPOSITION)
                if pn > 0.0:
                    done[i] = True
                    break
                wi, pi, ti = wn, pn, tn
                count[i] += 1
            wo[i], po[i], to[i] = wi, pi, ti
        return wo, po, to, count, done

    @numba.njit(cache=True)
    def _quadform_numba(vecs, mat):
        n, d = vecs.shape
        out = np.zeros(n)
        for k in range(n):
            acc = 0.0
            for i in range(d):
                vi = vecs[k, i]
                if vi == 0.0:
                    continue
                row = 0.0
                for j in range(d):
                    row += mat[i, j] * vecs[k, j]
                acc += vi * row
            out[k] = acc
        return out


def propagate(w, p, th, tau, nsteps, record_every=1, use_numba=None):
    """Integrate a batch of (w, w', theta) states for ``nsteps`` composition steps.

    Returns an array of shape ``(3, batch, nsteps // record_every + 1)``.
    """
    w, p, th = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (w, p, th))
    if _pick(use_numba):
        return _propagate_numba(w, p, th, float(tau), int(nsteps), int(record_every))
    return _propagate_numpy(w, p, th, float(tau), int(nsteps), int(record_every))


def advance_to_turn(w, p, th, tau, maxsteps, use_numba=None):
    """Step until w' turns positive; returns (w, p, th, steps, found)."""
    w, p, th = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (w, p, th))
    if _pick(use_numba):
        return _advance_to_turn_numba(w, p, th, float(tau), int(maxsteps))
    return _advance_to_turn_numpy(w, p, th, float(tau), int(maxsteps))


def single_step(w, p, th, tau):
    """One composition step of arbitrary (possibly partial) size ``tau``."""
    return _step(w, p, th, tau, COMPOSITION)


def quadform(vecs, mat, use_numba=None):
    """Evaluate ``v^T M v`` for every row ``v`` of ``vecs``."""
    vecs = np.ascontiguousarray(vecs, dtype=float)
    mat = np.ascontiguousarray(mat, dtype=float)
    if _pick(use_numba):
        return _quadform_numba(vecs, mat)
    return _quadform_numpy(vecs, mat)


def _pick(use_numba):
    if use_numba is None:
        return USE_NUMBA
    if use_numba and not HAVE_NUMBA:
        raise RuntimeError("numba requested but not installed")
    return bool(use_numba)
