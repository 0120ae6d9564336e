"""Spectra of the drift Laplacian and Jacobi operator on closed shrinker curves.

Sign convention: ``L psi = mu psi``. On a shrinker curve the dilation field
``kappa`` has ``mu = 1``, translations ``<e_i, N>`` have ``mu = 1/2`` and the
rotation field ``kappa'/kappa`` has ``mu = 0``; coordinates satisfy
``Ldrift x_i = -x_i / 2``.

Both operators are discretized in conservative flux form with a spectral
staggered derivative: ``kappa * D_hg diag(1/kappa_half) D_gh``. With the
weight ``rho h = c h / kappa`` the weighted matrix is exactly symmetric and
annihilates constants.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import subspace_angles

from . import fourier

DRIFT = "drift_laplacian"
JACOBI = "jacobi"
SHRINKER_TOL = 1e-6
IDENTITY_TOL = 1e-5
ANGLE_TOL = 1e-5


class NotAShrinkerError(ValueError):
    pass


class EigenSolveError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    kind: str
    curve: object
    matrix: np.ndarray
    weight_vector: np.ndarray

    def __call__(self, f):
        return self.matrix @ np.asarray(f, dtype=float)

    def weighted_matrix(self):
        return self.weight_vector[:, None] * self.matrix

    def symmetry_defect(self):
        wm = self.weighted_matrix()
        return float(np.max(np.abs(wm - wm.T)) / np.max(np.abs(wm)))

    def norm(self, f):
        return float(np.sqrt(np.sum(self.weight_vector * np.asarray(f) ** 2)))


def build_operator(curve, kind):
    """Drift Laplacian ``kappa d(kappa^-1 d)`` or Jacobi operator (adds ``kappa^2 + 1/2``)."""
    if kind not in (DRIFT, JACOBI):
        raise ValueError(f"unknown operator kind {kind!r}")
    if not curve.is_arclength:
        raise ValueError("operator requires a uniform arclength grid")
    if np.any(curve.kappa <= 0):
        raise ValueError("operator requires kappa > 0")
    n, L = curve.n, curve.period
    dgh = fourier.staggered_diff_matrix(n, L)
    inv_half = 1.0 / fourier.shift_half(curve.kappa, L)
    flux = dgh.T @ (inv_half[:, None] * dgh)
    mat = -curve.kappa[:, None] * flux
    if kind == JACOBI:
        mat = mat + np.diag(curve.kappa**2 + 0.5)
    weight = curve.weight_constant * curve.du / curve.kappa
    return DiscreteOperator(kind, curve, mat, weight)


@dataclass(frozen=True, eq=False)
class EigenPair:
    eigenvalue: float
    eigenfunction: np.ndarray
    residual: float


@dataclass(frozen=True)
class Cluster:
    value: float
    multiplicity: int
    indices: tuple


def eigensolve(op, count):
    """Leading ``count`` eigenpairs sorted by eigenvalue, descending."""
    n = op.matrix.shape[0]
    if count > n:
        raise ValueError(f"count={count} exceeds grid size {n}")
    s = np.sqrt(op.weight_vector)
    sym = s[:, None] * op.matrix / s[None, :]
    sym = 0.5 * (sym + sym.T)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigenSolveError(f"eigh failed on {n}x{n} {op.kind} matrix: {exc}") from exc
    order = np.argsort(vals)[::-1][:count]
    pairs = []
    for i in order:
        psi = vecs[:, i] / s
        mu = float(vals[i])
        pairs.append(EigenPair(mu, psi, op.norm(op(psi) - mu * psi)))
    return pairs


def cluster(eigenvalues, tol=None):
    """Group consecutive (descending) eigenvalues closer than ``tol``.

    The default gap tolerance is ``1e-6`` times the width of the given list.
    """
    ev = np.asarray(eigenvalues, dtype=float)
    if tol is None:
        tol = 1e-6 * max(1.0, float(ev.max() - ev.min()))
    groups = []
    start = 0
    for i in range(1, len(ev) + 1):
        if i == len(ev) or abs(ev[i] - ev[i - 1]) > tol:
            idx = tuple(range(start, i))
            groups.append(Cluster(float(np.mean(ev[start:i])), len(idx), idx))
            start = i
    return groups


def sphere_spectrum(k, count):
    """Eigenvalues ``j (j + k - 1) / (2k)`` of ``-Laplacian`` on the shrinking sphere of radius sqrt(2k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    j = np.arange(count)
    return [float(v) for v in j * (j + k - 1) / (2.0 * k)]


def _require_shrinker(curve):
    res = curve.shrinker_residual()
    if res > SHRINKER_TOL:
        raise NotAShrinkerError(f"shrinker residual {res:.3e} > {SHRINKER_TOL}; assumption check is meaningless")


def _rel(op, resid, ref):
    return op.norm(resid) / op.norm(ref)


def _cluster_near(clusters, target, tol):
    for c in clusters:
        if abs(c.value - target) <= tol:
            return c
    return None


@dataclass
class A1Report:
    passed: bool
    coordinate_residuals: list
    cluster_dimension: int
    subspace_angle: float
    spectrum_head: list


@dataclass
class A2Report:
    passed: bool
    identity_residuals: dict
    multiplicities: dict
    expected: dict
    other_eigenvalues: list
    spectrum_head: list


@dataclass
class AssumptionReport:
    a1: A1Report
    a2: A2Report
    meta: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.a1.passed and self.a2.passed

    def to_dict(self):
        return {"a1": asdict(self.a1), "a2": asdict(self.a2), "meta": self.meta, "passed": self.passed}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def verify_A1(curve, count=12, tol=IDENTITY_TOL):
    """Coordinates solve ``Ldrift x = -x/2`` and span the whole ``-1/2`` eigenspace."""
    _require_shrinker(curve)
    op = build_operator(curve, DRIFT)
    x = curve.positions
    residuals = [_rel(op, op(x[:, i]) + 0.5 * x[:, i], x[:, i]) for i in range(2)]
    pairs = eigensolve(op, count)
    vals = [p.eigenvalue for p in pairs]
    clusters = cluster(vals)
    gap = 1e-6 * max(1.0, max(vals) - min(vals))
    c = _cluster_near(clusters, -0.5, gap)
    dim = c.multiplicity if c else 0
    angle = float("inf")
    if c is not None:
        s = np.sqrt(op.weight_vector)[:, None]
        eig = np.column_stack([pairs[i].eigenfunction for i in c.indices]) * s
        angle = float(np.max(subspace_angles(eig, x * s)))
    passed = all(r <= tol for r in residuals) and dim == 2 and angle <= ANGLE_TOL
    return A1Report(passed, residuals, dim, angle, vals)


def verify_A2(curve, count=16, tol=IDENTITY_TOL):
    """Jacobi identities and multiplicities at the half-integers 1, 1/2, 0.

    Expected multiplicities are ``{1: 1, 1/2: 2, 0: 1}`` on curves with
    ``kappa' != 0`` and ``{1: 1, 1/2: 2}`` on the circle, where 0 is not an
    eigenvalue. Other eigenvalues inside ``[0, 1]`` are reported, not failed.
    """
    _require_shrinker(curve)
    op = build_operator(curve, JACOBI)
    k = curve.kappa
    round_circle = bool(np.max(np.abs(curve.kappa_dot)) < 1e-12)
    resid = {"dilation": _rel(op, op(k) - k, k)}
    for i in range(2):
        nu = curve.normal[:, i]
        resid[f"translation_{i + 1}"] = _rel(op, op(nu) - 0.5 * nu, nu)
    if not round_circle:
        rot = curve.kappa_dot / k
        resid["rotation"] = _rel(op, op(rot), rot)
    pairs = eigensolve(op, count)
    vals = [p.eigenvalue for p in pairs]
    clusters = cluster(vals)
    gap = 1e-6 * max(1.0, max(vals) - min(vals))
    expected = {"1": 1, "0.5": 2} if round_circle else {"1": 1, "0.5": 2, "0": 1}
    mult = {}
    for key, target in (("1", 1.0), ("0.5", 0.5), ("0", 0.0)):
        c = _cluster_near(clusters, target, gap)
        mult[key] = c.multiplicity if c else 0
    halfints = np.arange(0.0, vals[0] + 0.5 + gap, 0.5)
    others = [v for v in vals if -gap <= v <= 1.0 + gap and np.min(np.abs(halfints - v)) > gap]
    stray = [v for v in vals if v > 1.0 + gap]
    passed = (
        all(r <= tol for r in resid.values())
        and all(mult[key] == m for key, m in expected.items())
        and (round_circle is False or mult["0"] == 0)
        and not stray
    )
    return A2Report(passed, resid, mult, expected, others, vals)


def verify_assumptions(curve):
    return AssumptionReport(verify_A1(curve), verify_A2(curve), meta=dict(curve.meta))


def spectrum_report(op, count):
    pairs = eigensolve(op, count)
    vals = [p.eigenvalue for p in pairs]
    return {
        "kind": op.kind,
        "n": int(op.matrix.shape[0]),
        "eigenvalues": vals,
        "residuals": [p.residual for p in pairs],
        "clusters": [{"value": c.value, "multiplicity": c.multiplicity} for c in cluster(vals)],
        "symmetry_defect": op.symmetry_defect(),
    }


def write_eigenfunctions_csv(path, curve, pairs):
    cols = [curve.param] + [p.eigenfunction for p in pairs]
    head = "sigma," + ",".join(f"psi{i}" for i in range(len(pairs)))
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=head, comments="", fmt="%.17g")
