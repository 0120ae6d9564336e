"""Second-order obstruction on generalized cylinders ``Gamma x R^dim``.

A Jacobi field of the cylinder is ``U = u(y) H`` with the quadratic
polynomial ``u(y) = sum_ij a_ij (y_i y_j - 2 delta_ij)``. Its second
variation projected onto the mode ``(y_b^2 - 2) H`` equals ``2 B1 I_b`` with
``I_b = int u^2 (y_b^2 - 2) rho``, a Gaussian moment computation done here
by brute-force monomial expansion in exact integer arithmetic.
"""

import itertools
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .gauss import gauss_hermite_rule, gaussian_moment, sphere_area

MAX_EXACT_DIM = 6


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuadCoeffs:
    """Symmetric ``dim x dim`` coefficient matrix of the quadratic Jacobi polynomial."""

    a: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float, ndmin=2)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"coefficients must be a non-empty square matrix, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ValueError("coefficient matrix is not symmetric; use QuadCoeffs.symmetrized")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)

    @classmethod
    def symmetrized(cls, a):
        a = np.array(a, dtype=float, ndmin=2)
        return cls(0.5 * (a + a.T))

    @property
    def dim(self):
        return self.a.shape[0]

    def u(self, y):
        """Evaluate ``u`` at points ``y`` of shape ``(..., dim)``."""
        y = np.asarray(y, dtype=float)
        return np.einsum("...i,ij,...j->...", y, self.a, y) - 2.0 * np.trace(self.a)


@dataclass(frozen=True)
class CrossSectionInvariants:
    """Gaussian area ``lam`` and ``B1`` of a cross-section ``Gamma^k`` in ``R^n``."""

    lam: float
    B1: float
    codim_split: tuple = (1, 2, 1)
    name: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("Gaussian area must be positive")

    @classmethod
    def from_curve(cls, curve, dim=1, name=None):
        """Invariants of a closed planar shrinker curve; ``B1`` from the weighted route."""
        from .alcurve import compute_B1, gaussian_area

        routes = compute_B1(curve)
        return cls(
            lam=gaussian_area(curve),
            B1=routes.route_a,
            codim_split=(1, 2, dim),
            name=name or str(curve.meta.get("kind", "curve")),
            meta={"B1_spread": routes.spread()},
        )


def sphere_invariants(k, dim=1):
    """Round shrinking sphere ``S^k`` of radius ``sqrt(2k)`` in ``R^(k+1)``.

    ``lam = (4 pi)^(-k/2) e^(-k/2) |S^k_sqrt(2k)|`` and ``B1 = -lam / (8 k^2)``.
    """
    if k < 1:
        raise ValueError("sphere dimension must be >= 1")
    lam = (4.0 * math.pi) ** (-k / 2.0) * math.exp(-k / 2.0) * sphere_area(k, math.sqrt(2.0 * k))
    return CrossSectionInvariants(lam, -lam / (8.0 * k * k), (k, k + 1, dim), f"sphere{k}")


def jacobi_norm(coeffs, inv):
    """``||U||^2 = 8 lam sum_ij a_ij^2``."""
    return 8.0 * inv.lam * float(np.sum(coeffs.a**2))


def jacobi_norm_quadrature(coeffs, inv):
    """Independent value of :func:`jacobi_norm` by Gauss-Hermite quadrature of ``int u^2 rho``."""
    rule = gauss_hermite_rule(coeffs.dim, 4)
    return inv.lam * rule.integrate(coeffs.u(rule.nodes) ** 2)


def _check_row(coeffs, b):
    if not 0 <= b < coeffs.dim:
        raise IndexError(f"row index {b} out of range for dim {coeffs.dim}")


def quadratic_projection_closedform(coeffs, b, inv):
    """``128 B1 sum_i a_bi^2``."""
    _check_row(coeffs, b)
    return 128.0 * inv.B1 * float(np.sum(coeffs.a[b] ** 2))


def _poly_mul(p, q):
    out = defaultdict(int)
    for ea, ca in p.items():
        for eb, cb in q.items():
            out[tuple(x + y for x, y in zip(ea, eb))] += ca * cb
    return out


def _basis_poly(dim, i, j):
    """Integer polynomial ``y_i y_j - 2 delta_ij`` as ``{exponents: coeff}``."""
    e = [0] * dim
    e[i] += 1
    e[j] += 1
    p = {tuple(e): 1}
    if i == j:
        p[(0,) * dim] = -2
    return p


@lru_cache(maxsize=None)
def moment_tensor(dim, b):
    """Integer matrix ``M[(i,j),(m,l)] = int P_ij P_ml (y_b^2 - 2) rho``.

    With ``P_ij = y_i y_j - 2 delta_ij`` this gives ``I_b = vec(a)^T M vec(a)``.
    Every entry is obtained by expanding the product into monomials and
    summing exact Gaussian moments.
    """
    if dim > MAX_EXACT_DIM:
        raise ValueError(f"exact expansion supports dim <= {MAX_EXACT_DIM}, got {dim}")
    if not 0 <= b < dim:
        raise IndexError(f"row index {b} out of range for dim {dim}")
    pairs = list(itertools.product(range(dim), repeat=2))
    basis = {p: _basis_poly(dim, *p) for p in pairs}
    weight = _basis_poly(dim, b, b)
    size = dim * dim
    mat = np.zeros((size, size), dtype=np.int64)
    for r, pr in enumerate(pairs):
        left = _poly_mul(basis[pr], weight)
        for c in range(r, size):
            prod = _poly_mul(left, basis[pairs[c]])
            val = sum(coef * gaussian_moment(e) for e, coef in prod.items())
            if val.denominator != 1:
                raise ArithmeticError("non-integer Gaussian moment in even expansion")
            mat[r, c] = mat[c, r] = int(val)
    mat.setflags(write=False)
    return mat


def quadratic_projection_bruteforce(coeffs, b):
    """``I_b = int u^2 (y_b^2 - 2) rho`` by exact monomial expansion."""
    _check_row(coeffs, b)
    vec = coeffs.a.reshape(-1)
    return float(vec @ moment_tensor(coeffs.dim, b) @ vec)


def bruteforce_batch(a_stack, b, use_numba=None):
    """Vectorized :func:`quadratic_projection_bruteforce` over a stack ``(count, dim, dim)``."""
    a_stack = np.asarray(a_stack, dtype=float)
    dim = a_stack.shape[-1]
    vecs = np.ascontiguousarray(a_stack.reshape(a_stack.shape[0], dim * dim))
    mat = np.ascontiguousarray(moment_tensor(dim, b), dtype=float)
    return _kernels.quadform(vecs, mat, use_numba=use_numba)


def delta_constant(dim, inv):
    """``128 |B1| / sqrt(8^3 dim lam^3)``."""
    return 128.0 * abs(inv.B1) / math.sqrt(8.0**3 * dim * inv.lam**3)


def obstruction_lower_bound(coeffs, inv):
    """Return ``(lhs, rhs)`` of ``||proj D^2 phi(U, U)|| >= delta ||U||^2``.

    The left side uses the brute-force projections ``2 B1 I_b``, each divided
    by the basis norm ``sqrt(8 lam)``.
    """
    if not np.any(coeffs.a):
        raise DegenerateInputError("zero coefficient matrix: both sides vanish")
    # both sides are quadratic in a; normalize so squared norms cannot underflow
    scale = float(np.max(np.abs(coeffs.a)))
    unit = QuadCoeffs(coeffs.a / scale)
    proj = np.array([2.0 * inv.B1 * quadratic_projection_bruteforce(unit, b) for b in range(unit.dim)])
    lhs = float(np.linalg.norm(proj) / math.sqrt(8.0 * inv.lam))
    rhs = delta_constant(unit.dim, inv) * jacobi_norm(unit, inv)
    return lhs * scale * scale, rhs * scale * scale


def random_symmetric(rng, count, dim):
    """Stack of ``count`` symmetric Gaussian matrices."""
    g = rng.standard_normal((count, dim, dim))
    return 0.5 * (g + np.swapaxes(g, 1, 2))


def run_ensemble(inv, dims=(1, 2, 3, 4), count=1000, seed=0, tol=1e-10):
    """Brute-force identity and lower-bound sweep; returns a JSON-ready summary."""
    rng = np.random.default_rng(seed)
    out = {"seed": seed, "count": count, "invariants": {"lam": inv.lam, "B1": inv.B1, "name": inv.name}, "dims": {}}
    for dim in dims:
        a = random_symmetric(rng, count, dim)
        row_sq = np.sum(a**2, axis=2)
        ident_err = 0.0
        proj = np.empty((count, dim))
        for b in range(dim):
            ib = bruteforce_batch(a, b)
            ident_err = max(ident_err, float(np.max(np.abs(ib - 64.0 * row_sq[:, b]) / (1.0 + 64.0 * row_sq[:, b]))))
            proj[:, b] = 2.0 * inv.B1 * ib
        lhs = np.linalg.norm(proj, axis=1) / math.sqrt(8.0 * inv.lam)
        rhs = delta_constant(dim, inv) * 8.0 * inv.lam * np.sum(a**2, axis=(1, 2))
        ratio = lhs / rhs
        out["dims"][str(dim)] = {
            "identity_max_rel_error": ident_err,
            "identity_ok": ident_err <= tol,
            "violations": int(np.sum(lhs < rhs * (1.0 - 1e-12))),
            "min_ratio": float(ratio.min()),
            "max_ratio": float(ratio.max()),
        }
    out["passed"] = all(d["identity_ok"] and d["violations"] == 0 for d in out["dims"].values())
    return out


def ensemble_json(report):
    return json.dumps(report, sort_keys=True, indent=2)
