"""Gaussian-weight calculus for the weight ``(4 pi)^(-m/2) exp(-|y|^2 / 4)``."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import gamma, gammaincc

# Moments of the normalized weight for even degree <= 6, up to permutation.
MOMENT_TABLE = {
    (0,): 1,
    (2,): 2,
    (4,): 12,
    (6,): 120,
    (2, 2): 4,
    (4, 2): 24,
    (2, 2, 2): 8,
}


@dataclass(frozen=True)
class MultiIndex:
    entries: tuple

    def __post_init__(self):
        ent = tuple(int(a) for a in self.entries)
        if any(a < 0 for a in ent):
            raise ValueError(f"multi-index entries must be non-negative: {ent}")
        object.__setattr__(self, "entries", ent)

    @property
    def degree(self):
        return sum(self.entries)

    @property
    def dimension(self):
        return len(self.entries)

    def canonical(self):
        """Entries sorted decreasingly with zeros removed (``(0,)`` for the empty index)."""
        nz = tuple(sorted((a for a in self.entries if a), reverse=True))
        return nz or (0,)


def _as_index(alpha):
    return alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(alpha))


def gaussian_moment(alpha):
    """Exact moment ``I_alpha`` as a :class:`fractions.Fraction` (an integer for even indices).

    Uses ``Gamma((a+1)/2) = sqrt(pi) (a-1)!! / 2^(a/2)`` for even ``a`` so the
    powers of pi cancel and no rounding occurs.
    """
    alpha = _as_index(alpha)
    if any(a % 2 for a in alpha.entries):
        return Fraction(0)
    out = Fraction(1)
    for a in alpha.entries:
        out *= Fraction(2**a * _double_factorial(a - 1), 2 ** (a // 2))
    return out


def gaussian_moment_gamma(alpha):
    """Floating-point evaluation of ``pi^(-m/2) 2^|a| prod Gamma((a_i+1)/2)``."""
    alpha = _as_index(alpha)
    if any(a % 2 for a in alpha.entries):
        return 0.0
    m = alpha.dimension
    val = math.pi ** (-m / 2.0) * 2.0**alpha.degree
    for a in alpha.entries:
        val *= math.gamma((a + 1) / 2.0)
    return val


def _double_factorial(k):
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights with ``sum(weights) == 1`` for the Gaussian weight.

    ``degree`` is the polynomial degree integrated exactly, or ``None`` for
    rules (such as uniform grids) with no polynomial exactness claim.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    degree: int = None

    def integrate(self, values):
        return float(np.dot(self.weights, values))


def gauss_hermite_rule(dimension, degree):
    """Tensor Gauss-Hermite rule exact for polynomials of total degree <= ``degree``.

    Standard nodes for ``exp(-t^2)`` are mapped by ``y = 2t`` and weights
    divided by ``sqrt(pi)`` per dimension.
    """
    npts = degree // 2 + 1
    t, w = hermgauss(npts)
    y1, w1 = 2.0 * t, w / math.sqrt(math.pi)
    grids = np.meshgrid(*([y1] * dimension), indexing="ij")
    nodes = np.column_stack([g.ravel() for g in grids])
    wgrids = np.meshgrid(*([w1] * dimension), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids]), axis=0)
    return QuadratureRule(dimension, nodes, weights, 2 * npts - 1)


def uniform_grid_rule(dimension, points=81, half_width=12.0):
    """Trapezoid rule on ``[-half_width, half_width]^d`` times the Gaussian weight.

    Weights are renormalized to sum to one. Spectrally accurate for smooth
    integrands that decay with the weight, but not polynomially exact.
    """
    y1 = np.linspace(-half_width, half_width, points)
    grids = np.meshgrid(*([y1] * dimension), indexing="ij")
    nodes = np.column_stack([g.ravel() for g in grids])
    w = np.exp(-np.sum(nodes**2, axis=1) / 4.0)
    return QuadratureRule(dimension, nodes, w / w.sum(), None)


class InsufficientDegreeError(ValueError):
    pass


def moment_by_quadrature(alpha, rule):
    """Quadrature value of ``y^alpha``; refuses rules not exact at degree ``|alpha|``."""
    alpha = _as_index(alpha)
    if alpha.dimension != rule.dimension:
        raise ValueError(f"rule dimension {rule.dimension} != index length {alpha.dimension}")
    if rule.degree is None or rule.degree < alpha.degree:
        raise InsufficientDegreeError(f"rule exact to degree {rule.degree}, need {alpha.degree}")
    vals = np.prod(rule.nodes ** np.asarray(alpha.entries, dtype=float), axis=1)
    return rule.integrate(vals)


def sphere_area(n_minus_one, radius=1.0):
    """Area of the round ``(n-1)``-sphere in ``R^n``."""
    n = n_minus_one + 1
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0) * radius**n_minus_one


def cutoff_tail(n, m, R):
    """``int_{|x| > R} |x|^m exp(-|x|^2/4) dx`` over ``R^n``.

    Radially this is ``|S^(n-1)| 2^(n+m-1) Gamma((n+m)/2, R^2/4)``.
    """
    if R < 1:
        raise ValueError("cutoff_tail requires R >= 1")
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    s = 0.5 * (n + m)
    upper = gammaincc(s, R * R / 4.0) * gamma(s)
    return sphere_area(n - 1) * 2.0 ** (n + m - 1) * upper


def cutoff_ratio(n, m, R):
    """Tail divided by the bound shape ``R^(n+m+2) exp(-R^2/4)``."""
    R = np.asarray(R, dtype=float)
    tail = np.vectorize(lambda r: cutoff_tail(n, m, r))(R)
    return tail / (R ** (n + m + 2) * np.exp(-(R**2) / 4.0))


def cutoff_constant(n, m, radii=None):
    """Empirical supremum of :func:`cutoff_ratio` over ``radii`` (default ``[1, 10]``)."""
    if radii is None:
        radii = np.linspace(1.0, 10.0, 901)
    return float(np.max(cutoff_ratio(n, m, radii)))


def gaussian_poincare_check(u, grad, rule):
    """Both sides of ``(1/4) int u^2 |y|^2 rho <= int (d u^2 + 4 |grad u|^2) rho``.

    ``u`` has shape ``(nodes,)`` and ``grad`` shape ``(nodes, d)``, sampled at
    ``rule.nodes``.
    """
    u = np.asarray(u, dtype=float)
    grad = np.asarray(grad, dtype=float).reshape(u.shape[0], -1) if np.ndim(grad) else grad
    npts, d = rule.nodes.shape
    if u.shape != (npts,) or np.shape(grad) != (npts, d):
        raise ValueError(
            f"samples do not match the rule grid: u {u.shape}, grad {np.shape(grad)}, nodes {(npts, d)}"
        )
    y2 = np.sum(rule.nodes**2, axis=1)
    lhs = 0.25 * rule.integrate(u**2 * y2)
    rhs = rule.integrate(d * u**2 + 4.0 * np.sum(grad**2, axis=1))
    return lhs, rhs
