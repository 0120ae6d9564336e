"""Shrinker curves: the round circle and Abresch-Langer curves.

The curvature equation ``k'' - k'^2/k + k^3 = k/2`` is integrated in the
variable ``w = ln k`` where it reads ``w'' = 1/2 - exp(2w)``, a separable
Hamiltonian system with first integral
``E = w'^2/2 + exp(2w)/2 - w/2 = k'^2/(2k^2) + k^2/2 - ln(k)/2``.
The tangent angle ``theta' = k`` is carried along in the same symplectic
composition so closure of the curve can be measured exactly.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import _kernels, fourier
from .curve import ClosedCurve, gaussian_weight

KAPPA_CIRCLE = 1.0 / math.sqrt(2.0)
CIRCLE_LENGTH = 2.0 * math.pi * math.sqrt(2.0)
CLOSURE_TOL = 1e-10


class IntegrationError(RuntimeError):
    def __init__(self, message, sigma):
        super().__init__(f"{message} (at sigma={sigma:.6g})")
        self.sigma = sigma


class ClosureSearchError(ValueError):
    pass


class ClosureError(ValueError):
    def __init__(self, angular_defect):
        super().__init__(f"profile does not close: angular defect {angular_defect:.3e}")
        self.angular_defect = angular_defect


def first_integral(kappa, kappa_dot):
    kappa = np.asarray(kappa, dtype=float)
    return kappa_dot**2 / (2.0 * kappa**2) + kappa**2 / 2.0 - np.log(kappa) / 2.0


def ode_residual(kappa, kappa_dot, kappa_ddot):
    return kappa_ddot - kappa_dot**2 / kappa + kappa**3 - kappa / 2.0


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """Samples of a solution of the curvature ODE on a uniform arclength grid.

    For closed profiles the grid is periodic (``length`` is excluded) and
    ``turning`` is the total tangent-angle advance over ``length``.
    """

    sigma: np.ndarray
    kappa: np.ndarray
    kappa_dot: np.ndarray
    theta: np.ndarray
    period: float
    first_integral: float
    length: float
    closed: bool = False
    turning: float = float("nan")
    meta: dict = field(default_factory=dict)

    @property
    def h(self):
        return float(self.sigma[1] - self.sigma[0])

    def energy(self):
        return first_integral(self.kappa, self.kappa_dot)

    def energy_drift(self):
        """Max relative deviation of the first integral along the samples."""
        e = self.energy()
        return float(np.max(np.abs(e - self.first_integral)) / abs(self.first_integral))


def _tau_for(kappa_max):
    return 0.01 / max(1.0, kappa_max)


def _substeps(h, kappa_max):
    return max(1, int(math.ceil(h / _tau_for(kappa_max))))


def _check_finite(out, h_sub, record_every):
    w = out[0, 0]
    bad = ~np.isfinite(w) | (np.abs(w) > 300.0)
    if bad.any():
        k = int(np.argmax(bad))
        raise IntegrationError("curvature left the representable range", k * record_every * h_sub)


def integrate_curvature_ode(kappa0, steps, h, substeps=None):
    """Integrate from an extremum (``kappa'(0) = 0``) and sample every ``h``.

    Each output interval is split into ``substeps`` composition steps of the
    sixth-order symplectic integrator. Returns ``steps + 1`` samples.
    """
    if not kappa0 > 0:
        raise ValueError("kappa0 must be positive")
    if substeps is None:
        substeps = _substeps(h, kappa0)
    tau = h / substeps
    out = _kernels.propagate(math.log(kappa0), 0.0, 0.0, tau, steps * substeps, substeps)
    _check_finite(out, tau, substeps)
    w, p, th = out[:, 0]
    kappa = np.exp(w)
    if abs(kappa0 - KAPPA_CIRCLE) < 1e-14:
        period = CIRCLE_LENGTH
    else:
        period = 2.0 * half_period(kappa0)[0]
    return CurvatureProfile(
        sigma=np.arange(steps + 1) * h,
        kappa=kappa,
        kappa_dot=p * kappa,
        theta=th,
        period=period,
        first_integral=float(first_integral(kappa0, 0.0)),
        length=steps * h,
        meta={"kappa0": kappa0, "substeps": substeps},
    )


def half_period(kappa_max, tau=None):
    """Arclength and tangent-angle advance from a curvature maximum to the next minimum."""
    kmax = np.atleast_1d(np.asarray(kappa_max, dtype=float))
    if np.any(kmax <= KAPPA_CIRCLE):
        raise ValueError("kappa_max must exceed 1/sqrt(2)")
    if tau is None:
        tau = _tau_for(float(kmax.max()))
    w0 = np.log(kmax)
    zeros = np.zeros_like(w0)
    w, p, th, count, found = _kernels.advance_to_turn(w0, zeros, zeros, tau, 10_000_000)
    if not np.all(found):
        raise IntegrationError("no curvature minimum reached", float(count.max()) * tau)
    sig = count * tau
    delta = np.zeros_like(w)
    # Newton on the partial step size so that w' = 0 exactly.
    for _ in range(30):
        wd, pd, _ = _kernels.single_step(w, p, th, delta)
        ewd = np.exp(wd)
        step = -pd / (0.5 - ewd * ewd)
        delta = np.clip(delta + step, 0.0, 2.0 * tau)
        if np.all(np.abs(step) < 1e-16 * max(1.0, tau)):
            break
    _, _, thd = _kernels.single_step(w, p, th, delta)
    result = (sig + delta, thd)
    if np.ndim(kappa_max) == 0:
        return float(result[0][0]), float(result[1][0])
    return result


def closure_function(kappa_max, p, q):
    """Tangent-angle advance per curvature half-period minus ``pi p / q``."""
    _, dtheta = half_period(kappa_max)
    return dtheta - math.pi * p / q


def circle_profile(n=256):
    h = CIRCLE_LENGTH / n
    sigma = np.arange(n) * h
    return CurvatureProfile(
        sigma=sigma,
        kappa=np.full(n, KAPPA_CIRCLE),
        kappa_dot=np.zeros(n),
        theta=KAPPA_CIRCLE * sigma,
        period=CIRCLE_LENGTH,
        first_integral=float(first_integral(KAPPA_CIRCLE, 0.0)),
        length=CIRCLE_LENGTH,
        closed=True,
        turning=2.0 * math.pi,
        meta={"p": 1, "q": 1, "kappa_max": KAPPA_CIRCLE},
    )


def find_closed_curve(p, q, bracket=(0.72, 6.0), n_points=512):
    """Shoot on ``kappa_max`` until the curvature closes after ``q`` periods with rotation index ``p``.

    ``(1, 1)`` returns the circle. Admissible ratios are not assumed; a bracket
    without a sign change of :func:`closure_function` raises
    :class:`ClosureSearchError`.
    """
    if math.gcd(p, q) != 1:
        raise ValueError(f"p={p} and q={q} must be coprime")
    if (p, q) == (1, 1):
        return circle_profile(n_points)
    lo, hi = bracket
    glo, ghi = closure_function(lo, p, q), closure_function(hi, p, q)
    if glo * ghi > 0:
        raise ClosureSearchError(
            f"closure function has no sign change on [{lo}, {hi}] for (p, q) = ({p}, {q}): "
            f"g = ({glo:.4g}, {ghi:.4g}); ratio {p}/{q} not admissible in this bracket"
        )
    kmax = brentq(closure_function, lo, hi, args=(p, q), xtol=1e-15, rtol=1e-15, maxiter=200)
    g = closure_function(kmax, p, q)
    if abs(g) > CLOSURE_TOL:
        raise ClosureSearchError(f"closure residual {g:.3e} exceeds {CLOSURE_TOL}")
    return closed_profile(kmax, p, q, n_points)


def closed_profile(kappa_max, p, q, n_points=512):
    """Sample ``q`` curvature periods starting at ``kappa_max`` on a periodic grid."""
    if n_points % 2:
        raise ValueError("n_points must be even")
    t_half, _ = half_period(kappa_max)
    length = 2.0 * q * t_half
    h = length / n_points
    s = _substeps(h, kappa_max)
    out = _kernels.propagate(math.log(kappa_max), 0.0, 0.0, h / s, n_points * s, s)
    _check_finite(out, h / s, s)
    w, pw, th = out[:, 0]
    kappa = np.exp(w)
    return CurvatureProfile(
        sigma=np.arange(n_points) * h,
        kappa=kappa[:-1],
        kappa_dot=(pw * kappa)[:-1],
        theta=th[:-1],
        period=2.0 * t_half,
        first_integral=float(first_integral(kappa_max, 0.0)),
        length=length,
        closed=True,
        turning=float(th[-1] - th[0]),
        meta={
            "p": p,
            "q": q,
            "kappa_max": float(kappa_max),
            "end_mismatch": float(max(abs(w[-1] - w[0]), abs(pw[-1] - pw[0]))),
        },
    )


def reconstruct_curve(profile):
    """Planar curve with tangent angle ``theta``, positioned so ``x = (2k'/k) T + 2k N``.

    Positions come from Fourier integration of the tangent; the translation is
    fixed by the algebraic shrinker identity, so ``<x, N>/2 - kappa`` measured
    on the result is a genuine residual.
    """
    if not profile.closed:
        raise ClosureError(float("nan"))
    turns = profile.turning / (2.0 * math.pi)
    defect = abs(profile.turning - 2.0 * math.pi * round(turns))
    if defect > 1e-8:
        raise ClosureError(defect)
    L = profile.length
    th = profile.theta
    kappa, kdot = profile.kappa, profile.kappa_dot
    tangent = np.column_stack([np.cos(th), np.sin(th)])
    normal = np.column_stack([np.sin(th), -np.cos(th)])
    x_identity = (2.0 * kdot / kappa)[:, None] * tangent + (2.0 * kappa)[:, None] * normal
    closure_defect = float(np.hypot(*fourier.integrate(tangent.T, L)))
    x = fourier.antiderivative(tangent.T, L).T
    x = x + np.mean(x_identity - x, axis=0)
    weight = gaussian_weight(x)
    c = weight * kappa
    meta = dict(profile.meta)
    meta.update(
        rotation_index=int(round(turns)),
        identity_mismatch=float(np.max(np.abs(x - x_identity))),
        weight_constant_spread=float((c.max() - c.min()) / c.mean()),
    )
    curve = ClosedCurve(
        positions=x,
        period=L,
        tangent=tangent,
        normal=normal,
        speed=np.ones(len(th)),
        kappa=kappa,
        kappa_dot=kdot,
        weight=weight,
        weight_constant=float(c.mean()),
        closure_defect=closure_defect,
        meta=meta,
    )
    meta["shrinker_residual"] = curve.shrinker_residual()
    return curve


def al_curve(p=2, q=3, n_points=512, bracket=(0.72, 6.0)):
    """Convenience: shoot and reconstruct in one call."""
    return reconstruct_curve(find_closed_curve(p, q, bracket, n_points))


@dataclass(frozen=True)
class B1Routes:
    route_a: float
    route_b: float
    route_c: float

    def spread(self):
        v = (self.route_a, self.route_b, self.route_c)
        return max(v) - min(v)


def compute_B1(curve):
    """Three evaluations of ``B1``: the defining integral, via ``rho = c/kappa``, and reduced to ``kappa^3``."""
    k, kd, c = curve.kappa, curve.kappa_dot, curve.weight_constant
    a = -curve.integrate_rho(k**6 - 3.0 * k**2 * kd**2)
    b = -c * curve.integrate(k**5 - 3.0 * k * kd**2)
    cc = -0.5 * c * curve.integrate(k**3)
    return B1Routes(a, b, cc)


def integration_identity_check(curve, n):
    """Both sides of the two integration-by-parts identities for the curvature.

    Returns ``((int k'' k^n, -n int k'^2 k^(n-1)), (-n int k'^2 k^(n-2), int k^n/2 - k^(n+2)))``;
    the second pair is ``None`` for ``n = 1``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k, kd = curve.kappa, curve.kappa_dot
    kdd = curve.d_ds(kd)
    first = (curve.integrate(kdd * k**n), -n * curve.integrate(kd**2 * k ** (n - 1)))
    if n < 2:
        return first, None
    second = (-n * curve.integrate(kd**2 * k ** (n - 2)), curve.integrate(0.5 * k**n - k ** (n + 2)))
    return first, second


def gaussian_area(curve):
    """``F = int rho ds``."""
    return curve.integrate_rho(np.ones(curve.n))
