"""Shrinker quantity, Gaussian area and finite-difference checks of their variations.

A normal variation of a base curve ``x`` is ``x + eps v N``. Geometry of the
perturbed curve is recomputed from its positions alone, so every check below
compares closed-form variation formulas against an independent oracle.
"""

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .curve import ClosedCurve
from .spectral import JACOBI, SHRINKER_TOL, NotAShrinkerError, build_operator

DEFAULT_EPS = (1e-2, 5e-3, 2.5e-3)


def shrinker_quantity(curve):
    """Scalar ``phi = <x, N>/2 - kappa``; the vector quantity is ``phi N``."""
    return 0.5 * curve.support_function() - curve.kappa


def gaussian_area(curve):
    """``F = int rho ds``."""
    return curve.integrate(curve.weight)


@dataclass(frozen=True, eq=False)
class NormalField:
    base: ClosedCurve
    values: np.ndarray
    dot: np.ndarray
    ddot: np.ndarray

    @classmethod
    def from_values(cls, base, values):
        v = np.broadcast_to(np.asarray(values, dtype=float), (base.n,)).copy()
        vd = base.d_ds(v)
        return cls(base, v, vd, base.d_ds(vd))

    @classmethod
    def from_function(cls, base, fn):
        """Field from a function of the base curve's parameter."""
        return cls.from_values(base, fn(base.param))

    def scaled(self, t):
        return NormalField(self.base, t * self.values, t * self.dot, t * self.ddot)

    def __add__(self, other):
        return NormalField(self.base, self.values + other.values, self.dot + other.dot, self.ddot + other.ddot)

    @property
    def is_zero(self):
        return not np.any(self.values)


@dataclass(frozen=True, eq=False)
class PerturbedCurve:
    base: ClosedCurve
    field: NormalField
    epsilon: float
    curve: ClosedCurve

    @classmethod
    def build(cls, v, eps):
        base = v.base
        if eps == 0:
            return cls(base, v, 0.0, base)
        pos = base.positions + eps * v.values[:, None] * base.normal
        return cls(base, v, float(eps), ClosedCurve.from_positions(pos, base.period, meta={"epsilon": eps}))

    def phi_vector(self):
        return shrinker_quantity(self.curve)[:, None] * self.curve.normal

    def phi_normal(self):
        """Component of the vector ``phi`` along the base normal."""
        return np.sum(self.phi_vector() * self.base.normal, axis=1)


@dataclass
class FunctionalReport:
    phi_norms: dict
    F_value: float
    F_gap: float
    fitted_exponents: dict = field(default_factory=dict)


def functional_report(curve, base_F):
    phi = shrinker_quantity(curve)
    norms = {"L1": curve.integrate_rho(np.abs(phi)), "L2": curve.norm_rho(phi)}
    F = gaussian_area(curve)
    return FunctionalReport(norms, F, F - base_F)


def jacobi_apply(v):
    """``L v = kappa (kappa^-1 v')' + kappa^2 v + v/2`` via the spectral operator."""
    return build_operator(v.base, JACOBI)(v.values)


def second_variation_normal(v):
    """Normal part of ``D^2 phi(V, V)`` for ``V = v N`` on a planar curve.

    ``2 (-kappa^3 v^2 - kappa v'^2 - 2 kappa v v'')``.
    """
    k = v.base.kappa
    return 2.0 * (-(k**3) * v.values**2 - k * v.dot**2 - 2.0 * k * v.values * v.ddot)


def second_variation_tangential(v):
    """Tangential coefficient ``-2 (L v) v'`` (diagnostic only)."""
    return -2.0 * jacobi_apply(v) * v.dot


def _require_shrinker(base):
    res = base.shrinker_residual()
    if res > SHRINKER_TOL:
        raise NotAShrinkerError(f"base curve has shrinker residual {res:.3e}")


def _check_eps(eps_list):
    eps = np.asarray(eps_list, dtype=float)
    if eps.ndim != 1 or eps.size < 2 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
        raise ValueError("eps_list must hold at least two positive, strictly decreasing values")
    return eps


def fit_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``; ``nan`` if any ``y`` is zero."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(y <= 0):
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _norm(base, f):
    return base.norm_rho(f)


def first_variation_check(v, eps_list=DEFAULT_EPS):
    """One-sided residuals ``||phi(eps)/eps - L v||`` and a Richardson limit.

    The limit extrapolates central quotients at ``eps`` and ``eps/2`` for the
    smallest step and is compared against ``L v``.
    """
    base = v.base
    _require_shrinker(base)
    eps = _check_eps(eps_list)
    Lv = jacobi_apply(v)
    if v.is_zero:
        return {"residuals": [0.0] * eps.size, "slope": float("nan"), "limit_error": 0.0, "zero_field": True}
    resid = [_norm(base, PerturbedCurve.build(v, e).phi_normal() / e - Lv) for e in eps]

    def central(e):
        return (PerturbedCurve.build(v, e).phi_normal() - PerturbedCurve.build(v, -e).phi_normal()) / (2 * e)

    h = eps[-1]
    limit = (4.0 * central(h / 2) - central(h)) / 3.0
    scale = max(_norm(base, Lv), _norm(base, v.values))
    return {
        "eps": eps.tolist(),
        "residuals": resid,
        "slope": fit_slope(eps, resid),
        "limit_error": _norm(base, limit - Lv) / scale,
        "zero_field": False,
    }


def _second_difference(v, e):
    plus = PerturbedCurve.build(v, e).phi_vector()
    minus = PerturbedCurve.build(v, -e).phi_vector()
    zero = PerturbedCurve.build(v, 0.0).phi_vector()
    return (plus - 2.0 * zero + minus) / (e * e)


def _roundoff_level(base, f):
    """Weighted norm of the top third of the Fourier spectrum of ``f``.

    Smooth samples have spectrally small content there, so this measures
    rounding noise.
    """
    fh = np.fft.rfft(f)
    fh[: 2 * fh.size // 3] = 0.0
    return _norm(base, np.fft.irfft(fh, n=base.n))


def second_variation_check(v, eps_list=DEFAULT_EPS, floor=1e-8):
    """Central second differences of the vector ``phi`` against the closed form.

    Reports the normal residual at each step (expected slope 2) and the
    Richardson-extrapolated residual at the smallest step ``h``. The budget
    is the truncation estimate ``|D(h) - D(h/2)|`` plus the rounding noise
    of ``phi`` amplified by ``8 / (h/2)^2``, with the floor as a minimum.
    The tangential comparison is returned as a diagnostic.
    """
    base = v.base
    _require_shrinker(base)
    eps = _check_eps(eps_list)
    N, T = base.normal, base.tangent
    formula_n = second_variation_normal(v)
    formula_t = second_variation_tangential(v)
    if v.is_zero:
        return {"passed": True, "normal_residuals": [0.0] * eps.size, "slope": float("nan"),
                "extrapolated_residual": 0.0, "budget": 0.0, "tangential_residual": 0.0}
    diffs = [_second_difference(v, e) for e in eps]
    resid = [_norm(base, np.sum(d * N, axis=1) - formula_n) for d in diffs]
    h = eps[-1]
    d_half = _second_difference(v, h / 2)
    dn_h, dn_half = np.sum(diffs[-1] * N, axis=1), np.sum(d_half * N, axis=1)
    extrap = (4.0 * dn_half - dn_h) / 3.0
    truncation = _norm(base, dn_h - dn_half)
    noise = max(_roundoff_level(base, PerturbedCurve.build(v, s * h / 2).phi_normal()) for s in (1.0, -1.0))
    roundoff = float(8.0 * noise / (h / 2) ** 2)
    budget = truncation + roundoff
    scale = max(1.0, _norm(base, formula_n))
    ext_res = _norm(base, extrap - formula_n)
    t_extrap = (4.0 * np.sum(d_half * T, axis=1) - np.sum(diffs[-1] * T, axis=1)) / 3.0
    return {
        "passed": bool(ext_res <= max(budget, floor * scale)),
        "eps": eps.tolist(),
        "normal_residuals": resid,
        "slope": fit_slope(eps, resid),
        "extrapolated_residual": ext_res,
        "budget": budget,
        "truncation_budget": truncation,
        "roundoff_budget": roundoff,
        "formula_norm": _norm(base, formula_n),
        "tangential_residual": _norm(base, t_extrap - formula_t),
    }


def taylor_remainder_check(v, eps_list=DEFAULT_EPS):
    """Slopes of the first- and second-order Taylor remainders of ``phi``."""
    base = v.base
    _require_shrinker(base)
    eps = _check_eps(eps_list)
    if v.is_zero:
        return {"r1": [0.0] * eps.size, "r2": [0.0] * eps.size, "slope1": float("nan"), "slope2": float("nan")}
    Lv = jacobi_apply(v)
    Q = second_variation_normal(v)
    r1, r2 = [], []
    for e in eps:
        pn = PerturbedCurve.build(v, e).phi_normal()
        r1.append(_norm(base, pn - e * Lv))
        r2.append(_norm(base, pn - e * Lv - 0.5 * e * e * Q))
    return {"eps": eps.tolist(), "r1": r1, "r2": r2, "slope1": fit_slope(eps, r1), "slope2": fit_slope(eps, r2)}


def F_expansion_check(v, eps_list=DEFAULT_EPS):
    """``|F(eps v) - F|`` against ``||phi|| ||U|| + ||U||^3`` with ``U = eps v``."""
    base = v.base
    _require_shrinker(base)
    eps = _check_eps(eps_list)
    F0 = gaussian_area(base)
    if v.is_zero:
        return {"gaps": [0.0] * eps.size, "bounds": [0.0] * eps.size, "C": 0.0, "C_spread": 0.0}
    gaps, bounds, quot = [], [], []
    vn = _norm(base, v.values)
    for e in eps:
        pc = PerturbedCurve.build(v, e).curve
        gap = abs(gaussian_area(pc) - F0)
        phi = pc.norm_rho(shrinker_quantity(pc))
        u = e * vn
        gaps.append(gap)
        bounds.append(phi * u + u**3)
        quot.append(gap / (e * e))
    ratios = np.array(gaps) / np.array(bounds)
    C = float(ratios.max())
    return {
        "eps": eps.tolist(),
        "gaps": gaps,
        "bounds": bounds,
        "gap_over_eps2": quot,
        "C": C,
        "C_spread": float((ratios.max() - ratios.min()) / C) if C > 0 else 0.0,
        "gap_slope": fit_slope(eps, gaps),
        "bound_slope": fit_slope(eps, bounds),
    }


def random_direction(base, rng, modes=(2, 3, 4, 5, 6)):
    """Unit-sup random combination of Fourier modes of the base parameter."""
    t = 2.0 * np.pi * base.param / base.period
    v = np.zeros(base.n)
    for j in modes:
        a, b = rng.standard_normal(2)
        v += a * np.cos(j * t) + b * np.sin(j * t)
    return NormalField.from_values(base, v / np.max(np.abs(v)))


@dataclass
class LojasiewiczResult:
    C: float
    exponent: float
    violations: int
    samples: int
    excluded: int
    calibration_max_ratio: float
    validation_max_ratio: float
    min_local_exponent: float
    median_local_exponent: float
    per_direction: list
    noise_floor: float

    @property
    def passed(self):
        return self.violations == 0 and self.min_local_exponent >= self.exponent

    def to_json(self):
        d = asdict(self)
        d["passed"] = self.passed
        return json.dumps(d, sort_keys=True, indent=2)


def mode_direction(base, j):
    t = 2.0 * np.pi * base.param / base.period
    return NormalField.from_values(base, np.cos(j * t))


def lojasiewicz_samples(bases, directions_per_base=26, amplitudes=None, seed=0, pure_modes=(2, 3, 4, 5, 6)):
    """Rows ``(base_id, direction_id, epsilon, phi_l2, f_gap)`` over perturbations.

    The first directions of each base are single Fourier modes (the slowest
    stable ones carry the largest gap-to-gradient ratio); the rest are random
    mixtures.
    """
    rng = np.random.default_rng(seed)
    if amplitudes is None:
        amplitudes = np.geomspace(1e-4, 1e-2, 10)
    rows = []
    for bid, base in enumerate(bases):
        _require_shrinker(base)
        F0 = gaussian_area(base)
        for d in range(directions_per_base):
            v = mode_direction(base, pure_modes[d]) if d < len(pure_modes) else random_direction(base, rng)
            for e in amplitudes:
                pc = PerturbedCurve.build(v, e).curve
                rows.append((bid, d, float(e), pc.norm_rho(shrinker_quantity(pc)), abs(gaussian_area(pc) - F0)))
    return rows


def lojasiewicz_gradient_check(rows, exponent=1.5, noise_floor=1e-10, safety=2.0):
    """Certify ``|F - F0| <= C ||phi||^exponent`` with one constant.

    ``C`` is ``safety`` times the largest ratio over the even-numbered
    directions (all amplitudes) and is then validated on every row. Rows with ``||phi||`` below the noise
    floor are excluded and counted. Local exponents are fitted per direction.
    """
    arr = np.array([r[3:] for r in rows], dtype=float)
    keep = arr[:, 0] > noise_floor
    phi, gap = arr[keep, 0], arr[keep, 1]
    ratio = gap / phi**exponent
    even = np.array([r[1] % 2 == 0 for r in rows])[keep]
    calib = ratio[even] if even.any() else ratio
    C = safety * float(calib.max())
    violations = int(np.sum(gap > C * phi**exponent))
    groups = {}
    for r, k in zip(rows, keep):
        if k:
            groups.setdefault((r[0], r[1]), []).append((r[3], r[4]))
    per_dir = []
    for key, pts in sorted(groups.items()):
        p = np.array(pts)
        good = p[:, 1] > 0
        if good.sum() >= 3:
            per_dir.append({"base": key[0], "direction": key[1], "exponent": fit_slope(p[good, 0], p[good, 1])})
    exps = np.array([d["exponent"] for d in per_dir])
    return LojasiewiczResult(
        C=C,
        exponent=exponent,
        violations=violations,
        samples=int(keep.sum()),
        excluded=int((~keep).sum()),
        calibration_max_ratio=float(calib.max()),
        validation_max_ratio=float(ratio[~even].max()) if (~even).any() else float(calib.max()),
        min_local_exponent=float(exps.min()),
        median_local_exponent=float(np.median(exps)),
        per_direction=per_dir,
        noise_floor=noise_floor,
    )


SCATTER_COLUMNS = ("phi_l2", "f_gap", "direction_id", "epsilon", "base_id")


def write_scatter_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SCATTER_COLUMNS)
        for bid, d, e, phi, gap in rows:
            w.writerow([repr(phi), repr(gap), d, repr(e), bid])
