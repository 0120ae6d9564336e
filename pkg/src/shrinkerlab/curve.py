"""Discretized closed planar curves with Gaussian weight.

Orientation: the tangent turns counterclockwise, curvature is positive on
convex curves, and ``normal`` is the principal normal ``N = H/|H|`` with the
mean curvature vector ``H = kappa * N``. On a convex curve this points away
from the centre of curvature, so a round circle about the origin has
``<x, N> = radius``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import fourier

RHO_NORMALIZATION = (4.0 * np.pi) ** -0.5


def gaussian_weight(positions):
    return RHO_NORMALIZATION * np.exp(-np.sum(positions**2, axis=-1) / 4.0)


@dataclass(frozen=True, eq=False)
class ClosedCurve:
    """A closed curve sampled on a uniform periodic parameter grid.

    ``period`` is the parameter length; for arclength-parametrized curves
    ``speed`` is identically one and ``period`` is the total length.
    """

    positions: np.ndarray
    period: float
    tangent: np.ndarray
    normal: np.ndarray
    speed: np.ndarray
    kappa: np.ndarray
    kappa_dot: np.ndarray
    weight: np.ndarray
    weight_constant: float
    closure_defect: float = 0.0
    meta: dict = field(default_factory=dict)

    @classmethod
    def from_positions(cls, positions, period, meta=None):
        """Recompute frame, curvature and weight spectrally from positions."""
        x = np.asarray(positions, dtype=float)
        if x.ndim != 2 or x.shape[1] != 2:
            raise ValueError("positions must have shape (n, 2)")
        if x.shape[0] % 2:
            raise ValueError("an even number of samples is required")
        xu = fourier.diff(x.T, period).T
        xuu = fourier.diff(x.T, period, order=2).T
        speed = np.hypot(xu[:, 0], xu[:, 1])
        if np.any(speed <= 0):
            raise ValueError("degenerate parametrization (zero speed)")
        tangent = xu / speed[:, None]
        normal = np.column_stack([tangent[:, 1], -tangent[:, 0]])
        kappa = (xu[:, 0] * xuu[:, 1] - xu[:, 1] * xuu[:, 0]) / speed**3
        kappa_dot = fourier.diff(kappa, period) / speed
        weight = gaussian_weight(x)
        return cls(
            positions=x,
            period=float(period),
            tangent=tangent,
            normal=normal,
            speed=speed,
            kappa=kappa,
            kappa_dot=kappa_dot,
            weight=weight,
            weight_constant=float(np.mean(weight * kappa)),
            meta=dict(meta or {}),
        )

    @property
    def n(self):
        return self.positions.shape[0]

    @property
    def du(self):
        return self.period / self.n

    @property
    def param(self):
        return np.arange(self.n) * self.du

    @property
    def length(self):
        return float(np.sum(self.speed) * self.du)

    @property
    def is_arclength(self):
        return bool(np.max(np.abs(self.speed - 1.0)) < 1e-10)

    def integrate(self, f):
        """Integral of samples ``f`` against arclength."""
        return float(np.sum(np.asarray(f) * self.speed) * self.du)

    def integrate_rho(self, f):
        return self.integrate(np.asarray(f) * self.weight)

    def norm_rho(self, f):
        return float(np.sqrt(max(self.integrate_rho(np.asarray(f) ** 2), 0.0)))

    def total_turning(self):
        return self.integrate(self.kappa)

    def rotation_index(self):
        return int(round(self.total_turning() / (2.0 * np.pi)))

    def d_ds(self, f):
        """Arclength derivative of periodic samples."""
        return fourier.diff(f, self.period) / self.speed

    def support_function(self):
        return np.sum(self.positions * self.normal, axis=1)

    def shrinker_residual(self):
        """``max |<x, N>/2 - kappa|``."""
        return float(np.max(np.abs(0.5 * self.support_function() - self.kappa)))


def circle(radius=np.sqrt(2.0), n=256):
    """Round circle about the origin, arclength-parametrized, counterclockwise."""
    length = 2.0 * np.pi * radius
    t = np.arange(n) * (2.0 * np.pi / n)
    pos = radius * np.column_stack([np.cos(t), np.sin(t)])
    tangent = np.column_stack([-np.sin(t), np.cos(t)])
    normal = np.column_stack([np.cos(t), np.sin(t)])
    kappa = np.full(n, 1.0 / radius)
    weight = gaussian_weight(pos)
    return ClosedCurve(
        positions=pos,
        period=length,
        tangent=tangent,
        normal=normal,
        speed=np.ones(n),
        kappa=kappa,
        kappa_dot=np.zeros(n),
        weight=weight,
        weight_constant=float(np.mean(weight * kappa)),
        meta={"kind": "circle", "radius": float(radius)},
    )


CSV_COLUMNS = ("sigma", "x1", "x2", "kappa", "kappa_dot", "rho")


def write_csv(curve, path, header=None):
    """Write ``sigma,x1,x2,kappa,kappa_dot,rho`` rows under a one-line JSON header."""
    meta = dict(curve.meta)
    meta.update(header or {})
    meta.setdefault("period", curve.period)
    data = np.column_stack(
        [curve.param, curve.positions, curve.kappa, curve.kappa_dot, curve.weight]
    )
    head = json.dumps(_jsonable(meta), sort_keys=True) + "\n" + ",".join(CSV_COLUMNS)
    np.savetxt(path, data, delimiter=",", header=head, comments="# ", fmt="%.17g")


def read_csv(path):
    """Inverse of :func:`write_csv`; frame and speed are recomputed from positions."""
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("# "):
        raise ValueError(f"{path}: missing JSON header line")
    meta = json.loads(first[2:])
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != len(CSV_COLUMNS):
        raise ValueError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
    period = float(meta["period"])
    base = ClosedCurve.from_positions(data[:, 1:3], period, meta=meta)
    return ClosedCurve(
        positions=base.positions,
        period=period,
        tangent=base.tangent,
        normal=base.normal,
        speed=base.speed,
        kappa=data[:, 3].copy(),
        kappa_dot=data[:, 4].copy(),
        weight=data[:, 5].copy(),
        weight_constant=float(meta.get("c", np.mean(data[:, 5] * data[:, 3]))),
        closure_defect=float(meta.get("closure_defect", 0.0)),
        meta=meta,
    )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj
