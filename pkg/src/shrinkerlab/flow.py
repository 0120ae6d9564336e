"""Rescaled curve-shortening flow of closed curves written as radial graphs.

Normal velocity is ``+phi N`` with ``N`` the outward principal normal, the
sign for which ``dF/ds = -||phi||^2_{L^2(rho)}``. For a radial graph
``r(theta)`` this reads

    r_s = r/2 - (r^2 + 2 r_t^2 - r r_tt) / (r (r^2 + r_t^2)),

linearizing about the circle of radius sqrt(2) to ``d_s = d + d_tt / 2``,
so mode ``j`` grows at rate ``1 - j^2/2``. Time stepping is IMEX Euler with
the constant-coefficient part ``a r_tt`` implicit in Fourier space.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fourier
from .curve import ClosedCurve

NONE = "none"
RECENTER = "recenter"
PROJECT_UNSTABLE = "project_unstable"
STABILIZATIONS = (NONE, RECENTER, PROJECT_UNSTABLE)
MAX_DT = 0.05
KAPPA_BLOWUP = 1e3
TWO_PI = 2.0 * math.pi


class FlowTerminationError(RuntimeError):
    def __init__(self, message, s, diagnostics=None):
        super().__init__(f"{message} at s={s:.6g}")
        self.s = s
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class FlowConfig:
    dt: float = 1e-3
    steps: int = 1000
    stabilization: str = PROJECT_UNSTABLE
    modes: tuple = (2,)
    amplitudes: tuple = (1e-2,)
    grid_size: int = 256
    radius: float = math.sqrt(2.0)
    sample_every: int = 10
    phi_floor: float = 0.0
    mode_count: int = 8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.dt > MAX_DT:
            raise ValueError(f"dt={self.dt} exceeds the stability guard {MAX_DT}")
        if self.grid_size < 64 or self.grid_size % 2:
            raise ValueError("grid_size must be even and >= 64")
        if self.stabilization not in STABILIZATIONS:
            raise ValueError(f"stabilization must be one of {STABILIZATIONS}")
        if len(self.modes) != len(self.amplitudes):
            raise ValueError("modes and amplitudes must have equal length")
        if self.steps < 0 or self.sample_every < 1:
            raise ValueError("steps must be >= 0 and sample_every >= 1")
        object.__setattr__(self, "modes", tuple(int(m) for m in self.modes))
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))

    def to_dict(self):
        return asdict(self)


def shrinker_scale(phi_l2):
    """``R`` with ``exp(-R^2/2) = ||phi||^2``; infinite when ``phi = 0``, zero once ``||phi|| >= 1``."""
    if phi_l2 <= 0:
        return math.inf
    v = -2.0 * math.log(phi_l2**2)
    return math.sqrt(v) if v > 0 else 0.0


def theta_grid(n):
    return np.arange(n) * (TWO_PI / n)


def radial_curve(r):
    t = theta_grid(r.size)
    return ClosedCurve.from_positions(r[:, None] * np.column_stack([np.cos(t), np.sin(t)]), TWO_PI)


@dataclass(frozen=True, eq=False)
class FlowState:
    r: np.ndarray
    s: float
    curve: ClosedCurve
    F: float
    phi_l2: float
    shrinker_scale: float
    mode_amplitudes: np.ndarray

    @classmethod
    def from_radius(cls, r, s=0.0, mode_count=8):
        r = np.asarray(r, dtype=float)
        c = radial_curve(r)
        phi = 0.5 * c.support_function() - c.kappa
        F = c.integrate(c.weight)
        norm = c.norm_rho(phi)
        return cls(r, float(s), c, F, norm, shrinker_scale(norm), fourier.mode_amplitudes(r, mode_count))

    def phi(self):
        return 0.5 * self.curve.support_function() - self.curve.kappa


def initial_radius(config):
    t = theta_grid(config.grid_size)
    r = np.ones_like(t)
    for j, a in zip(config.modes, config.amplitudes):
        r += a * np.cos(j * t)
    return config.radius * r


def radial_velocity(r):
    """Right-hand side ``r_s`` together with ``r_t`` and ``r_tt``."""
    rt = fourier.diff(r, TWO_PI)
    rtt = fourier.diff(r, TWO_PI, order=2)
    q = r * r + rt * rt
    return 0.5 * r - (r * r + 2.0 * rt * rt - r * rtt) / (r * q), rt, rtt


def _drop_low_modes(f, top):
    fh = np.fft.rfft(f)
    fh[:top] = 0.0
    return np.fft.irfft(fh, n=f.size)


def _recenter(r):
    """Resample the radial graph about its rho-weighted centroid."""
    c = radial_curve(r)
    w = c.weight * c.speed
    center = (w @ c.positions) / w.sum()
    if np.hypot(*center) < 1e-15:
        return r
    target = theta_grid(r.size)
    t = target.copy()
    for _ in range(8):
        rr = fourier.evaluate(r, TWO_PI, t)
        x = rr * np.cos(t) - center[0]
        y = rr * np.sin(t) - center[1]
        ang = np.arctan2(y, x)
        err = (ang - target + np.pi) % TWO_PI - np.pi
        rtt = fourier.evaluate(fourier.diff(r, TWO_PI), TWO_PI, t)
        dx = rtt * np.cos(t) - rr * np.sin(t)
        dy = rtt * np.sin(t) + rr * np.cos(t)
        dang = (x * dy - y * dx) / (x * x + y * y)
        t = t - err / dang
        if np.max(np.abs(err)) < 1e-14:
            break
    rr = fourier.evaluate(r, TWO_PI, t)
    return np.hypot(rr * np.cos(t) - center[0], rr * np.sin(t) - center[1])


def rmcf_step(state, config):
    """One IMEX Euler step; returns the new :class:`FlowState`."""
    r = state.r
    dt = config.dt
    vel, rt, _ = radial_velocity(r)
    a = float(np.max(1.0 / (r * r + rt * rt)))
    explicit = vel - a * fourier.diff(r, TWO_PI, order=2)
    k = fourier.wavenumbers(r.size, TWO_PI)
    if config.stabilization == PROJECT_UNSTABLE:
        # zero the j = 0, 1 content of the full update, then add back the implicit part
        rhs_hat = np.fft.fft(r + dt * explicit)
        rhs_hat[np.abs(k) < 1.5] = np.fft.fft(r)[np.abs(k) < 1.5]
    else:
        rhs_hat = np.fft.fft(r + dt * explicit)
    new = np.fft.ifft(rhs_hat / (1.0 + dt * a * k * k)).real
    if config.stabilization == RECENTER:
        new = _recenter(new)
    s = state.s + dt
    if not np.all(np.isfinite(new)) or np.min(new) <= 0:
        raise FlowTerminationError("radial graph lost (non-positive or non-finite radius)", s,
                                   {"min_r": float(np.nanmin(new))})
    nxt = FlowState.from_radius(new, s, config.mode_count)
    kmax = float(np.max(np.abs(nxt.curve.kappa)))
    if kmax > KAPPA_BLOWUP or np.min(nxt.curve.speed) <= 0:
        raise FlowTerminationError("curvature blow-up", s, {"kappa_max": kmax})
    return nxt


@dataclass
class Trajectory:
    config: FlowConfig
    states: list
    increase_total: float = 0.0
    stopped_early: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def s(self):
        return np.array([st.s for st in self.states])

    @property
    def F(self):
        return np.array([st.F for st in self.states])

    @property
    def phi_l2(self):
        return np.array([st.phi_l2 for st in self.states])

    def amplitudes(self, mode):
        return np.array([st.mode_amplitudes[mode] for st in self.states])


def simulate(config, r0=None):
    """Run the flow, sampling every ``sample_every`` steps.

    ``increase_total`` sums every per-step increase of ``F``; it measures
    the time-discretization budget for monotonicity.
    """
    r = initial_radius(config) if r0 is None else np.asarray(r0, dtype=float)
    state = FlowState.from_radius(r, 0.0, config.mode_count)
    states = [state]
    inc = 0.0
    stopped = False
    for i in range(1, config.steps + 1):
        nxt = rmcf_step(state, config)
        inc += max(nxt.F - state.F, 0.0)
        state = nxt
        if i % config.sample_every == 0 or i == config.steps:
            states.append(state)
        if state.phi_l2 < config.phi_floor:
            if states[-1] is not state:
                states.append(state)
            stopped = True
            break
    return Trajectory(config, states, inc, stopped)


def velocity_sign_check(radius=1.6, dt=1e-5):
    """Confirm on a round circle that the chosen sign gives ``dF/ds = -||phi||^2``."""
    cfg = FlowConfig(dt=dt, steps=1, stabilization=NONE, modes=(), amplitudes=(), radius=radius, sample_every=1)
    tr = simulate(cfg)
    a, b = tr.states
    dFds = (b.F - a.F) / dt
    target = -0.5 * (a.phi_l2**2 + b.phi_l2**2)
    return {"dF_ds": dFds, "minus_phi_sq": target, "ok": bool(abs(dFds - target) <= 1e-3 * abs(target))}


def energy_identity_check(traj):
    """Central difference of ``F`` in ``s`` against ``-||phi||^2`` at interior samples."""
    if len(traj.states) < 3:
        raise ValueError("energy identity needs at least three samples")
    s, F, phi = traj.s, traj.F, traj.phi_l2
    dF = (F[2:] - F[:-2]) / (s[2:] - s[:-2])
    target = -phi[1:-1] ** 2
    scale = np.max(np.abs(target))
    if scale == 0:
        return {"max_abs_mismatch": float(np.max(np.abs(dF))), "relative_mismatch": 0.0, "samples": int(dF.size)}
    return {
        "max_abs_mismatch": float(np.max(np.abs(dF - target))),
        "relative_mismatch": float(np.max(np.abs(dF - target)) / scale),
        "samples": int(dF.size),
    }


def energy_identity_order(config, refinements=2):
    """Relative mismatch for ``dt, dt/2, ...`` at fixed final time and its fitted order."""
    mism, dts = [], []
    for i in range(refinements + 1):
        f = 2**i
        cfg = FlowConfig(**{**config.to_dict(), "dt": config.dt / f, "steps": config.steps * f,
                            "sample_every": config.sample_every * f})
        mism.append(energy_identity_check(simulate(cfg))["relative_mismatch"])
        dts.append(cfg.dt)
    order = float(np.polyfit(np.log(dts), np.log(mism), 1)[0]) if all(m > 0 for m in mism) else float("nan")
    return {"dt": dts, "relative_mismatch": mism, "order": order}


def decay_rate_fit(traj, mode, s_min=0.0, s_max=math.inf, noise_floor=1e-11):
    """Least-squares slope of ``log`` amplitude of a Fourier mode of ``r`` against ``s``."""
    s = traj.s
    amp = traj.amplitudes(mode)
    sel = (s >= s_min) & (s <= s_max) & (amp > noise_floor)
    if sel.sum() < 3:
        raise ValueError(f"mode {mode}: fewer than three samples above the noise floor {noise_floor}")
    return float(np.polyfit(s[sel], np.log(amp[sel]), 1)[0])


def predicted_rate(j):
    return 1.0 - 0.5 * j * j


def comparison_bound(s, f0, c):
    """Solution of ``f' = -c f^(4/3)`` with ``f(0) = f0``."""
    return (c * np.asarray(s) / 3.0 + f0 ** (-1.0 / 3.0)) ** -3.0


def lojasiewicz_rate_bound_check(traj, C, F_limit, burn_in=0.0, tol=1e-12):
    """Check ``F - F_limit <= C ||phi||^(3/2)`` and the comparison bound along a run.

    ``c = C^(-4/3)`` is the rate constant of the differential inequality
    implied by combining the gradient inequality with ``dF/ds = -||phi||^2``.
    """
    s, F, phi = traj.s, traj.F, traj.phi_l2
    gap = F - F_limit
    if abs(gap[-1]) > max(abs(gap[0]), tol) or phi[-1] > phi[0]:
        raise ValueError("trajectory is not converging to the given limit")
    sel = s >= burn_in
    if gap[0] <= tol:
        return {"passed": bool(np.all(np.abs(gap) <= tol)), "c": math.nan, "gradient_violations": 0,
                "comparison_violations": 0, "max_gap": float(np.max(np.abs(gap)))}
    grad_ok = gap <= C * phi**1.5 + tol
    c = C ** (-4.0 / 3.0)
    bound = comparison_bound(s, gap[0], c)
    comp_ok = gap <= bound * (1.0 + 1e-9) + tol
    return {
        "passed": bool(np.all(grad_ok[sel]) and np.all(comp_ok[sel])),
        "c": c,
        "gradient_violations": int(np.sum(~grad_ok[sel])),
        "comparison_violations": int(np.sum(~comp_ok[sel])),
        "max_gradient_ratio": float(np.max(gap[sel] / np.maximum(C * phi[sel] ** 1.5, 1e-300))),
        "min_bound_margin": float(np.min(bound[sel] - gap[sel])),
    }


def write_trajectory_csv(path, traj, version=""):
    count = traj.config.mode_count
    with open(path, "w", newline="") as fh:
        fh.write("# " + json.dumps({"config": traj.config.to_dict(), "version": version}, sort_keys=True) + "\n")
        w = csv.writer(fh)
        w.writerow(["s", "F", "phi_l2", "shrinker_scale"] + [f"mode{j}" for j in range(count)])
        for st in traj.states:
            w.writerow([repr(st.s), repr(st.F), repr(st.phi_l2), repr(st.shrinker_scale)]
                       + [repr(float(a)) for a in st.mode_amplitudes])
