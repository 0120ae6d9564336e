"""Acceptance battery AC-1 .. AC-9.

Each criterion returns a :class:`CriterionResult` holding one
:class:`ReportRow` per sub-check. ``report_suite`` runs them in dependency
order (AC-8 uses the constant certified by AC-7) and returns a JSON-ready
mapping that is deterministic for a fixed seed: wall-clock runtimes are
only summarized as a within-budget flag.
"""

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import erfc

from . import __version__, alcurve, curve, flow, gauss, obstruction, spectral, variation

PASS, FAIL = "pass", "fail"


@dataclass
class ReportRow:
    check_id: str
    anchor: str
    value: object
    tolerance: float = None
    expected: object = None
    status: str = None

    def __post_init__(self):
        if self.status is None:
            if self.expected is not None:
                ok = abs(self.value - self.expected) <= self.tolerance
            else:
                ok = bool(self.value)
            self.status = PASS if ok else FAIL

    @property
    def passed(self):
        return self.status == PASS

    def to_dict(self):
        def clean(v):
            if isinstance(v, (bool, np.bool_)):
                return bool(v)
            if isinstance(v, (Fraction,)):
                return str(v)
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            return v

        return {"check_id": self.check_id, "anchor": self.anchor, "value": clean(self.value),
                "expected": clean(self.expected), "tolerance": self.tolerance, "status": self.status}


@dataclass
class CriterionResult:
    criterion: str
    title: str
    budget: float
    rows: list = field(default_factory=list)
    runtime: float = 0.0
    error: str = None
    extras: dict = field(default_factory=dict)

    @property
    def within_budget(self):
        return self.runtime <= self.budget

    @property
    def passed(self):
        return self.error is None and self.within_budget and all(r.passed for r in self.rows)

    def summary_line(self):
        failing = [r.check_id for r in self.rows if not r.passed]
        tail = f" failing: {', '.join(failing)}" if failing else ""
        if self.error:
            tail += f" error: {self.error}"
        if not self.within_budget:
            tail += f" over budget ({self.runtime:.1f}s > {self.budget:.0f}s)"
        return f"{self.criterion} {'PASS' if self.passed else 'FAIL'} {self.title} [{self.runtime:.2f}s]{tail}"

    def to_dict(self):
        return {"title": self.title, "status": PASS if self.passed else FAIL, "budget_s": self.budget,
                "within_budget": self.within_budget, "error": self.error,
                "rows": [r.to_dict() for r in self.rows]}


def _timed(criterion, title, budget):
    def deco(fn):
        def run(*args, **kwargs):
            res = CriterionResult(criterion, title, budget)
            t0 = time.perf_counter()
            try:
                fn(res, *args, **kwargs)
            except Exception as exc:  # aggregated, never dropped
                res.error = f"{type(exc).__name__}: {exc}"
            res.runtime = time.perf_counter() - t0
            return res

        run.__name__ = fn.__name__
        return run

    return deco


def _indices(m, max_degree):
    for alpha in itertools.product(range(max_degree + 1), repeat=m):
        if sum(alpha) % 2 == 0 and sum(alpha) <= max_degree:
            yield alpha


@_timed("AC-1", "Gaussian moment table", 1.0)
def ac1_moments(res, table=None):
    table = gauss.MOMENT_TABLE if table is None else table
    for alpha, val in sorted(table.items()):
        res.rows.append(ReportRow(f"table{alpha}", "Gaussian moment table",
                                  gauss.gaussian_moment(alpha) == Fraction(val)))
    worst = 0.0
    for m in (1, 2, 3):
        rule = gauss.gauss_hermite_rule(m, 8)
        for alpha in _indices(m, 8):
            exact = float(gauss.gaussian_moment(alpha))
            worst = max(worst, abs(gauss.moment_by_quadrature(alpha, rule) - exact) / max(1.0, exact))
    res.rows.append(ReportRow("quadrature_agreement", "moment oracle", worst, 1e-10, 0.0))


def _circle_invariants():
    return obstruction.CrossSectionInvariants.from_curve(curve.circle(n=256))


@_timed("AC-2", "obstruction identity I = 64 sum a_bi^2", 10.0)
def ac2_identity(res, seed=0, count=1000):
    rep = obstruction.run_ensemble(_circle_invariants(), count=count, seed=seed)
    for dim, d in rep["dims"].items():
        res.rows.append(ReportRow(f"dim{dim}_identity", "brute-force moment expansion",
                                  d["identity_max_rel_error"], 1e-10, 0.0))
    res.extras["ensemble"] = rep


@_timed("AC-3", "obstruction lower bound", 10.0)
def ac3_lower_bound(res, seed=0, count=1000):
    rep = obstruction.run_ensemble(_circle_invariants(), count=count, seed=seed)
    for dim, d in rep["dims"].items():
        res.rows.append(ReportRow(f"dim{dim}_violations", "delta lower bound", d["violations"], 0, 0))
    d1 = rep["dims"]["1"]
    res.rows.append(ReportRow("dim1_equality", "single-term equality",
                              max(abs(d1["min_ratio"] - 1.0), abs(d1["max_ratio"] - 1.0)), 1e-12, 0.0))


@_timed("AC-4", "shrinker curves and B1", 30.0)
def ac4_curves(res):
    al = alcurve.al_curve(2, 3, n_points=512)
    turning_defect = abs(al.total_turning() - 2.0 * math.pi * al.rotation_index())
    res.rows.append(ReportRow("al_closure", "closed AL(2,3)", max(al.closure_defect, turning_defect), 1e-8, 0.0))
    res.rows.append(ReportRow("al_shrinker_residual", "shrinker equation", al.shrinker_residual(), 1e-7, 0.0))
    rk = al.weight * al.kappa
    res.rows.append(ReportRow("al_weight_relation", "rho kappa constant",
                              float((rk.max() - rk.min()) / rk.mean()), 1e-8, 0.0))
    routes = alcurve.compute_B1(al)
    res.rows.append(ReportRow("al_B1_routes", "B1 three routes", routes.spread(), 1e-6, 0.0))
    res.rows.append(ReportRow("al_B1_negative", "B1 < 0", routes.route_c < 0))
    circ = curve.circle(n=512)
    F_closed = math.sqrt(2.0 * math.pi) * math.exp(-0.5)
    res.rows.append(ReportRow("circle_F", "circle Gaussian area", alcurve.gaussian_area(circ), 1e-9, F_closed))
    res.rows.append(ReportRow("circle_B1", "circle B1", alcurve.compute_B1(circ).route_a, 1e-9, -F_closed / 8.0))
    res.extras.update(al_B1=routes.route_a, al_F=alcurve.gaussian_area(al))


@_timed("AC-5", "assumptions A1-A2", 60.0)
def ac5_assumptions(res):
    for name, c in (("circle", curve.circle(n=512)), ("al23", alcurve.al_curve(2, 3, n_points=512))):
        a1, a2 = spectral.verify_A1(c), spectral.verify_A2(c)
        res.rows.append(ReportRow(f"{name}_A1_residual", "coordinates in -1/2 eigenspace",
                                  max(a1.coordinate_residuals), 1e-5, 0.0))
        res.rows.append(ReportRow(f"{name}_A1_dimension", "-1/2 eigenspace dimension", a1.cluster_dimension, 0, 2))
        res.rows.append(ReportRow(f"{name}_A1_angle", "subspace angle", a1.subspace_angle, 1e-5, 0.0))
        res.rows.append(ReportRow(f"{name}_A2_residual", "Jacobi identities",
                                  max(a2.identity_residuals.values()), 1e-5, 0.0))
        res.rows.append(ReportRow(f"{name}_A2_multiplicities", "Jacobi multiplicities",
                                  all(a2.multiplicities[k] == v for k, v in a2.expected.items())))
        res.rows.append(ReportRow(f"{name}_A2_no_stray", "no Jacobi eigenvalue above 1", a2.passed))


def _circle_directions(c):
    s2 = math.sqrt(2.0)
    return {
        "dilation": variation.NormalField.from_values(c, c.kappa),
        "mode2": variation.NormalField.from_values(c, np.cos(2.0 * c.param / s2)),
        "translation": variation.NormalField.from_values(c, c.normal[:, 0]),
    }


@_timed("AC-6", "variation formulas", 60.0)
def ac6_variation(res):
    c = curve.circle(n=256)
    al = alcurve.al_curve(2, 3, n_points=512)
    for name, v in _circle_directions(c).items():
        fv = variation.first_variation_check(v)
        res.rows.append(ReportRow(f"first_{name}_slope", "first variation", fv["slope"], 0.1, 1.0))
        res.rows.append(ReportRow(f"first_{name}_limit", "first variation limit", fv["limit_error"], 1e-6, 0.0))
    mixed = variation.NormalField.from_values(
        c, np.cos(2.0 * c.param / math.sqrt(2.0)) + 0.5 * np.sin(3.0 * c.param / math.sqrt(2.0)))
    t = 2.0 * np.pi * al.param / al.period
    al_dirs = {"kappa": variation.NormalField.from_values(al, al.kappa),
               "mixed": variation.NormalField.from_values(al, np.cos(3 * t) + 0.5 * np.sin(5 * t))}
    for name, v in (("circle_mixed", mixed), ("al_kappa", al_dirs["kappa"]), ("al_mixed", al_dirs["mixed"])):
        tr = variation.taylor_remainder_check(v)
        res.rows.append(ReportRow(f"taylor1_{name}", "first-order remainder", tr["slope1"] >= 1.9))
        res.rows.append(ReportRow(f"taylor2_{name}", "second-order remainder", tr["slope2"] >= 2.85))
    for name, v in (("circle_mode2", _circle_directions(c)["mode2"]), ("circle_mixed", mixed),
                    ("al_kappa", al_dirs["kappa"]), ("al_mixed", al_dirs["mixed"])):
        sv = variation.second_variation_check(v)
        res.rows.append(ReportRow(f"second_{name}", "second variation normal part", sv["passed"]))


@_timed("AC-7", "gradient Lojasiewicz inequality", 300.0)
def ac7_lojasiewicz(res, seed=0):
    bases = [curve.circle(n=256), alcurve.al_curve(2, 3, n_points=512)]
    rows = variation.lojasiewicz_samples(bases, seed=seed)
    out = variation.lojasiewicz_gradient_check(rows)
    res.rows.append(ReportRow("samples", "ensemble size", out.samples >= 500))
    res.rows.append(ReportRow("violations", "single certifying C", out.violations, 0, 0))
    res.rows.append(ReportRow("min_exponent", "local exponent >= 3/2", out.min_local_exponent >= 1.5))
    res.extras.update(C=out.C, median_exponent=out.median_local_exponent, min_exponent=out.min_local_exponent)


@_timed("AC-8", "flow dynamics", 300.0)
def ac8_flow(res, C=None):
    F_circle = math.sqrt(2.0 * math.pi) * math.exp(-0.5)
    tr2 = flow.simulate(flow.FlowConfig(dt=1e-3, steps=8000, modes=(2,), amplitudes=(1e-2,), sample_every=20))
    tr3 = flow.simulate(flow.FlowConfig(dt=1e-3, steps=4000, modes=(3,), amplitudes=(1e-2,), sample_every=20))
    res.rows.append(ReportRow("mode2_rate", "Jacobi eigenvalue 1 - j^2/2", flow.decay_rate_fit(tr2, 2, s_min=0.5), 0.05, -1.0))
    res.rows.append(ReportRow("mode3_rate", "Jacobi eigenvalue 1 - j^2/2", flow.decay_rate_fit(tr3, 3, s_min=0.5), 0.15, -3.5))
    order = flow.energy_identity_order(flow.FlowConfig(dt=2e-3, steps=500, stabilization=flow.NONE,
                                                       modes=(2,), amplitudes=(1e-2,), sample_every=5))
    m = order["relative_mismatch"]
    res.rows.append(ReportRow("energy_identity_first_order", "dF/ds = -||phi||^2",
                              all(b < a for a, b in zip(m, m[1:])) and abs(order["order"] - 1.0) <= 0.25))
    for name, tr in (("mode2", tr2), ("mode3", tr3)):
        theta = tr.config.dt**2 * tr.states[0].phi_l2**2
        res.rows.append(ReportRow(f"{name}_monotone", "F non-increasing", tr.increase_total, theta, 0.0))
    if C is None:
        C = ac7_lojasiewicz().extras["C"]
    for name, tr in (("mode2", tr2), ("mode3", tr3)):
        rep = flow.lojasiewicz_rate_bound_check(tr, C, F_circle)
        res.rows.append(ReportRow(f"{name}_comparison_bound", "Lojasiewicz comparison bound", rep["passed"]))
    res.extras.update(energy_order=order["order"], final_phi_mode2=tr2.states[-1].phi_l2)


def _bump_ensemble(rule, rng, count=40, radius=6.0):
    y = rule.nodes
    s = np.sum(y**2, axis=1) / radius**2
    inside = s < 1.0
    b = np.zeros_like(s)
    b[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    db = np.zeros_like(y)
    db[inside] = (b[inside] * (-1.0 / (1.0 - s[inside]) ** 2))[:, None] * (2.0 * y[inside] / radius**2)
    d = y.shape[1]
    for _ in range(count):
        c0 = rng.standard_normal()
        c1 = rng.standard_normal(d)
        c2 = rng.standard_normal((d, d))
        c2 = 0.5 * (c2 + c2.T)
        p = c0 + y @ c1 + np.einsum("ni,ij,nj->n", y, c2, y)
        dp = c1[None, :] + 2.0 * y @ c2
        yield p * b, dp * b[:, None] + p[:, None] * db


@_timed("AC-9", "Gaussian tail and Poincare inequalities", 5.0)
def ac9_gaussian(res, seed=0):
    radii = np.linspace(1.0, 10.0, 451)
    bounded = True
    for n in (1, 2, 3):
        for m in range(7):
            ratio = gauss.cutoff_ratio(n, m, radii)
            tail_mono = np.all(np.diff(ratio[radii >= 5.0]) <= 0)
            bounded &= bool(np.all(np.isfinite(ratio)) and tail_mono)
    res.rows.append(ReportRow("tail_ratio_bounded", "cutoff tail bound shape", bounded))
    res.rows.append(ReportRow("tail_erfc_anchor", "radial closed form", gauss.cutoff_tail(1, 0, 2.0), 1e-12,
                              2.0 * math.sqrt(math.pi) * erfc(1.0)))
    gh = gauss.gauss_hermite_rule(1, 6)
    y = gh.nodes[:, 0]
    lhs, rhs = gauss.gaussian_poincare_check(np.ones_like(y), np.zeros((y.size, 1)), gh)
    res.rows.append(ReportRow("poincare_constant", "anchor 1/2 <= 1", abs(lhs - 0.5) + abs(rhs - 1.0), 1e-12, 0.0))
    lhs, rhs = gauss.gaussian_poincare_check(y, np.ones((y.size, 1)), gh)
    res.rows.append(ReportRow("poincare_linear", "anchor 3 <= 6", abs(lhs - 3.0) + abs(rhs - 6.0), 1e-12, 0.0))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for d, pts in ((1, 801), (2, 121)):
        rule = gauss.uniform_grid_rule(d, points=pts, half_width=6.0)
        for u, g in _bump_ensemble(rule, rng):
            lhs, rhs = gauss.gaussian_poincare_check(u, g, rule)
            worst = max(worst, lhs / rhs)
    res.rows.append(ReportRow("poincare_ensemble", "lhs <= rhs on random bumps", worst <= 1.0))
    res.extras["poincare_worst_ratio"] = worst


def report_suite(seed=0, inject=None):
    """Run AC-1 .. AC-9; ``inject`` may corrupt inputs for fault-injection tests.

    Supported injections: ``{"moment_table": {...}}`` replaces the table AC-1
    checks against.
    """
    inject = inject or {}
    results = [
        ac1_moments(table=inject.get("moment_table")),
        ac2_identity(seed=seed),
        ac3_lower_bound(seed=seed),
        ac4_curves(),
        ac5_assumptions(),
        ac6_variation(),
    ]
    ac7 = ac7_lojasiewicz(seed=seed)
    results.append(ac7)
    results.append(ac8_flow(C=ac7.extras.get("C")))
    results.append(ac9_gaussian(seed=seed))
    return results


def suite_json_dict(results, seed=0):
    return {
        "version": __version__,
        "seed": seed,
        "criteria": {r.criterion: r.to_dict() for r in results},
        "passed": all(r.passed for r in results),
    }
