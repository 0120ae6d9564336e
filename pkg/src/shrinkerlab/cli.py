"""Command-line driver: one subcommand per experiment.

Exit codes: 0 when every asserted check passes, 1 on a failed check, 2 on a
usage error. Artifacts go to ``--output-dir``, defaulting to
``$SHRINKERLAB_OUTPUT_DIR`` or the working directory, and embed the resolved
configuration and the package version.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, acceptance, alcurve, curve, flow, gauss, obstruction, spectral, variation

OUTPUT_ENV = "SHRINKERLAB_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, allow_nan=True)


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _resolved(args):
    skip = {"func", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, name, results, passed):
    """Write ``<name>.json`` and print it; return the exit code."""
    doc = {"version": __version__, "command": args.command, "config": _resolved(args),
           "results": results, "passed": bool(passed)}
    text = _dumps(doc)
    out = _outdir(args) / f"{name}.json"
    out.write_text(text + "\n")
    print(text)
    return 0 if passed else 1


def _outdir(args):
    d = Path(args.output_dir or os.environ.get(OUTPUT_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load_curve(args):
    if getattr(args, "input", None):
        return curve.read_csv(args.input)
    if args.curve == "circle":
        return curve.circle(n=args.n)
    return alcurve.al_curve(args.p, args.q, n_points=args.n)


def cmd_moments(args):
    table = []
    ok = True
    for alpha, val in sorted(gauss.MOMENT_TABLE.items()):
        if sum(alpha) > args.max_degree:
            continue
        exact = gauss.gaussian_moment(alpha)
        rule = gauss.gauss_hermite_rule(len(alpha), max(sum(alpha), 1))
        quad = gauss.moment_by_quadrature(alpha, rule)
        row_ok = exact == val and abs(quad - float(exact)) <= 1e-10 * max(1.0, float(exact))
        ok &= row_ok
        table.append({"alpha": list(alpha), "exact": int(exact), "table": val, "quadrature": quad, "ok": row_ok})
    return _emit(args, "moments", {"table": table}, ok)


def cmd_al_solve(args):
    c = alcurve.al_curve(args.p, args.q, n_points=args.n)
    routes = alcurve.compute_B1(c)
    rk = c.weight * c.kappa
    res = {
        "kappa_max": c.meta.get("kappa_max"),
        "length": c.period,
        "rotation_index": c.rotation_index(),
        "closure_defect": c.closure_defect,
        "shrinker_residual": c.shrinker_residual(),
        "rho_kappa_spread": float((rk.max() - rk.min()) / rk.mean()),
        "gaussian_area": alcurve.gaussian_area(c),
        "B1_routes": [routes.route_a, routes.route_b, routes.route_c],
        "B1_spread": routes.spread(),
    }
    path = _outdir(args) / f"al_{args.p}_{args.q}.csv"
    curve.write_csv(c, path, header={"version": __version__, "c": c.weight_constant,
                                     "closure_defect": c.closure_defect})
    res["curve_csv"] = str(path)
    ok = res["closure_defect"] <= 1e-8 and res["shrinker_residual"] <= 1e-7 and routes.spread() <= 1e-6
    return _emit(args, f"al_{args.p}_{args.q}", res, ok)


def cmd_curve_check(args):
    c = curve.read_csv(args.input)
    rk = c.weight * c.kappa
    res = {
        "n": c.n,
        "shrinker_residual": c.shrinker_residual(),
        "rho_kappa_spread": float((rk.max() - rk.min()) / rk.mean()),
        "rotation_index": c.rotation_index(),
        "gaussian_area": alcurve.gaussian_area(c),
        "B1_spread": alcurve.compute_B1(c).spread(),
    }
    return _emit(args, "curve_check", res, res["shrinker_residual"] <= args.tol)


def cmd_spectrum(args):
    c = _load_curve(args)
    kind = spectral.DRIFT if args.operator == "drift" else spectral.JACOBI
    op = spectral.build_operator(c, kind)
    rep = spectral.spectrum_report(op, args.count)
    path = _outdir(args) / f"eigenfunctions_{args.operator}.csv"
    spectral.write_eigenfunctions_csv(path, c, spectral.eigensolve(op, args.count))
    rep["eigenfunctions_csv"] = str(path)
    return _emit(args, f"spectrum_{args.operator}", rep, True)


def cmd_verify_assumptions(args):
    c = _load_curve(args)
    rep = spectral.verify_assumptions(c)
    return _emit(args, "assumptions", rep.to_dict(), rep.passed)


def _invariants(args):
    if args.cross_section == "sphere":
        return obstruction.sphere_invariants(args.k)
    if args.cross_section == "circle":
        return obstruction.CrossSectionInvariants.from_curve(curve.circle(n=256))
    return obstruction.CrossSectionInvariants.from_curve(alcurve.al_curve(args.p, args.q, n_points=512), name="al")


def cmd_obstruction(args):
    rep = obstruction.run_ensemble(_invariants(args), dims=tuple(args.dims), count=args.count, seed=args.seed)
    return _emit(args, "obstruction", rep, rep["passed"])


def _direction(c, name):
    if name == "kappa":
        return variation.NormalField.from_values(c, c.kappa)
    if name.startswith("translation"):
        return variation.NormalField.from_values(c, c.normal[:, int(name[-1]) - 1 if name[-1].isdigit() else 0])
    if name.startswith("mode"):
        j = int(name[4:])
        return variation.NormalField.from_values(c, np.cos(2.0 * np.pi * j * c.param / c.period))
    raise UsageError(f"unknown direction {name!r}; use kappa, translation1, translation2 or modeJ")


def cmd_variation_check(args):
    c = _load_curve(args)
    v = _direction(c, args.direction)
    eps = tuple(args.eps)
    fv = variation.first_variation_check(v, eps)
    sv = variation.second_variation_check(v, eps)
    tr = variation.taylor_remainder_check(v, eps)
    fe = variation.F_expansion_check(v, eps)
    ok = (v.is_zero or (0.9 <= fv["slope"] <= 1.1 and tr["slope1"] >= 1.9 and tr["slope2"] >= 2.85)) and sv["passed"]
    return _emit(args, "variation_check", {"first": fv, "second": sv, "taylor": tr, "F_expansion": fe}, ok)


def cmd_lojasiewicz(args):
    bases = [curve.circle(n=256), alcurve.al_curve(2, 3, n_points=512)]
    amps = np.geomspace(args.min_amp, args.max_amp, args.amplitudes)
    rows = variation.lojasiewicz_samples(bases, args.directions, amps, seed=args.seed)
    out = variation.lojasiewicz_gradient_check(rows)
    path = _outdir(args) / "lojasiewicz_scatter.csv"
    variation.write_scatter_csv(path, rows)
    res = json.loads(out.to_json())
    res["scatter_csv"] = str(path)
    return _emit(args, "lojasiewicz", res, out.passed)


def cmd_flow(args):
    amps = args.amp if len(args.amp) == len(args.modes) else args.amp * len(args.modes)
    cfg = flow.FlowConfig(dt=args.dt, steps=args.steps, stabilization=args.stabilization, modes=tuple(args.modes),
                          amplitudes=tuple(amps), grid_size=args.grid, sample_every=args.sample_every,
                          phi_floor=args.phi_floor)
    traj = flow.simulate(cfg)
    path = _outdir(args) / "trajectory.csv"
    flow.write_trajectory_csv(path, traj, __version__)
    res = {"trajectory_csv": str(path), "final": {"s": traj.states[-1].s, "F": traj.states[-1].F,
                                                   "phi_l2": traj.states[-1].phi_l2},
           "F_increase_total": traj.increase_total, "rates": {}}
    ok = True
    for j in args.modes:
        if j >= 2:
            try:
                rate = flow.decay_rate_fit(traj, j, s_min=min(0.5, traj.states[-1].s / 4))
            except ValueError as exc:
                res["rates"][str(j)] = {"error": str(exc)}
                continue
            pred = flow.predicted_rate(j)
            good = abs(rate - pred) <= 0.05 * abs(pred)
            res["rates"][str(j)] = {"fitted": rate, "predicted": pred, "ok": good}
            ok &= good
    return _emit(args, "flow", res, ok)


def cmd_report(args):
    inject = {}
    if args.inject == "moment-table":
        bad = dict(gauss.MOMENT_TABLE)
        bad[(4,)] = 13
        inject["moment_table"] = bad
    results = acceptance.report_suite(seed=args.seed, inject=inject)
    for r in results:
        print(r.summary_line(), file=sys.stderr)
    doc = acceptance.suite_json_dict(results, seed=args.seed)
    text = _dumps(doc)
    (_outdir(args) / "report.json").write_text(text + "\n")
    print(text)
    return 0 if doc["passed"] else 1


def _curve_args(p):
    p.add_argument("--curve", choices=("circle", "al"), default="al")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--input", help="curve CSV instead of a generated curve")


def build_parser():
    parser = argparse.ArgumentParser(prog="shrinkerlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=None)
    common.add_argument("--config", help="JSON file of option defaults; unknown keys are rejected")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moments", parents=[common], help="Gaussian moment table and quadrature oracle")
    p.add_argument("--max-degree", type=int, default=6)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("al-solve", parents=[common], help="shoot a closed shrinker curve")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--n", type=int, default=512)
    p.set_defaults(func=cmd_al_solve)

    p = sub.add_parser("curve-check", parents=[common], help="invariants of a curve CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_curve_check)

    p = sub.add_parser("spectrum", parents=[common], help="drift or Jacobi spectrum")
    _curve_args(p)
    p.add_argument("--operator", choices=("drift", "jacobi"), default="jacobi")
    p.add_argument("--count", type=int, default=12)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify-assumptions", parents=[common], help="check A1 and A2")
    _curve_args(p)
    p.set_defaults(func=cmd_verify_assumptions)

    p = sub.add_parser("obstruction", parents=[common], help="obstruction identity and lower bound ensembles")
    p.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cross-section", choices=("circle", "al", "sphere"), default="circle")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--q", type=int, default=3)
    p.set_defaults(func=cmd_obstruction)

    p = sub.add_parser("variation-check", parents=[common], help="finite-difference variation checks")
    _curve_args(p)
    p.add_argument("--direction", default="kappa")
    p.add_argument("--eps", type=float, nargs="+", default=list(variation.DEFAULT_EPS))
    p.set_defaults(func=cmd_variation_check)

    p = sub.add_parser("lojasiewicz", parents=[common], help="gradient inequality ensemble")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--directions", type=int, default=26)
    p.add_argument("--amplitudes", type=int, default=10)
    p.add_argument("--min-amp", type=float, default=1e-4)
    p.add_argument("--max-amp", type=float, default=1e-2)
    p.set_defaults(func=cmd_lojasiewicz)

    p = sub.add_parser("flow", parents=[common], help="rescaled curve-shortening flow")
    p.add_argument("--modes", type=int, nargs="+", default=[2])
    p.add_argument("--amp", type=float, nargs="+", default=[1e-2])
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=8000)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--sample-every", type=int, default=20)
    p.add_argument("--phi-floor", type=float, default=0.0)
    p.add_argument("--stabilization", choices=flow.STABILIZATIONS, default=flow.PROJECT_UNSTABLE)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("report", parents=[common], help="run the acceptance battery")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject", choices=("moment-table",), help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_report)
    return parser


def _apply_config(parser, args, argv):
    if not getattr(args, "config", None):
        return args
    with open(args.config) as fh:
        data = json.load(fh)
    known = set(_resolved(args))
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown configuration keys: {', '.join(unknown)}")
    # command-line flags override the file
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in data.items()})
    return parser.parse_args(argv)


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(parser, args, argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
