"""Command line entry point ``reviso``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import RevisoError


def _dump(obj, path=None):
    text = json.dumps(obj, indent=2, default=_default)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def _report_json(rep):
    return {
        "title": rep.title,
        "passed": rep.passed,
        "checks": [c.__dict__ for c in rep.checks],
        "data": rep.data,
    }


def cmd_john(a):
    from .geometry import load_polytope
    from .john import JohnConfig, decomposition_to_json, john_decomposition, verify_john

    P = load_polytope(a.inp)
    Q, (M, t), dec = john_decomposition(P, JohnConfig(rtol=a.tol))
    rep = verify_john(dec)
    out = decomposition_to_json(dec)
    out["transform"] = {"matrix": M, "shift": t}
    out["checks"] = _report_json(rep)
    _dump(out, a.out)
    return 0 if rep.passed else 1


def cmd_measure(a):
    from .measures import caratheodory_reduce, lift, load_measure, validate

    mu = load_measure(a.inp)
    if a.action == "validate":
        rep = validate(mu, a.tol)
        _dump(_report_json(rep), a.out)
        return 0 if rep.passed else 1
    if a.action == "reduce":
        red = caratheodory_reduce(mu)
        _dump(red.to_json(), a.out)
        return 0 if validate(red, a.tol).passed else 1
    L = lift(mu, a.tol)
    rep = L.check(a.tol)
    _dump({"vectors": L.vectors, "weights": L.weights, "checks": _report_json(rep)}, a.out)
    return 0 if rep.passed else 1


def cmd_zbody(a):
    from .measures import load_measure
    from .zbody import nearest_circumscribed_simplex, simplex_distance, volume_deficit, z_body

    mu = load_measure(a.measure)
    Z = z_body(mu)
    fit = simplex_distance(Z)
    S, dh = nearest_circumscribed_simplex(mu)
    out = {
        "volume": Z.volume,
        "deficit": volume_deficit(Z),
        "d": fit.d,
        "deltaH": dh,
        "witness_simplex": {"contacts": S.normals, "certificate": fit.certificate},
    }
    _dump(out, a.report)
    return 0 if out["deficit"] >= -1e-8 else 1


def cmd_transport(a):
    from .transport import gordon_mill_check, phi_bounds_check

    grid = np.geomspace(a.tmin, a.tmax, a.grid)
    rep = phi_bounds_check(grid)
    gm = [gordon_mill_check(z) for z in np.linspace(10 / 32, 10, 32)]
    ok = rep.passed and all(g.passed for g in gm)
    _dump({"phi": _report_json(rep), "gordon_mill_passed": all(g.passed for g in gm)}, a.out)
    return 0 if ok else 1


def cmd_witness(a):
    from .measures import load_measure
    from .transport import witness_integral
    from .zbody import z_body
    from .geometry import simplex_volume_formula

    mu = load_measure(a.measure)
    est, se, acc = witness_integral(mu, a.samples, a.seed)
    exact = z_body(mu).volume / simplex_volume_formula(mu.dim)
    ok = abs(est - exact) <= 3 * se + 1e-12
    _dump({"estimate": est, "stderr": se, "acceptance": acc, "exact": exact, "within_3se": ok}, a.out)
    return 0 if ok else 1


def cmd_dist(a):
    from .distances import delta_bm, delta_vol
    from .geometry import load_polytope

    K, M = load_polytope(a.a), load_polytope(a.b)
    r = delta_vol(K, M) if a.metric == "vol" else delta_bm(K, M)
    _dump({"metric": a.metric, "value": r.value, "certificate": r.certificate, "evaluations": r.evaluations}, a.out)
    return 0 if r.value >= 0 else 1


def cmd_planar(a):
    if a.action == "gustin":
        from .geometry import load_polytope
        from .planar import gustin_bound_check

        rep = gustin_bound_check(load_polytope(a.inp))
        _dump(_report_json(rep), a.out)
        return 0 if rep.passed else 1
    from .harness import eps_max, parse_grid, planar_bm_sweep

    eps = [e for e in parse_grid(a.eps_grid) if e < eps_max("corner-cut", 2)]
    rep, gamma = planar_bm_sweep(eps, seed=a.seed)
    _dump(_report_json(rep), a.out)
    return 0 if rep.passed else 1


def cmd_experiment(a):
    from .harness import ExperimentSpec, parse_grid, report_emit, run_experiment

    metrics = tuple(m for m in a.metrics.split(",") if m) if a.metrics is not None else ExperimentSpec.metrics
    spec = ExperimentSpec(a.family, a.dim, parse_grid(a.eps), a.seed, metrics, a.witness_samples)
    rep = run_experiment(spec)
    report_emit(rep, a.out, "csv")
    if a.plot:
        report_emit(rep, a.plot, "json")
    for k, (s, c, r2) in rep.fits.items():
        print(f"{k}: slope={s:.4f} C={c:.4g} r2={r2:.4f}", file=sys.stderr)
    for r in rep.rows:
        if r.error:
            print(f"eps={r.eps:.4g}: {r.error}", file=sys.stderr)
    return 0 if rep.ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="reviso", description="Stability of the reverse isoperimetric inequality: numerics.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("john", help="John position and contact decomposition")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--out")
    s.set_defaults(func=cmd_john)

    s = sub.add_parser("measure", help="validate, reduce or lift a spherical measure")
    s.add_argument("action", choices=["validate", "reduce", "lift"])
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--out")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("zbody", help="metrics of the circumscribed body Z(mu)")
    s.add_argument("--measure", required=True)
    s.add_argument("--report")
    s.set_defaults(func=cmd_zbody)

    s = sub.add_parser("transport", help="transport map checks")
    s.add_argument("action", choices=["check"])
    s.add_argument("--tmin", type=float, default=4.0)
    s.add_argument("--tmax", type=float, default=4096.0)
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--out")
    s.set_defaults(func=cmd_transport)

    s = sub.add_parser("witness", help="Monte Carlo witness integral")
    s.add_argument("--measure", required=True)
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("dist", help="affine distances between two bodies")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--metric", choices=["vol", "bm"], default="bm")
    s.add_argument("--out")
    s.set_defaults(func=cmd_dist)

    s = sub.add_parser("planar", help="planar checks")
    s.add_argument("action", choices=["gustin", "stability"])
    s.add_argument("--in", dest="inp")
    s.add_argument("--eps-grid", default="0.01:0.3:30")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_planar)

    s = sub.add_parser("experiment", help="stability experiments over body families")
    s.add_argument("action", choices=["run"])
    s.add_argument("--family", required=True)
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--eps", default="0.01:0.3:20")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--metrics", help="comma separated subset of delta_vol,delta_bm,d_z,delta_h,witness")
    s.add_argument("--witness-samples", type=int, default=20_000)
    s.add_argument("--out", required=True)
    s.add_argument("--plot", help="also write plot-data JSON here")
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "planar" and args.action == "gustin" and not args.inp:
        print("reviso planar gustin: --in is required", file=sys.stderr)
        return 2
    try:
        return int(args.func(args))
    except RevisoError as exc:
        print(f"reviso: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"reviso: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
