"""Command-line surface: sweep, trace, optimum, synth, bounds, parse-check.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import os
import sys

from . import dataio, experiments
from .sampling import SamplerKind
from .solvers import SolverConfig, run_solver


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="recycle-opt",
        description="Budgeted stochastic solvers and sample-size experiments "
                    "for L2-regularized smoothed-hinge classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset as LIBSVM text")
    p.add_argument("--kind", choices=["pathological", "gaussian"], required=True)
    p.add_argument("--m", type=int, default=10, help="pathological: number of points")
    p.add_argument("--n", type=int, default=1000, help="gaussian: number of points")
    p.add_argument("--d", type=int, default=4, help="gaussian: dimension")
    p.add_argument("--noise", type=float, default=0.0, help="gaussian: label flip probability")
    p.add_argument("--mean-norm", type=float, default=2.0, help="gaussian: class mean norm")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("trace", help="single budgeted run with a trajectory CSV")
    p.add_argument("--algo", choices=["sgd", "sdca", "sag", "svrg"], required=True)
    p.add_argument("--sampler", choices=["iid", "perm", "cyclic"], default="iid")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--record-every", type=int, default=100)
    p.add_argument("--stepsize", type=float, help="required for sag/svrg")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-10,
                   help="duality-gap tolerance of the reference optimum")
    p.add_argument("--no-reference", action="store_true",
                   help="skip the reference solve; suboptimality columns become N/A")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.add_argument("--alpha-out", help="optional per-epoch dual snapshot CSV (SDCA)")

    p = sub.add_parser("optimum", help="certify a reference optimum by duality gap")
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--w-out", help="optional path for the solution vector, one value per line")

    p = sub.add_parser("sweep", help="run a (T, c, lambda) sweep from a config file")
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--out-dir", default=".", help="directory for sweep.csv and manifest.json")

    p = sub.add_parser("bounds", help="evaluate the error-decomposition bound curves")
    p.add_argument("--norm-w0", type=float, required=True, help="norm of the reference predictor")
    p.add_argument("--risk-w0", type=float, default=0.0)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1e-3)
    p.add_argument("--policy", choices=["fixed", "minimized"], default="minimized")
    p.add_argument("--out", required=True)

    p = sub.add_parser("parse-check", help="validate a LIBSVM file")
    p.add_argument("--data", required=True)

    return parser


def _load_data(path):
    try:
        return dataio.parse_libsvm(path)
    except OSError as exc:
        raise dataio.ParseError("cannot read %s: %s" % (path, exc))


def _cmd_synth(args):
    if args.kind == "pathological":
        data = experiments.synth_pathological(args.m, seed=args.seed)
    else:
        data = experiments.synth_gaussian(
            args.n, args.d, margin_noise=args.noise, seed=args.seed,
            mean_norm=args.mean_norm,
        )
    dataio.write_libsvm(data, args.out)
    print("wrote %d examples (dim %d) to %s" % (len(data), data.dim, args.out))
    return 0


def _cmd_trace(args):
    data = _load_data(args.data)
    reference = None
    if not args.no_reference:
        reference = experiments.reference_optimum(
            data, args.lam, args.tol, gamma=args.gamma,
            seed=args.seed ^ 0x5EED,
        )
    config = SolverConfig(
        algorithm=args.algo, lam=args.lam, budget=args.T, seed=args.seed,
        sampler=SamplerKind.parse(args.sampler), stepsize=args.stepsize,
        gamma=args.gamma,
    )
    _, record = run_solver(config, data, record_every=args.record_every,
                           reference=reference)
    dataio.write_trajectory_csv(record, args.out)
    if args.alpha_out:
        dataio.write_alpha_snapshots_csv(record, args.alpha_out)
    print("recorded %d points to %s" % (len(record), args.out))
    return 0


def _cmd_optimum(args):
    data = _load_data(args.data)
    ref = experiments.reference_optimum(data, args.lam, args.tol,
                                        gamma=args.gamma, seed=args.seed)
    print("dual_value = %s" % repr(ref.dual_value))
    print("primal_optimum_in = [%s, %s]" % (repr(ref.lower), repr(ref.upper)))
    print("steps = %d" % ref.steps)
    if args.w_out:
        with open(args.w_out, "w", encoding="ascii") as handle:
            for value in ref.w:
                handle.write(repr(float(value)) + "\n")
    return 0


def _cmd_sweep(args):
    raw = dataio.read_config(args.config)
    if "data" not in raw:
        raise dataio.ParseError("sweep config must name a 'data' file")
    data_path = raw["data"]
    config = experiments.SweepConfig.from_mapping(raw)
    pool = _load_data(data_path)
    result = experiments.run_sweep(config, pool)
    os.makedirs(args.out_dir, exist_ok=True)
    sweep_path = os.path.join(args.out_dir, "sweep.csv")
    manifest_path = os.path.join(args.out_dir, "manifest.json")
    dataio.write_sweep_csv(result, sweep_path)
    dataio.write_manifest(result, manifest_path, data_path=data_path)
    for row in result.optimal:
        print("T=%d optimal c=%s error=%s (c=1 error: %s)" % (
            row.T, row.optimal_c, row.error_at_optimal_c, row.error_at_c1))
    print("wrote %s, %s and %s" % (
        sweep_path, dataio.companion_optimal_path(sweep_path), manifest_path))
    return 0


def _cmd_bounds(args):
    params = experiments.BoundParams(
        norm_w0=args.norm_w0, d=args.d, T=args.T, lam=args.lam, risk_w0=args.risk_w0,
    )
    sgd = experiments.bound_curves(params, "sgd", args.policy)
    rv = experiments.bound_curves(params, "rv", args.policy)
    dataio.write_bounds_csv(sgd, rv, args.out)
    print("sgd argmin c = %s, rv argmin c = %s" % (
        sgd.c_values[int(sgd.values.argmin())], rv.c_values[int(rv.values.argmin())]))
    return 0


def _cmd_parse_check(args):
    data = _load_data(args.data)
    positives = int((data.labels > 0).sum())
    print("%s: %d examples, dim %d, %d non-zeros, %d positive / %d negative"
          % (args.data, len(data), data.dim, data.values.size,
             positives, len(data) - positives))
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "trace": _cmd_trace,
    "optimum": _cmd_optimum,
    "sweep": _cmd_sweep,
    "bounds": _cmd_bounds,
    "parse-check": _cmd_parse_check,
}


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return _COMMANDS[args.command](args)
    except (dataio.ParseError,) as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return 2
    except (ValueError, RuntimeError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
