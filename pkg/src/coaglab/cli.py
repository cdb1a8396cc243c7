"""Command line front end: ``coaglab {contract,crossval,gel-rate,profile,transform}``.

Exit status: 0 when every enabled check passes, 1 when a check fails,
2 for usage or configuration errors, 3 for numerical errors (the message
starts with the error code).
"""

import argparse
import sys

from . import harness
from .errors import CoagError, ConfigError
from .transforms import curve_to_csv, write_curve

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _common(p, kernel=True):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--preset", choices=sorted(harness.PRESETS))
    if kernel:
        p.add_argument("--kernel", choices=["const", "add", "mult"])
    p.add_argument("--g1", help="first density: catalog name, 'profile' or CSV path")
    p.add_argument("--g2", help="second density: catalog name, 'profile' or CSV path")
    p.add_argument("--kappa", type=float, action="append", help="weight exponent (repeatable)")
    p.add_argument("--tau-max", type=float, help="last checkpoint (step 0.25)")
    p.add_argument("--checkpoints", help="comma separated checkpoints")
    p.add_argument("--solver", choices=harness.SOLVERS)
    p.add_argument("--out", help="output directory")
    p.add_argument("--allow-out-of-range", action="store_true", default=None,
                   help="accept kappa outside the contraction range (reported, not checked)")
    p.add_argument("--tolerance", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="coaglab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("contract", help="distances and contraction rates for a pair"))
    _common(sub.add_parser("crossval", help="transform flow against the physical solver"))
    _common(sub.add_parser("gel-rate", help="multiplicative decay against 1 - t"))
    p = sub.add_parser("profile", help="write the exact self-similar profile")
    p.add_argument("--kernel", choices=["const", "add", "mult"], required=True)
    p.add_argument("--out", help="output directory (default: transform CSV on stdout)")
    p = sub.add_parser("transform", help="transform of a density CSV")
    p.add_argument("density", help="CSV file with columns x,value")
    p.add_argument("--kernel", choices=["const", "add", "mult"], required=True)
    p.add_argument("--normalize", action="store_true", help="rescale into the kernel's class first")
    p.add_argument("--out", help="output CSV (default: stdout)")
    return parser


def config_from_args(args) -> harness.ExperimentConfig:
    file_values = harness.read_config_file(args.config) if args.config else {}
    overrides = {
        "preset": args.preset,
        "kernel": args.kernel,
        "g1": args.g1,
        "g2": args.g2,
        "kappas": tuple(args.kappa) if args.kappa else None,
        "tau_max": args.tau_max,
        "solver": args.solver,
        "output_dir": args.out,
        "allow_out_of_range": args.allow_out_of_range,
        "tolerance": args.tolerance,
    }
    if args.checkpoints:
        key = "t_checkpoints" if args.command == "gel-rate" else "taus"
        overrides[key] = args.checkpoints
    return harness.make_config(None, file_values, overrides)


def _contract(args, out):
    report, ok = harness.run_contraction(config_from_args(args))
    out.write(report.to_json() + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def _crossval(args, out):
    report = harness.run_crossval(config_from_args(args))
    out.write(report.to_json() + "\n")
    if not report.passed:
        sys.stderr.write(f"crossval failed: worst discrepancy {report.worst:.3e} at "
                         f"tau={report.worst_tau:g}, eta={report.worst_eta:.4g}\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def _gel_rate(args, out):
    report = harness.run_original_time_rate(config_from_args(args))
    out.write(report.to_json() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def _profile(args, out):
    _, curve = harness.run_profile(args.kernel, output_dir=args.out)
    if not args.out:
        out.write(curve_to_csv(curve))
    return EXIT_OK


def _transform(args, out):
    curve = harness.run_transform(args.density, args.kernel, normalize=args.normalize)
    if args.out:
        write_curve(args.out, curve)
    else:
        out.write(curve_to_csv(curve))
    return EXIT_OK


COMMANDS = {
    "contract": _contract,
    "crossval": _crossval,
    "gel-rate": _gel_rate,
    "profile": _profile,
    "transform": _transform,
}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except ConfigError as exc:
        sys.stderr.write(f"error[{exc.code}]: {exc}\n")
        return EXIT_CONFIG
    except CoagError as exc:
        sys.stderr.write(f"error[{exc.code}]: {exc}\n")
        return EXIT_NUMERIC
    except OSError as exc:
        sys.stderr.write(f"error[io]: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
