"""Command line entry point.

Exit codes: 0 when every check passes (or is skipped), 1 when any check fails,
2 on configuration, I/O or solver errors.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from . import manifolds as mf
from .checks import run_scenario
from .errors import CurvlabError
from .report import ReportIOError, emit_report
from .scenario import CheckSpec, build_manifold, load_scenario

SINGLE_CHECK = {
    "stability": "stability",
    "theorem1": "theorem1",
    "theorem2": "theorem2",
    "corollary1": "corollary1",
}


def _common(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=default, help="scenario JSON")
    parser.add_argument("--seed", type=int, default=default)
    parser.add_argument("--samples", type=int, default=default)
    parser.add_argument("--tol", type=float, default=default, help="override every check tolerance")
    parser.add_argument("--out", metavar="PATH", default=default, help="write output here instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], default=default)


def build_parser():
    p = argparse.ArgumentParser(prog="curvlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"curvlab {__version__}")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("catalog", help="list manifold kinds and checks")
    c = sub.add_parser("curvature", help="CSV of s, |W|, |z| at sample points")
    _common(c, suppress=True)
    v = sub.add_parser("verify", help="run the checks listed in the scenario")
    _common(v, suppress=True)
    for name in SINGLE_CHECK:
        sp = sub.add_parser(name, help=f"run only the {name} check")
        _common(sp, suppress=True)
        sp.add_argument("--sigma-inject", default=None, help="synthetic sigma expression (theorem modes)")
    r = sub.add_parser("report", help="run a scenario file and emit the full report")
    r.add_argument("input", help="scenario JSON")
    _common(r, suppress=True)
    return p


def _scenario(args, path=None):
    path = path or args.config
    if path is None:
        raise CurvlabError("a scenario is required (--config PATH)")
    sc = load_scenario(path)
    if args.seed is not None:
        sc.seed = args.seed
    if args.samples is not None:
        if args.samples <= 0:
            raise CurvlabError("--samples must be positive")
        sc.samples = args.samples
    if args.tol is not None:
        if not args.tol > 0:
            raise CurvlabError("--tol must be positive")
        for c in sc.checks:
            c.tol = args.tol
    return sc


def _write(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise ReportIOError(f"cannot write {out}: {exc.strerror}") from exc


def cmd_catalog(args):
    from .checks import CHECKS

    _write(json.dumps({"manifolds": mf.catalog(), "checks": sorted(CHECKS)}, indent=2, sort_keys=True) + "\n",
           args.out)
    return 0


def cmd_curvature(args):
    sc = _scenario(args)
    spec = build_manifold(sc.manifold)
    X = mf.sample_points(spec, sc.samples, sc.seed)
    b = mf.curvature_batch(spec, X)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(spec.dim)] + ["s", "W_norm", "W_end_norm", "z_norm"])
    for row in np.column_stack([X, b.s, b.weyl_norm(), b.weyl_end_norm(), b.z_norm()]):
        w.writerow([repr(float(v)) for v in row])
    _write(buf.getvalue(), args.out)
    return 0


def _emit(report, args, sc):
    text = emit_report(report, None, args.format or "json")
    _write(text, args.out)
    # extra copies requested by the scenario itself, e.g. {"json": "r.json", "csv": "r.csv"}
    for fmt, path in sorted(sc.output.items()):
        emit_report(report, path, fmt)
    return report.exit_code


def cmd_verify(args, path=None):
    sc = _scenario(args, path)
    return _emit(run_scenario(sc), args, sc)


def cmd_single(args):
    sc = _scenario(args)
    name = SINGLE_CHECK[args.command]
    old = {c.name: c for c in sc.checks}
    spec = old.get(name, CheckSpec(name, args.tol))
    if args.sigma_inject is not None:
        spec.params["sigma_inject"] = args.sigma_inject
    sc.checks = [spec]
    return _emit(run_scenario(sc), args, sc)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "catalog":
            return cmd_catalog(args)
        if args.command == "curvature":
            return cmd_curvature(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "report":
            return cmd_verify(args, args.input)
        return cmd_single(args)
    except (CurvlabError, ValueError) as exc:
        print(f"curvlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
