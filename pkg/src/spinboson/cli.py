"""Command-line interface.

    spinboson gt --model full --w0 1 --gamma 0.25 --kappa 0.5 --beta 2 --tmax 20 --steps 400
    spinboson pt --model f3 --w0 1 --gamma 0.25 --kappa 0.5 --beta 2 --tf 20
    spinboson sweep --w0 0.1 --points 8 --out map.json
    spinboson verify

Exit codes: 0 success, 2 invalid or degenerate parameters, 3 numerical failure,
4 I/O error.  Failures print a one-line JSON record on stderr.
"""

import argparse
import json
import logging
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import bath, dynamics, export, mapper, oracles
from .errors import InvalidParameterError, SpinBosonError

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _beta(text):
    value = float(text)
    return math.inf if math.isinf(value) else value


def _add_params(p):
    p.add_argument("--w0", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--beta", type=_beta, required=True, help="inverse temperature; 'inf' for T = 0")
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("--p0", type=float, default=1.0)


def _add_output(p):
    p.add_argument("--out", default="-", help="output file ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser():
    parser = _Parser(prog="spinboson", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gt = sub.add_parser("gt", help="tabulate G(t)")
    _add_params(gt)
    gt.add_argument("--model", default="full")
    gt.add_argument("--tmax", type=float, required=True)
    gt.add_argument("--steps", type=int, default=400)
    _add_output(gt)

    pt = sub.add_parser("pt", help="solve for P(t)")
    _add_params(pt)
    pt.add_argument("--model", default="full")
    pt.add_argument("--markov", action="store_true",
                    help="use the closed-form Markov solution (short-time kernel)")
    pt.add_argument("--tf", type=float, default=20.0)
    pt.add_argument("--h", type=float, default=None, help="solver step (default: automatic)")
    _add_output(pt)

    sw = sub.add_parser("sweep", help="classify a (gamma, kappa, beta) grid")
    sw.add_argument("--w0", type=float, required=True)
    sw.add_argument("--points", type=int, default=20)
    sw.add_argument("--lo", type=float, default=0.01)
    sw.add_argument("--hi", type=float, default=100.0)
    sw.add_argument("--eps-fine", type=float, default=0.01)
    sw.add_argument("--eps-coarse", type=float, default=0.05)
    sw.add_argument("--samples", type=int, default=1000)
    sw.add_argument("--workers", type=int, default=None,
                    help=f"worker processes (default: ${mapper.WORKERS_ENV} or CPU count)")
    sw.add_argument("--out", required=True)
    sw.add_argument("--gnuplot-dir", default=None)

    vf = sub.add_parser("verify", help="run the oracle suites")
    vf.add_argument("--skip-g", action="store_true", help="skip the slower G(t) quadrature check")
    return parser


def _params(args):
    return bath.BathParameters(args.w0, args.gamma, args.kappa, args.beta, args.v, args.p0)


@contextmanager
def _output(path):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _emit(args, header, columns, meta):
    with _output(args.out) as fh:
        if args.format == "csv":
            export.write_csv(fh, header, columns)
        else:
            doc = {"meta": meta, "columns": header,
                   "data": [list(map(float, col)) for col in columns]}
            fh.write(export.dumps(doc))


def cmd_gt(args):
    p = _params(args)
    model = bath.CorrelationModel.parse(args.model)
    if args.steps < 1 or not args.tmax > 0:
        raise InvalidParameterError("need --steps >= 1 and --tmax > 0")
    times = np.linspace(0.0, args.tmax, args.steps + 1)
    if model.variant in (bath.Variant.ZERO_T, bath.Variant.ZERO_T_CRITICAL) or (
            model.variant is bath.Variant.FULL and p.zero_temperature):
        times = times[1:]
    g = bath.g_eval(times, p, model)
    _emit(args, ["t", "re_g", "im_g"], [times, g.real, g.imag], {"model": model.name})


def cmd_pt(args):
    p = _params(args)
    if args.markov:
        if args.model not in ("st", "full"):
            raise InvalidParameterError("--markov applies to the short-time model")
        trace = dynamics.markov_trace(p, args.tf)
    else:
        model = bath.CorrelationModel.parse(args.model)
        trace = dynamics.solve_volterra(dynamics.KernelSpec(model, p.v), p, args.tf, args.h)
    meta = {"model": trace.model, "step": trace.step}
    meta.update({k: v for k, v in trace.meta.items() if isinstance(v, (int, float, str, bool))})
    _emit(args, ["t", "p"], [trace.times, trace.values], meta)


def cmd_sweep(args):
    grid = mapper.SweepGrid.logspaced(args.w0, args.points, args.lo, args.hi,
                                      eps_fine=args.eps_fine, eps_coarse=args.eps_coarse,
                                      samples=args.samples)

    def progress(done, total, cell):
        if done == total or done % max(1, total // 20) == 0:
            print(f"{done}/{total} cells", file=sys.stderr)

    vmap = mapper.sweep(grid, workers=args.workers, progress=progress)
    export.dump_map(vmap, args.out)
    if args.gnuplot_dir:
        export.write_gnuplot(vmap, args.gnuplot_dir)


def cmd_verify(args):
    results = oracles.run_suite(include_g=not args.skip_g)
    width = max(len(r.name) for r in results)
    print(f"{'check':<{width}}  points  max rel. error  tolerance  result")
    for r in results:
        print(f"{r.name:<{width}}  {r.points:6d}  {r.max_error:13.3e}  {r.tolerance:9.1e}  "
              f"{'PASS' if r.passed else 'FAIL'}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERICAL


COMMANDS = {"gt": cmd_gt, "pt": cmd_pt, "sweep": cmd_sweep, "verify": cmd_verify}


def _fail(code, kind, message):
    record = {"error": kind, "message": str(message), "exit_code": code}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def run(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_INVALID, "UsageError", exc)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        status = COMMANDS[args.command](args)
    except InvalidParameterError as exc:
        return _fail(EXIT_INVALID, type(exc).__name__, exc)
    except (SpinBosonError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERICAL, type(exc).__name__, exc)
    except OSError as exc:
        return _fail(EXIT_IO, type(exc).__name__, exc)
    return EXIT_OK if status is None else status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
