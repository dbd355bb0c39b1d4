"""Command line interface: ``sbvp {run,sweep,moments,compare}``.

Every flag can also be given in a JSON file passed with ``--config``; keys
use the long flag names with dashes or underscores.  Flags on the command
line override the file.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys

from .errors import ConfigurationError, SbvpError
from .experiments import runner
from .experiments.runner import ExperimentConfig, RealizationError

log = logging.getLogger("sbvp")

EXIT_SOLVER = 1
EXIT_USAGE = 2

_FIELDS = {f for f in ExperimentConfig.__dataclass_fields__}


def _norm_arg(value):
    if value in ("linf", "l2") or value.startswith("comp:"):
        return value
    raise argparse.ArgumentTypeError("expected linf, l2 or comp:K")


def _common(p):
    p.add_argument("--config", help="JSON file with default values for the flags")
    p.add_argument("--problem", choices=["tp1", "tp2", "tp3"])
    p.add_argument("--method", choices=list(runner.METHODS))
    p.add_argument("--base-n", type=int, help="number of base mesh points N")
    p.add_argument("--switching", type=int, help="number of switching points Ns")
    p.add_argument("--midpoints", type=int, help="base steps per switching interval Nm")
    p.add_argument("--realizations", type=int, help="ensemble size M")
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float, help="drift stop-loss coefficient (<=0 disables)")
    p.add_argument("--beta", type=float, help="diffusion stop-loss coefficient (<=0 disables)")
    p.add_argument("--monitor-norm", type=_norm_arg, help="linf, l2 or comp:K")
    p.add_argument("--interior", type=int, help="interior nodes per interval for fixed-msm")
    p.add_argument("--stepper", choices=["r3", "em"], help="scheme inside shooting intervals")
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--tol", type=float, help="Newton residual tolerance")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--fd-epsilon", type=float)
    p.add_argument("--central", action="store_const", const=True,
                   help="central-difference Jacobian")
    p.add_argument("--oracle-refine", type=int,
                   help="evaluate the exact solution on a k-times refined bridge")
    p.add_argument("--full-norm", action="store_const", const=True,
                   help="error over all components instead of the first")
    p.add_argument("--jobs", type=int)
    p.add_argument("--timing", action="store_const", const=True,
                   help="record wall time in the CSV (makes output non-reproducible)")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser():
    parser = argparse.ArgumentParser(prog="sbvp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="one ensemble experiment")
    _common(p)
    p.add_argument("--match-adaptive", action="store_true",
                   help="fixed-msm with the adaptive run's mean node count")
    p.add_argument("--details", help="per-realization CSV")
    p.add_argument("--trace", help="Newton convergence trace CSV")
    p = sub.add_parser("sweep", help="convergence sweep with order fit")
    _common(p)
    p = sub.add_parser("moments", help="weak moments of tp2")
    _common(p)
    p.add_argument("--times", type=float, nargs="+")
    p = sub.add_parser("compare", help="single-realization comparison for tp1")
    _common(p)
    return parser


def config_from_args(args, **defaults):
    values = dict(defaults)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        for key, val in data.items():
            key = key.replace("-", "_")
            if key not in _FIELDS:
                raise ConfigurationError(f"unknown config key {key!r}")
            values[key] = val
    for key in _FIELDS:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    return ExperimentConfig(**values)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def matched_interior(report):
    """Interior nodes per interval giving the same mean node count."""
    per_interval = (report.Na_mean - 1) / (report.Ns - 1)
    return max(0, int(round(per_interval)) - 1)


def cmd_run(args):
    cfg = config_from_args(args)
    if args.match_adaptive:
        adaptive = runner.run(cfg.replace(method="adaptive-msm"))
        cfg = cfg.replace(method="fixed-msm", interior=matched_interior(adaptive))
        log.info("matched fixed-msm: %d interior nodes per interval", cfg.interior)
    report = runner.run(cfg)
    log.info("E_inf=%.6g Na=%.3g wall=%.2fs", report.E_inf, report.Na_mean, report.wall)
    with _output(args.out) as fh:
        runner.write_run_csv([report], fh)
    if args.details:
        with _output(args.details) as fh:
            runner.write_details_csv(report, fh)
    if args.trace:
        with _output(args.trace) as fh:
            runner.write_trace_csv(report, fh)


def cmd_sweep(args):
    cfg = config_from_args(args)
    reports, pairs, (q, r) = runner.sweep(cfg)
    for rep in reports:
        log.info("N=%d Ns=%d Na=%.3g E_inf=%.6g", rep.N, rep.Ns, rep.Na_mean, rep.E_inf)
    print(f"order fit: q={q:.4f} r={r:.4f}", file=sys.stderr)
    with _output(args.out) as fh:
        runner.write_sweep_csv(pairs, fh)


def cmd_moments(args):
    cfg = config_from_args(args, problem="tp2", base_n=51, realizations=10000)
    times = tuple(args.times) if args.times else runner.MOMENT_TIMES
    rows = runner.moments(cfg, times)
    with _output(args.out) as fh:
        runner.write_moments_csv(rows, fh)


def cmd_compare(args):
    cfg = config_from_args(args, problem="tp1")
    with _output(args.out) as fh:
        runner.write_compare_csv(runner.compare(cfg), fh)


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "moments": cmd_moments, "compare": cmd_compare}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except RealizationError as exc:
        print(f"sbvp: solver error in realization {exc.index}: {exc.cause}", file=sys.stderr)
        return EXIT_SOLVER
    except ConfigurationError as exc:
        print(f"sbvp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SbvpError as exc:
        print(f"sbvp: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, json.JSONDecodeError) as exc:
        print(f"sbvp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
