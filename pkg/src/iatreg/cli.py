"""Command-line harness.

Subcommands::

    iatreg bench   parameter-choice table over ell x i x rules
    iatreg sweep   relative error over an alpha grid, with rule markers
    iatreg rates   convergence-rate sweep over noise levels
    iatreg solve   single solve, prints alpha and relative error

Exit status: 0 on success, 2 on configuration errors, 3 when no requested
rule was applicable anywhere.
"""

import argparse
import sys

import numpy as np

from .bench import BenchConfig, run_bench, run_rates, run_sweep, write_axes_note
from .problems import PROBLEM_NAMES, add_noise, make_problem, relative_error, write_pgm
from .rates import RateExperimentConfig
from .selection import RULES, RuleInapplicable
from .solver import iat_solve

EXIT_OK, EXIT_CONFIG, EXIT_INAPPLICABLE = 0, 2, 3

# Experimental setups of the three benchmark problems.
DEFAULTS = {
    "phillips": dict(n=1000, xi=0.01, ell=(5, 10, 20, 30), iters=(1, 50, 100)),
    "shaw": dict(n=1000, xi=0.001, ell=(4, 8, 12), iters=(1, 20, 40)),
    "blur": dict(n=30, xi=0.01, ell=(100, 200, 300), iters=(1, 200, 500)),
}


class ConfigError(Exception):
    pass


def _ints(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _rules(text):
    rules = tuple(v.strip().upper() for v in text.split(",") if v.strip())
    bad = [r for r in rules if r not in RULES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown rules {bad}; choose from {RULES}")
    return rules


def build_parser():
    parser = argparse.ArgumentParser(prog="iatreg", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, multi=True):
        p.add_argument("--problem", choices=PROBLEM_NAMES, default="phillips")
        p.add_argument("--n", type=int, help="problem size (image side for blur)")
        p.add_argument("--xi", type=float, help="relative noise level")
        p.add_argument("--seed", type=int, default=11)
        p.add_argument("--tau", type=float, default=1.0)
        p.add_argument("--rules", type=_rules, default=RULES)
        p.add_argument("--out", help="output file (stdout when omitted)")
        p.add_argument("--format", choices=("csv", "markdown"), default="csv")
        if multi:
            p.add_argument("--ell", type=_ints, help="comma-separated Krylov dimensions")
            p.add_argument("--iters", type=_ints, help="comma-separated iteration counts")

    common(sub.add_parser("bench", help="parameter-choice table"))

    p = sub.add_parser("sweep", help="error versus alpha")
    common(p)
    p.add_argument("--alpha-min", type=float, default=1e-6)
    p.add_argument("--alpha-max", type=float, default=1e4)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--axes-note", help="write a text file describing the plot axes")

    p = sub.add_parser("rates", help="convergence rate over noise levels")
    common(p)
    p.add_argument("--nu", type=int, default=1, choices=(0, 1))
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--deltas", type=_floats, default=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4))
    p.add_argument("--ell-cap", type=int)

    p = sub.add_parser("solve", help="single solve")
    common(p)
    p.add_argument("--alpha", type=float, help="fixed alpha instead of a rule")
    p.add_argument("--pgm", help="write the blur solution as a PGM image")
    return parser


def _config(args):
    d = DEFAULTS[args.problem]
    try:
        return BenchConfig(
            problem=args.problem,
            n=args.n or d["n"],
            xi=d["xi"] if args.xi is None else args.xi,
            seed=args.seed,
            ell_list=args.ell or d["ell"],
            iter_list=args.iters or d["iters"],
            rules=args.rules,
            tau=args.tau,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(report, args):
    if args.out:
        try:
            report.write(args.out, args.format)
        except OSError as exc:
            raise ConfigError(f"cannot write {args.out}: {exc}") from exc
    elif args.format == "markdown" and hasattr(report, "to_markdown"):
        sys.stdout.write(report.to_markdown())
    else:
        sys.stdout.write(report.to_csv())


def cmd_bench(args):
    cfg = _config(args)
    report = run_bench(cfg)
    _emit(report, args)
    return EXIT_OK if any(r.applicable for r in report.rows) else EXIT_INAPPLICABLE


def cmd_sweep(args):
    cfg = _config(args)
    try:
        report = run_sweep(cfg, cfg.ell_list[0], cfg.iter_list[0], args.alpha_min,
                           args.alpha_max, args.points)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _emit(report, args)
    if args.axes_note:
        write_axes_note(args.axes_note)
    return EXIT_OK


def cmd_rates(args):
    d = DEFAULTS[args.problem]
    try:
        problem = make_problem(args.problem, args.n or d["n"])
        cfg = RateExperimentConfig(
            problem, nu=args.nu, rho=args.rho, i=(args.iters or (1,))[0],
            deltas=args.deltas, seed=args.seed, ell_cap=args.ell_cap,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    report, result = run_rates(cfg, problem_name=args.problem)
    _emit(report, args)
    print(f"slope_fit={result.slope_fit:.4f} slope_theory={result.slope_theory:.4f}",
          file=sys.stderr)
    return EXIT_OK if any(p.ok for p in result.points) else EXIT_INAPPLICABLE


def cmd_solve(args):
    cfg = _config(args)
    prob = make_problem(cfg.problem, cfg.n)
    noisy = add_noise(prob, cfg.xi, cfg.seed)
    ell, i = cfg.ell_list[0], cfg.iter_list[0]
    kwargs = dict(alpha=args.alpha) if args.alpha is not None else dict(
        rule=cfg.rules[0], delta=noisy.delta, tau=cfg.tau,
        x_true_norm=float(np.linalg.norm(prob.x_true)),
    )
    try:
        sol = iat_solve(prob.operator, noisy.y_delta, ell, i, **kwargs)
    except RuleInapplicable as exc:
        print(f"rule {cfg.rules[0]} inapplicable: {exc.reason}", file=sys.stderr)
        return EXIT_INAPPLICABLE
    err = relative_error(prob.x_true, sol.x)
    print(f"problem={cfg.problem} ell={sol.ell} i={i} rule={sol.rule_used} "
          f"alpha={sol.alpha:.6e} rel_err={err:.6e}")
    if args.pgm:
        if cfg.problem != "blur":
            raise ConfigError("--pgm is only available for the blur problem")
        side = int(round(np.sqrt(prob.n)))
        write_pgm(args.pgm, sol.x.reshape(side, side))
    return EXIT_OK


COMMANDS = {"bench": cmd_bench, "sweep": cmd_sweep, "rates": cmd_rates, "solve": cmd_solve}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        # ValueError here comes from problem or parameter validation
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
