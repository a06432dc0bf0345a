"""Command-line interface.

Exit codes: 0 on success, 2 on configuration errors (including usage
errors), 3 when the parameters fall outside the regime a planner covers.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from . import io
from .cbc import cbc_construct
from .errors import OutOfRegimeError, PLRError
from .harness import DEFAULT_REPLICATES, VectorCache, fit_slope, read_records, sweep, write_records
from .infdim import FixedAlgorithm, FixedPlan, MultilevelAlgorithm, plan_fixed, plan_multilevel
from .polylattice import generate_points
from .scramble import DEFAULT_DEPTH, KINDS, ScrambleSpec, scramble

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so main() owns the exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _budget(text: str) -> float:
    t = text.strip()
    if "^" in t:
        base, _, exp = t.partition("^")
        return float(base) ** float(exp)
    return float(t)


def _budget_list(text: str) -> list[float]:
    try:
        return [_budget(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse budget list {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse number list {text!r}") from None


def _global_flags() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--alpha", type=float, help="weight decay exponent, gamma_j = cscale * j^-alpha")
    g.add_argument("--cscale", type=float, default=None, help="weight scale (default 1)")
    g.add_argument("--gamma", type=_float_list, help="explicit comma-separated weights instead of --alpha")
    g.add_argument("--eps", type=float, default=0.1)
    g.add_argument("--anchor", type=float, default=None, help="anchor for pinned coordinates (default 0.5)")
    g.add_argument("--shape", choices=("linear", "quadratic"), default=None)
    g.add_argument("--beta", type=_float_list, default=None, help="integrand coefficient(s)")
    g.add_argument("--config", help="key=value file with alpha, cscale, gamma, shape, beta")
    g.add_argument("--reps", type=int, default=DEFAULT_REPLICATES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--budget-list", type=_budget_list, help="comma-separated budgets, e.g. 1024,2^12")
    g.add_argument("--out", help="output file")
    g.add_argument("-v", "--verbose", action="count", default=0)
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = _Parser(prog="plrquad", description="Scrambled polynomial lattice rules and infinite-dimensional quadrature.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cbc_flags(p):
        p.add_argument("--search", default=None, help="'full' or 'random(C)' (default: full for m <= 10)")
        p.add_argument("--criterion", choices=("wce", "scrambled", "auto"), default="auto")

    p = sub.add_parser("construct", parents=[common], help="build a generating vector by CBC")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--merit", help="merit CSV path (default: <out>.merit.csv)")
    cbc_flags(p)

    p = sub.add_parser("points", parents=[common], help="write deterministic or scrambled points")
    p.add_argument("--in", dest="infile", required=True, help="generating-vector file")
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--scramble", choices=KINDS + ("none",), default="none")
    p.add_argument("--rep", type=int, default=0)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)

    p = sub.add_parser("plan", parents=[common], help="write a fixed or multilevel plan")
    p.add_argument("--regime", choices=("fixed", "ml"), required=True)
    p.add_argument("--N", dest="N", type=_budget, required=True)

    p = sub.add_parser("integrate", parents=[common], help="one scrambled estimate from a plan file")
    p.add_argument("--plan", required=True)
    p.add_argument("--rep", type=int, default=0)
    p.add_argument("--scramble", choices=KINDS, default="owen")
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    cbc_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="RMSE-versus-budget sweep to CSV")
    p.add_argument("--regime", choices=("fixed", "ml"), required=True)
    cbc_flags(p)

    p = sub.add_parser("slope", parents=[common], help="fit log2(rmse) against log2(N)")
    p.add_argument("--in", dest="infile", required=True)
    return parser


def _settings(args, plan=None) -> dict:
    """Merge the config file, flags and plan metadata; flags win."""
    cfg = io.read_config(args.config) if args.config else {}
    alpha = args.alpha
    if alpha is None and "alpha" in cfg:
        alpha = float(cfg["alpha"])
    gamma = args.gamma if args.gamma is not None else (io.parse_list(cfg["gamma"]) if "gamma" in cfg else None)
    if alpha is None and gamma is None and plan is not None:
        alpha = plan.alpha
    cscale = args.cscale if args.cscale is not None else float(cfg.get("cscale", 1.0))
    shape = args.shape or cfg.get("shape", "linear")
    beta = args.beta if args.beta is not None else (io.parse_list(cfg["beta"]) if "beta" in cfg else [1.0])
    return dict(alpha=alpha, gamma=gamma, cscale=cscale, shape=shape, beta=beta[0] if len(beta) == 1 else beta)


def _anchor(args, default=0.5) -> float:
    return default if args.anchor is None else args.anchor


def _cmd_construct(args) -> int:
    st = _settings(args)
    ws = io.weights_from_config(st["alpha"], st["cscale"], st["gamma"])
    g, report = cbc_construct(args.m, args.s, ws, args.search or ("full" if args.m <= 10 else "random(512)"), args.criterion, args.seed)
    out = args.out or "vector.txt"
    io.write_vector(out, g)
    io.write_merit(args.merit or out + ".merit.csv", report)
    print(f"wrote {out} (m={g.m}, s={g.s}, criterion={report.criterion}, e2={report.e2[-1]:.6g})")
    return EXIT_OK


def _cmd_points(args) -> int:
    g = io.read_vector(args.infile)
    ps = generate_points(g, args.s)
    if args.scramble == "none":
        pts, header = ps, [f"m={g.m} s={ps.s} unscrambled"]
    else:
        pts = scramble(ps, ScrambleSpec(args.scramble, args.depth, args.seed, args.rep))
        header = io.scramble_header(pts)
    io.write_points(args.out or sys.stdout, pts, header)
    return EXIT_OK


def _make_plan(regime: str, N: float, args):
    alpha = _settings(args)["alpha"]
    if alpha is None:
        raise OutOfRegimeError("planning needs a power-law decay --alpha")
    if regime == "fixed":
        return plan_fixed(N, alpha, args.eps, _anchor(args))
    return plan_multilevel(N, alpha, args.eps, _anchor(args))


def _cmd_plan(args) -> int:
    plan = _make_plan(args.regime, args.N, args)
    io.write_plan(args.out or sys.stdout, plan)
    return EXIT_OK


def _cmd_integrate(args) -> int:
    plan = io.read_plan(args.plan)
    st = _settings(args, plan)
    ws = io.weights_from_config(st["alpha"], st["cscale"], st["gamma"])
    f = io.integrand_from_config(ws, st["shape"], st["beta"])
    cache = VectorCache(ws, args.criterion, args.search, args.seed)
    if isinstance(plan, FixedPlan):
        alg = FixedAlgorithm(plan, cache.get(plan.m, plan.s), args.scramble, args.depth)
    else:
        cache.reserve(zip(plan.ms, plan.dims))
        vectors = [cache.get(m, s) for m, s in zip(plan.ms, plan.dims)]
        alg = MultilevelAlgorithm(plan, vectors, args.scramble, args.depth)
    value = alg.estimate(f, args.seed, args.rep)
    print(repr(value))
    logger.info("exact integral %r, cost %d", f.scale, alg.cost)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if not args.budget_list:
        raise _UsageError("sweep needs --budget-list")
    st = _settings(args)
    if st["gamma"] is not None or st["alpha"] is None:
        raise OutOfRegimeError("sweeps need power-law weights given by --alpha")
    records = sweep(
        args.regime, args.budget_list, st["alpha"], args.eps, _anchor(args), st["shape"], args.reps, args.seed,
        criterion=args.criterion, search=args.search, c=st["cscale"],
    )
    write_records(args.out or sys.stdout, records)
    return EXIT_OK


def _cmd_slope(args) -> int:
    slope, intercept, r2 = fit_slope(read_records(args.infile))
    print(f"{slope:.6g}")
    print(f"intercept {intercept:.6g}")
    print(f"r2 {r2:.6g}")
    return EXIT_OK


_COMMANDS = {
    "construct": _cmd_construct,
    "points": _cmd_points,
    "plan": _cmd_plan,
    "integrate": _cmd_integrate,
    "sweep": _cmd_sweep,
    "slope": _cmd_slope,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except OutOfRegimeError as exc:
        print(f"plrquad: out of regime: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except _UsageError as exc:
        print(f"plrquad: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PLRError, OSError, ValueError) as exc:
        print(f"plrquad: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
