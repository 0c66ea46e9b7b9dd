"""Command-line interface.

Subcommands::

    brokersim simulate --stream "(SB)^100" --policy median \
        --seller-dist uniform:0,1 --buyer-dist uniform:0,1 \
        --trials 10000 --seed 7 [--stock-cap K] [--objective profit|welfare] \
        [--trace trace.csv]
    brokersim solve-fractional --alpha 2 --seller-dist uniform:0,1 --buyer-dist uniform:0,1
    brokersim experiment balanced --n-values 100,1000 --out ratios.csv
    brokersim verify mhr

The default seed comes from the ``BROKERSIM_SEED`` environment variable
(falling back to 42).  ``--config FILE`` reads ``key = value`` lines
(``#`` comments allowed) whose entries override the corresponding flags.
Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .distributions import parse_distribution
from .engine import RandomStream, monte_carlo, run_trial
from .errors import SpecParseError
from .experiments import SCENARIOS, ExperimentConfig, emit_csv, run_experiment
from .fractional import certify_bounds, solve_fractional
from .policies import build_policy
from .streams import AgentStream, SELLER
from .verify import SUITES, run_suite

__all__ = ["main", "parse_config"]

_ENV_SEED = "BROKERSIM_SEED"

_CONFIG_TYPES = {
    "n_values": lambda v: tuple(int(x.strip()) for x in v.split(",")),
    "trials": int,
    "seed": int,
    "alpha": int,
    "stock_cap": int,
    "decay_eps": float,
    "pareto_eps": float,
}


def parse_config(path: str) -> dict:
    """Read a flat ``key = value`` config file; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise SpecParseError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if not key or not value:
                raise SpecParseError(f"{path}:{lineno}: empty key or value")
            caster = _CONFIG_TYPES.get(key, str)
            try:
                values[key] = caster(value)
            except ValueError:
                raise SpecParseError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    return values


def _default_seed() -> int:
    raw = os.environ.get(_ENV_SEED)
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise SpecParseError(f"environment variable {_ENV_SEED} must be an integer, got {raw!r}") from None


def _apply_config(args: argparse.Namespace, path: str) -> None:
    for key, value in parse_config(path).items():
        if not hasattr(args, key):
            raise SpecParseError(f"config key {key!r} does not match any option of this subcommand")
        setattr(args, key, value)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="brokersim", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None, help=f"defaults to ${_ENV_SEED} or 42")
        p.add_argument("--config", default=None, help="key=value file overriding flags")

    sim = sub.add_parser("simulate", help="Monte Carlo estimate of one policy on one stream")
    sim.add_argument("--stream", required=True, help="pattern, e.g. '(S^2 B)^50'")
    sim.add_argument("--policy", required=True, help="median | fixed:q,p | quantile:c1,c2 | decay:eps | stock:K | balanced:alpha")
    sim.add_argument("--seller-dist", dest="seller_dist", required=True)
    sim.add_argument("--buyer-dist", dest="buyer_dist", required=True)
    sim.add_argument("--trials", type=int, default=10000)
    sim.add_argument("--stock-cap", dest="stock_cap", type=int, default=None)
    sim.add_argument("--objective", choices=("profit", "welfare"), default="profit")
    sim.add_argument("--trace", default=None, help="write a per-step CSV trace of trial 0")
    add_common(sim)

    frac = sub.add_parser("solve-fractional", help="optimal two-price program for balanced traffic")
    frac.add_argument("--alpha", type=int, required=True)
    frac.add_argument("--seller-dist", dest="seller_dist", required=True)
    frac.add_argument("--buyer-dist", dest="buyer_dist", required=True)
    add_common(frac)

    exp = sub.add_parser("experiment", help="competitive-ratio sweep, CSV output")
    exp.add_argument("scenario", choices=SCENARIOS)
    exp.add_argument("--n-values", dest="n_values", default=None, help="comma-separated sweep values")
    exp.add_argument("--trials", type=int, default=10000)
    exp.add_argument("--seller-dist", dest="seller_dist", default="uniform:0,1")
    exp.add_argument("--buyer-dist", dest="buyer_dist", default="uniform:0,1")
    exp.add_argument("--alpha", type=int, default=1)
    exp.add_argument("--stock-cap", dest="stock_cap", type=int, default=2)
    exp.add_argument("--decay-eps", dest="decay_eps", type=float, default=0.05)
    exp.add_argument("--pareto-eps", dest="pareto_eps", type=float, default=0.5)
    exp.add_argument("--out", default="experiment.csv")
    add_common(exp)

    ver = sub.add_parser("verify", help="run an invariant suite; nonzero exit on failure")
    ver.add_argument("suite", choices=SUITES)
    ver.add_argument("--trials", type=int, default=20000)
    add_common(ver)

    return parser


_DEFAULT_SWEEPS = {
    "welfare-log-n": tuple(2**k for k in range(4, 15)),
    "profit-sqrt-n": tuple(2**k for k in range(8, 17)),
    "stock-limited": tuple(2**k for k in range(6, 13)),
    "balanced": (100, 1000, 10000),
    "pareto-blowup": tuple(2**k for k in range(4, 15)),
}


def _fmt(value: float) -> str:
    return f"{value:.10g}"


def _cmd_simulate(args) -> int:
    f_s = parse_distribution(args.seller_dist)
    f_b = parse_distribution(args.buyer_dist)
    stream = AgentStream.from_pattern(args.stream)
    policy = build_policy(args.policy, f_s, f_b)
    est = monte_carlo(
        stream, policy, f_s, f_b, args.trials, args.seed,
        stock_cap=args.stock_cap, objective=args.objective,
    )
    print(
        f"objective={args.objective} mean={_fmt(est.mean)} std_err={_fmt(est.std_err)} "
        f"ci95_low={_fmt(est.ci95_low)} ci95_high={_fmt(est.ci95_high)} "
        f"trials={est.trials} seed={args.seed}"
    )
    if args.trace:
        log = run_trial(
            stream, policy, f_s, f_b, RandomStream(args.seed).substream(0),
            stock_cap=args.stock_cap,
        )
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("t,role,price,value,traded,stock\n")
            for t in range(log.n):
                role = "S" if log.roles[t] == SELLER else "B"
                fh.write(
                    f"{t},{role},{log.prices[t]:.17e},{log.values[t]:.17e},"
                    f"{int(log.traded[t])},{int(log.stock_after[t])}\n"
                )
        print(f"trace written to {args.trace}")
    return 0


def _cmd_solve_fractional(args) -> int:
    f_s = parse_distribution(args.seller_dist)
    f_b = parse_distribution(args.buyer_dist)
    sol = solve_fractional(f_s, f_b, args.alpha)
    report = certify_bounds(sol, f_s, f_b, args.alpha, m=1)
    certs = " ".join(
        f"{c.name}={'PASS' if c.passed else 'FAIL'}(slack={_fmt(c.slack)})" for c in report.checks
    )
    print(
        f"alpha={args.alpha} p={_fmt(sol.p)} q={_fmt(sol.q)} "
        f"per_buyer_value={_fmt(sol.per_buyer_value)} "
        f"constraint_residual={_fmt(sol.constraint_residual)} "
        f"stationarity_residual={_fmt(sol.stationarity_residual)} {certs}"
    )
    return 0


def _cmd_experiment(args) -> int:
    n_values = args.n_values
    if n_values is None:
        n_values = _DEFAULT_SWEEPS[args.scenario]
    elif isinstance(n_values, str):
        n_values = tuple(int(x.strip()) for x in n_values.split(","))
    cfg = ExperimentConfig(
        scenario=args.scenario,
        n_values=tuple(n_values),
        trials=args.trials,
        seed=args.seed,
        seller_dist=args.seller_dist,
        buyer_dist=args.buyer_dist,
        alpha=args.alpha,
        stock_cap=args.stock_cap,
        decay_eps=args.decay_eps,
        pareto_eps=args.pareto_eps,
    )
    rows = run_experiment(cfg)
    emit_csv(rows, args.out)
    for row in rows:
        print(
            f"n={row.n} online={_fmt(row.online_mean)} offline={_fmt(row.offline_bound)} "
            f"ratio={_fmt(row.ratio)} adjusted={_fmt(row.slack_adjusted_ratio)}"
        )
    print(f"csv written to {args.out}")
    return 0


def _cmd_verify(args) -> int:
    lines = run_suite(args.suite, seed=args.seed, trials=args.trials)
    failed = 0
    for line in lines:
        print(line.render())
        failed += 0 if line.passed else 1
    print(f"suite={args.suite} checks={len(lines)} failures={failed}")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "config", None):
            _apply_config(args, args.config)
        if getattr(args, "seed", None) is None:
            args.seed = _default_seed()
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "solve-fractional":
            return _cmd_solve_fractional(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "verify":
            return _cmd_verify(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (SpecParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
