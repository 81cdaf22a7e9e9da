"""``stratmc`` command line.

Subcommands: ``integrate``, ``price-european``, ``price-asian``, ``bench``,
``dump-points``. Human-readable summaries go to stdout; machine-readable
output is written only where ``--out`` points.

Exit codes: 0 success, 1 runtime error (or a bench cell that failed),
2 usage error.
"""
import argparse
import csv
import logging
import math
import os
import sys
from dataclasses import replace

import numpy as np

from . import bench, finance, integration
from .chain_sim import mc_run, run
from .errors import ConfigurationError, PreconditionError
from .rng import SeededStream
from .sampling import SAMPLERS, integer_root, sample

log = logging.getLogger("stratmc")

# config-file keys and how to parse them
_CONFIG_KEYS = {
    "sampler": str, "n": int, "N": int, "reps": int, "seed": int, "steps": int, "out": str,
    "s0": float, "strike": float, "rate": float, "sigma": float, "maturity": float,
    "rate_convention": str, "experiment": str, "schedule": str, "jobs": int,
    "dim": int, "domain": str, "box": str,
}


def load_config(path):
    """Read ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise ConfigurationError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def _add_common(p, sampler=True):
    if sampler:
        p.add_argument("--sampler", choices=SAMPLERS)
    size = p.add_mutually_exclusive_group()
    size.add_argument("--n", type=int, help="stratification base")
    size.add_argument("--N", type=int, help="number of points / paths")
    p.add_argument("--reps", type=int, help="independent replications (default 100)")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--out", help="write machine-readable results here")
    p.add_argument("--config", help="key=value configuration file")


def _add_model(p):
    p.add_argument("--steps", type=int, help="number of time steps P")
    p.add_argument("--s0", type=float)
    p.add_argument("--strike", type=float)
    p.add_argument("--rate", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--maturity", type=float)
    p.add_argument("--rate-convention", choices=("log10", "ln"),
                   help="Asian default rate: log10(1.09) (default) or ln(1.09)")


def build_parser():
    parser = argparse.ArgumentParser(prog="stratmc", description="Stratified Monte Carlo simulation of Markov chains.")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("integrate", help="estimate the volume of a test domain")
    _add_common(p)
    p.add_argument("--dim", type=int, help="dimension s (default 2)")
    p.add_argument("--domain", choices=("triangle", "anti-triangle", "box"), help="default triangle")
    p.add_argument("--box", help="box sides as a:b,a:b,... (for --domain box)")

    for name, what in (("price-european", "European call"), ("price-asian", "geometric Asian call")):
        p = sub.add_parser(name, help=f"price the {what} by chain simulation")
        _add_common(p)
        _add_model(p)

    p = sub.add_parser("bench", help="variance/efficiency study over an N schedule")
    _add_common(p, sampler=False)
    _add_model(p)
    p.add_argument("--experiment", choices=bench.EXPERIMENTS)
    p.add_argument("--sampler", choices=SAMPLERS, action="append", help="repeatable; default all four")
    p.add_argument("--schedule", help="comma-separated N values")
    p.add_argument("--full-schedule", action="store_true", help="use the full-size reference schedule")
    p.add_argument("--jobs", type=int, help="worker processes (default: available cores)")

    p = sub.add_parser("dump-points", help="write one point set as CSV")
    _add_common(p)
    p.add_argument("--dim", type=int, help="dimension s (default 2)")
    return parser


def _merged(args):
    opts = {k: v for k, v in vars(args).items() if v is not None}
    if args.config:
        conf = load_config(args.config)
        for k, v in conf.items():
            opts.setdefault(k, v)
    return opts


def _model_params(opts, style):
    if style == finance.EUROPEAN:
        params, option = finance.european_defaults()
    else:
        params, option = finance.asian_defaults(opts.get("rate_convention", "log10"))
    params = replace(
        params,
        S0=opts.get("s0", params.S0),
        r=opts.get("rate", params.r),
        sigma=opts.get("sigma", params.sigma),
        T=opts.get("maturity", params.T),
        P=opts.get("steps", params.P),
        dts=None,
    )
    option = replace(option, strike=opts.get("strike", option.strike))
    return params, option


def _summary(values):
    values = np.asarray(values)
    mean = float(np.mean(values))
    var = float(np.var(values, ddof=1)) if len(values) > 1 else math.nan
    return mean, var, math.sqrt(var / len(values)) if len(values) > 1 else math.nan


def _size(opts, dim, sampler, need_base=("smc", "ss")):
    if "n" in opts:
        return opts["n"] ** dim
    if "N" in opts:
        if sampler in need_base:
            integer_root(opts["N"], dim)
        return opts["N"]
    raise ConfigurationError("give --n or --N")


def _write_replications(path, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("rep", "estimate"))
        for i, v in enumerate(values):
            w.writerow((i, repr(float(v))))


def cmd_price(opts, style):
    params, option = _model_params(opts, style)
    model = finance.model_for(params, option)
    sampler = opts.get("sampler", "ss")
    dim = model.state_dim + model.driver_dim
    # chain runs need a base for every stratified sampler
    N = _size(opts, dim, sampler, need_base=("smc", "lhs", "ss"))
    seed = opts.get("seed", 0)
    values = []
    for rep in range(opts.get("reps", 100)):
        stream = SeededStream(seed, (rep,))
        if sampler == "mc":
            e = mc_run(model, N, params.P, stream)
        else:
            e = run(model, integer_root(N, dim), params.P, sampler, stream)
        values.append(finance.discounted_payoff(e, option, params))
    mean, var, se = _summary(values)
    if style == finance.EUROPEAN:
        oracle = finance.black_scholes_price(params, option.strike)
    else:
        oracle = finance.geometric_asian_closed_form(params, option.strike)
    print(f"{style} call  sampler={sampler}  N={N}  reps={len(values)}  seed={seed}")
    print(f"  estimate         {mean:.10g}")
    print(f"  sample variance  {var:.6g}")
    print(f"  standard error   {se:.6g}")
    print(f"  oracle price     {oracle:.10g}")
    print(f"  absolute error   {abs(mean - oracle):.6g}")
    if "out" in opts:
        _write_replications(opts["out"], values)
    return 0


def _domain(opts, dim):
    kind = opts.get("domain", "triangle")
    if kind == "triangle":
        return integration.Subgraph(dim, lambda u: u[:, 0], variation=1.0), 0.5
    if kind == "anti-triangle":
        if dim != 2:
            raise ConfigurationError("anti-triangle is defined for dim 2")
        return integration.Subgraph(2, lambda u: 1.0 - u[:, 0], variation=1.0, lipschitz=1.0), 0.5
    if "box" not in opts:
        raise ConfigurationError("--domain box needs --box a:b,a:b,...")
    sides = [tuple(float(v) for v in side.split(":")) for side in opts["box"].split(",")]
    if any(len(side) != 2 for side in sides):
        raise ConfigurationError("box sides are a:b pairs")
    box = integration.HyperInterval(tuple(a for a, _ in sides), tuple(b for _, b in sides))
    if box.dim != dim:
        raise ConfigurationError(f"box has {box.dim} sides but --dim is {dim}")
    return box, integration.interval_measure(box)


def cmd_integrate(opts):
    dim = opts.get("dim", 2)
    sampler = opts.get("sampler", "ss")
    domain, exact = _domain(opts, dim)
    N = _size(opts, dim, sampler)
    seed = opts.get("seed", 0)
    values = [integration.estimate(domain, sample(sampler, dim, SeededStream(seed, (rep,)), N=N)).value
              for rep in range(opts.get("reps", 100))]
    mean, var, se = _summary(values)
    print(f"integrate {opts.get('domain', 'triangle')}  dim={dim}  sampler={sampler}  N={N}  reps={len(values)}")
    print(f"  estimate         {mean:.10g}")
    print(f"  exact measure    {exact:.10g}")
    print(f"  sample variance  {var:.6g}")
    print(f"  MC variance      {exact * (1 - exact) / N:.6g}")
    if isinstance(domain, integration.Subgraph):
        print(f"  SMC bound        {integration.smc_variance_bound(domain.variation, dim, N):.6g}")
        if domain.lipschitz is not None:
            print(f"  SS bound         {integration.ss_variance_bound(domain.lipschitz, dim, N):.6g}")
    elif N >= 3:
        print(f"  LHS exact var    {integration.lhs_interval_variance_exact(domain, N):.6g}")
    if "out" in opts:
        _write_replications(opts["out"], values)
    return 0


def cmd_bench(opts):
    experiment = opts.get("experiment", finance.EUROPEAN)
    if opts.get("schedule"):
        try:
            schedule = tuple(int(v) for v in str(opts["schedule"]).split(",") if v.strip())
        except ValueError as exc:
            raise ConfigurationError(f"bad schedule {opts['schedule']!r}") from exc
    elif opts.get("full_schedule"):
        schedule = bench.FULL_SCHEDULES.get(experiment, bench.DESK_SCHEDULES[experiment])
    else:
        schedule = bench.DESK_SCHEDULES[experiment]
    samplers = opts.get("sampler") or SAMPLERS
    if isinstance(samplers, str):
        samplers = tuple(s.strip() for s in samplers.split(","))
    params = option = None
    if experiment != bench.INTEGRATION:
        params, option = _model_params(opts, experiment)
    config = bench.ExperimentConfig(
        experiment, schedule, tuple(samplers), reps=opts.get("reps", 100), seed=opts.get("seed", 0),
        params=params, option=option, jobs=opts.get("jobs", os.cpu_count() or 1),
    )
    report = bench.replicate(config)
    print(f"{experiment}: {len(schedule)} sizes x {len(samplers)} samplers, R={config.reps}, seed={config.seed}")
    print(f"  {'sampler':<7} {'N':>9} {'mean':>14} {'variance':>12} {'cpu s':>9} {'efficiency':>11}")
    for c in report.cells:
        if c.error:
            print(f"  {c.sampler:<7} {c.N:>9}  error: {c.error}")
        else:
            print(f"  {c.sampler:<7} {c.N:>9} {c.mean:>14.8g} {c.variance:>12.4g} {c.cpu_seconds:>9.3f} {c.efficiency:>11.4g}")
    for sampler, (order, _) in report.orders.items():
        print(f"  order {sampler:<4} {order:.3f}")
    for w in report.warnings:
        print(f"  warning: {w}")
    if "out" in opts:
        bench.emit_csv(report, opts["out"])
    return 1 if report.failed else 0


def cmd_dump(opts):
    dim = opts.get("dim", 2)
    sampler = opts.get("sampler", "ss")
    N = _size(opts, dim, sampler)
    ps = sample(sampler, dim, SeededStream(opts.get("seed", 0)), N=N)
    ps.to_csv(opts["out"] if "out" in opts else sys.stdout)
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        opts = _merged(args)
        if args.command == "integrate":
            return cmd_integrate(opts)
        if args.command == "price-european":
            return cmd_price(opts, finance.EUROPEAN)
        if args.command == "price-asian":
            return cmd_price(opts, finance.ASIAN)
        if args.command == "bench":
            return cmd_bench(opts)
        return cmd_dump(opts)
    except (ConfigurationError, PreconditionError, OSError) as exc:
        print(f"stratmc: error: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
