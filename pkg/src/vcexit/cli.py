"""Command-line front end.

Exit codes: 0 success, 2 bad config or arguments, 3 solver failure,
4 oracle disagreement. Output is plain text (no colour), so ``NO_COLOR``
needs no special handling.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import (
    SWEEPABLE,
    ConfigError,
    RunConfig,
    SweepSpec,
    dump_config,
    linear_values,
    load_config,
    order_agents,
)
from .oracle import (
    GridBracketError,
    OracleConfigError,
    SimConfig,
    default_threshold_grid,
    grid_optimal_threshold,
    nash_product_check,
    simulate_policy_value,
)
from .bargaining import nash_price
from .params import AGENT_ORDER, ParameterError
from .presets import ORDER_SENSITIVE, PRESETS, run_preset
from .solvers import SolverError, solve
from .sweep import SkippedPoint, fmt, run_sweep, write_csv

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_ORACLE = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _report_skip(point: SkippedPoint) -> None:
    print(f"skipped {point.param}={fmt(point.value)}: {point.reason}", file=sys.stderr)


def cmd_threshold(args) -> int:
    cfg = load_config(args.config)
    if args.dump_config:
        dump_config(cfg, args.dump_config)
    p, d = cfg.model, cfg.discount
    print(f"eta = {fmt(p.eta)}  theta = {fmt(p.theta)}  numSelves = {d.num_selves}")
    print(f"{'agent':<14}{'self':>5}{'threshold':>18}{'valueMatch':>12}{'smoothPaste':>12}  branch")
    for agent in AGENT_ORDER:
        sol = solve(agent, p, d)
        diag = sol.diagnostics
        branch = diag["branch"] or "-"
        for k, s in enumerate(sol.selves):
            print(
                f"{agent.value:<14}{s.index:>5}{fmt(s.threshold):>18}"
                f"{diag['value_matching'][k]:>12.1e}{diag['smooth_pasting'][k]:>12.1e}  {branch}"
            )
    return EXIT_OK


def _sweep_spec(args, cfg: RunConfig) -> SweepSpec:
    given = [args.param, args.start, args.stop, args.points]
    if any(v is not None for v in given):
        if any(v is None for v in given):
            raise UsageError("--param, --from, --to and --points must be given together")
        if args.param not in SWEEPABLE:
            raise UsageError(f"cannot sweep {args.param!r}; choose one of {', '.join(SWEEPABLE)}")
        try:
            values = linear_values(args.start, args.stop, args.points)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        base = cfg.sweep
        agents = base.agents if base else AGENT_ORDER
        out = base.output_path if base else None
        spec = SweepSpec(args.param, values, agents, out)
    elif cfg.sweep is not None:
        spec = cfg.sweep
    else:
        raise UsageError("no sweep given: use --param/--from/--to/--points or put one in the config")
    if args.agents:
        try:
            spec = SweepSpec(spec.parameter, spec.values, order_agents(args.agents), spec.output_path)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.out:
        spec = SweepSpec(spec.parameter, spec.values, spec.agents, args.out)
    if spec.output_path is None:
        raise UsageError("no output path: use --out or set outputPath in the config")
    return spec


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    spec = _sweep_spec(args, cfg)
    rows, skipped = run_sweep(
        cfg.model, cfg.discount, spec.parameter, spec.values, spec.agents, on_skip=_report_skip
    )
    write_csv(rows, spec.output_path)
    failed = sum(r.threshold is None for r in rows)
    print(f"wrote {len(rows)} rows to {spec.output_path} ({len(skipped)} points skipped, {failed} solver failures)")
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_figure(args) -> int:
    if args.as_printed and args.name not in ORDER_SENSITIVE:
        raise UsageError(f"--as-printed applies only to {', '.join(ORDER_SENSITIVE)}")
    rows, skipped = run_preset(args.name, args.as_printed, on_skip=_report_skip)
    write_csv(rows, args.out)
    failed = sum(r.threshold is None for r in rows)
    print(f"wrote {len(rows)} rows to {args.out} ({len(skipped)} points skipped, {failed} solver failures)")
    return EXIT_SOLVER if failed else EXIT_OK


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def run_validation(cfg: RunConfig, sim: SimConfig, x0: float = 1.0, grid_x0: float = 1.5,
                   grid_step: float = 0.05, perturb: float = 0.0) -> list[Check]:
    """Monte Carlo agreement checks for every agent type plus the bargaining
    price.

    Values are compared at ``x0``; the grid searches start from ``grid_x0``,
    which must lie below the grid. ``perturb`` scales every analytic
    threshold by ``1 + perturb`` before it is checked (a negative control).
    """
    p, d = cfg.model, cfg.discount
    grid = default_threshold_grid(p, grid_step)
    if not 0 < grid_x0 < grid[0]:
        raise OracleConfigError(f"grid x0 must lie in (0, {grid[0]:.6g})")
    checks = []
    for agent in AGENT_ORDER:
        sol = solve(agent, p, d)
        th = [t * (1.0 + perturb) for t in sol.thresholds]
        analytic = sol.value(x0, 0)
        est = simulate_policy_value(p, d, agent, th, x0, sim)
        z = (est.mean - analytic) / est.stderr if est.stderr > 0 else (0.0 if est.mean == analytic else np.inf)
        checks.append(Check(
            f"value {agent.value}",
            abs(z) <= 3.0,
            f"mc {fmt(est.mean)} +- {fmt(est.stderr)}  analytic {fmt(analytic)}  z {z:+.2f}",
        ))
        res = grid_optimal_threshold(p, d, agent, th[1:], grid_x0, sim, grid, reference=th[0])
        checks.append(Check(
            f"grid {agent.value}",
            res.agrees(),
            f"argmax {fmt(res.best_threshold)}  analytic {fmt(th[0])}  "
            f"gap {fmt(res.gap)} +- {fmt(res.gap_stderr)}",
        ))
    price = nash_price(p, 1.0)
    prices = np.round(np.arange(price - 3.0, price + 3.0, 0.01), 10)
    try:
        best = nash_product_check(p, 1.0, prices)
        ok = abs(best - price) <= 0.01 + 1e-12
        detail = f"grid argmax {fmt(best)}  analytic {fmt(price)}"
    except GridBracketError as exc:
        ok, detail = False, str(exc)
    checks.append(Check("nash price", ok, detail))
    return checks


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    sim = SimConfig(num_paths=args.paths, time_step=args.time_step, seed=args.seed, antithetic=not args.no_antithetic)
    checks = run_validation(cfg, sim, args.x0, args.grid_x0, args.grid_step, args.perturb_threshold)
    print(f"paths {sim.num_paths}  timeStep {fmt(sim.time_step)}  seed {sim.seed}  x0 {fmt(args.x0)}  gridX0 {fmt(args.grid_x0)}")
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<22} {c.detail}")
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_ORACLE if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vcexit", description="VC trade-sale exit thresholds under quasi-hyperbolic discounting.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    t = sub.add_parser("threshold", help="print every agent's thresholds")
    t.add_argument("config")
    t.add_argument("--dump-config", metavar="PATH", help="also write the fully resolved config")
    t.set_defaults(func=cmd_threshold)

    s = sub.add_parser("sweep", help="sweep one parameter and write CSV")
    s.add_argument("config")
    s.add_argument("--param", choices=SWEEPABLE)
    s.add_argument("--from", dest="start", type=float)
    s.add_argument("--to", dest="stop", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--agents", help="comma separated, e.g. critical,naive")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    f = sub.add_parser("figure", help="write the CSV behind one figure")
    f.add_argument("name", choices=sorted(PRESETS, key=lambda n: int(n[3:])))
    f.add_argument("--out", required=True)
    f.add_argument(
        "--as-printed", action="store_true",
        help="fig9-fig11 only: use delta_f=0.5, delta_p=0.7 as printed instead of the "
             "default delta_f=0.7, delta_p=0.5 (the printed pair breaks delta_f >= delta_p)",
    )
    f.set_defaults(func=cmd_figure)

    v = sub.add_parser("validate", help="check analytic results against Monte Carlo")
    v.add_argument("config")
    v.add_argument("--paths", type=int, default=200_000)
    v.add_argument("--seed", type=int, default=SimConfig.seed)
    v.add_argument("--time-step", type=float, default=0.005)
    v.add_argument("--x0", type=float, default=1.0)
    v.add_argument("--grid-x0", type=float, default=1.5, help="starting level for the grid searches")
    v.add_argument("--grid-step", type=float, default=0.05)
    v.add_argument("--no-antithetic", action="store_true")
    v.add_argument("--perturb-threshold", type=float, default=0.0, help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ParameterError, OracleConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
