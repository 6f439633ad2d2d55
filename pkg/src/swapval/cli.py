"""Command-line entry point.

Subcommands: simulate, optimize-mdc, sweep-price, optimize-curve-price, eol.
Every run echoes the resolved configuration to ``config.json`` in the output
directory alongside the result files.  Exit codes: 0 success, 2 bad
configuration or usage, 3 data errors (price files), 4 internal solver
failure; failures also leave a machine-readable ``error.json``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from swapval.config import (
    ConfigError,
    PriceSource,
    ScenarioConfig,
    emit_config,
    load_config,
    resolve_prices,
)
from swapval.lifecycle import eol_analysis, simulate_lifecycle
from swapval.lp import LPError
from swapval.market_data import PriceDataError
from swapval.optimizers import (
    DemandPriceCurve,
    SweepError,
    optimize_mdc,
    optimize_price_for_curve,
    refine_mdc,
    sweep_swap_price,
)
from swapval.report import (
    emit_eol_sensitivity,
    emit_curve_optima,
    emit_lifecycle,
    emit_mdc_sweep,
    emit_price_sweep,
)
from swapval.scheduler import ScheduleError, SwapTerms

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_SOLVER = 4


def _parse_grid(text: str) -> list[float]:
    """Parse 'a:b:step' into an inclusive ascending grid."""
    try:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3:
            raise ValueError("expected a:b:step")
        a, b, step = parts
        if step <= 0 or b < a:
            raise ValueError("need step > 0 and b >= a")
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc
    grid = []
    v = a
    while v <= b + step * 1e-9:
        grid.append(round(v, 12))
        v += step
    return grid


def _parse_curve(text: str) -> DemandPriceCurve:
    try:
        k, b = (float(p) for p in text.split(","))
        return DemandPriceCurve(slope=k, intercept=b)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad curve {text!r} (expected k,b with k<0, b>0): {exc}") from exc


def _parse_synth(text: str) -> tuple[str, dict]:
    parts = text.split(":")
    name, args = parts[0], parts[1:]
    try:
        if name == "flat":
            return "flat", {"level": float(args[0])}
        if name == "two-level":
            params = {"low": float(args[0]), "high": float(args[1])}
            if len(args) > 2:
                params["split_hour"] = int(args[2])
            return "two-level", params
        if name in ("daily-sine", "sine"):
            return "daily-sine", {"mean": float(args[0]), "amplitude": float(args[1])}
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"bad synth spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown synth pattern {name!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="paper-defaults",
                        help="config JSON path or 'paper-defaults'")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--mu", type=float, help="life-cycle MDC in $/MWh-throughput")
    common.add_argument("--mdc-grid", help="MDC grid as a:b:step")
    common.add_argument("--price-grid", help="swap price grid as a:b:step")
    common.add_argument("--om", type=float, help="fixed O&M in $/kW-year")
    common.add_argument("--no-reserve", action="store_true",
                        help="disable the reserve channel")
    common.add_argument("--seed", type=int, help="seed for synthetic prices")
    common.add_argument("--synth", help="synthetic prices: flat:LVL | "
                        "two-level:LO:HI[:SPLIT] | daily-sine:MEAN:AMP")
    common.add_argument("--days", type=int, help="days of synthetic prices")
    common.add_argument("--price-file", help="hourly price CSV path")
    common.add_argument("--schema-hour", help="CSV column holding the hour index")
    common.add_argument("--schema-lmp", help="CSV column holding the LMP")
    common.add_argument("--schema-reserve", help="CSV column holding the reserve price")
    common.add_argument("--swap-price", type=float, help="swap price override, $/MWh")
    common.add_argument("--swap-cap", type=float, help="daily swap cap override, MWh")
    common.add_argument("--labor", type=float, help="swap labor cost override, $/MWh")

    parser = argparse.ArgumentParser(
        prog="swapval",
        description="Life-cycle valuation and dispatch for a battery swapping station",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common],
                   help="one lifecycle at a fixed MDC (--mu)")
    p = sub.add_parser("optimize-mdc", parents=[common],
                       help="sweep the MDC grid for the best life-cycle value")
    p.add_argument("--refine-step", type=float,
                   help="re-sweep around the argmax at this finer step")
    sub.add_parser("sweep-price", parents=[common],
                   help="re-optimize the MDC at each swap price")
    p = sub.add_parser("optimize-curve-price", parents=[common],
                       help="best swap price under demand-price curves")
    p.add_argument("--curve", action="append", default=[],
                   help="demand-price curve as k,b (repeatable)")
    p = sub.add_parser("eol", parents=[common],
                       help="economic/physical EOL sensitivity to fixed O&M")
    p.add_argument("--om-grid", default="0:30:8", help="O&M grid as a:b:step")
    return parser


def _apply_overrides(config: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    if args.synth and args.price_file:
        raise ConfigError("--synth and --price-file are mutually exclusive")
    prices = config.prices
    if args.synth:
        pattern, params = _parse_synth(args.synth)
        prices = PriceSource(kind="synthetic", pattern=pattern, params=params,
                             days=args.days or prices.days,
                             seed=args.seed if args.seed is not None else prices.seed)
    elif args.price_file:
        schema = dict(prices.schema or {})
        prices = PriceSource(kind="file", path=args.price_file, schema=schema or None)
    elif prices.kind == "synthetic" and (args.seed is not None or args.days):
        prices = dataclasses.replace(
            prices,
            seed=args.seed if args.seed is not None else prices.seed,
            days=args.days or prices.days)
    if prices.kind == "file" and any([args.schema_hour, args.schema_lmp, args.schema_reserve]):
        schema = dict(prices.schema or {"hour": "hour", "lmp": "lmp_usd_per_mwh",
                                        "reserve": "reserve_usd_per_mw"})
        if args.schema_hour:
            schema["hour"] = args.schema_hour
        if args.schema_lmp:
            schema["lmp"] = args.schema_lmp
        if args.schema_reserve:
            schema["reserve"] = args.schema_reserve
        prices = dataclasses.replace(prices, schema=schema)

    economics = config.economics
    if args.om is not None:
        economics = dataclasses.replace(economics, fixed_om_per_kw_year=args.om)

    flags = config.flags
    if args.no_reserve:
        flags = dataclasses.replace(flags, reserve_enabled=False)

    swap = config.swap
    if args.swap_price is not None or args.swap_cap is not None or args.labor is not None:
        base = swap if swap is not None else SwapTerms(0.0, 0.0, 10.0)
        swap = SwapTerms(
            swap_price=args.swap_price if args.swap_price is not None else base.swap_price,
            daily_swap_cap=args.swap_cap if args.swap_cap is not None else base.daily_swap_cap,
            labor_cost=args.labor if args.labor is not None else base.labor_cost,
        )

    mdc_grid = _parse_grid(args.mdc_grid) if args.mdc_grid else config.mdc_grid
    price_grid = _parse_grid(args.price_grid) if args.price_grid else config.price_grid

    return ScenarioConfig(battery=config.battery, economics=economics, prices=prices,
                          swap=swap, demand_curve=config.demand_curve, flags=flags,
                          mdc_grid=mdc_grid, price_grid=price_grid)


def _cmd_simulate(config: ScenarioConfig, prices, args) -> None:
    if args.mu is None:
        raise ConfigError("simulate requires --mu")
    result = simulate_lifecycle(
        config.battery, config.economics, prices, args.mu,
        swap_policy=config.swap, reserve_enabled=config.flags.reserve_enabled)
    eol = eol_analysis(result, config.battery, config.economics,
                       include_mdc_in_cashflow=config.flags.include_mdc_in_cashflow)
    result.economic_eol_year = eol["economic_eol_year"]
    emit_lifecycle(result, args.out)


def _cmd_optimize_mdc(config: ScenarioConfig, prices, args) -> None:
    sweep = optimize_mdc(config.battery, config.economics, prices, config.swap,
                         config.mdc_grid, reserve_enabled=config.flags.reserve_enabled)
    emit_mdc_sweep(sweep, args.out)
    if getattr(args, "refine_step", None):
        refined = refine_mdc(sweep, config.battery, config.economics, prices,
                             config.swap, args.refine_step,
                             reserve_enabled=config.flags.reserve_enabled)
        from swapval.report import write_json, write_table, MDC_SWEEP_COLUMNS
        write_table(os.path.join(args.out, "mdc_sweep_refined.csv"),
                    MDC_SWEEP_COLUMNS, refined.grid)
        write_json(os.path.join(args.out, "mdc_sweep_refined.json"),
                   {"mu_star": refined.mu_star, "lb_at_star": refined.lb_at_star,
                    "grid": refined.grid})


def _cmd_sweep_price(config: ScenarioConfig, prices, args) -> None:
    if args.swap_cap is not None:
        cap = args.swap_cap
    elif config.swap is not None:
        cap = config.swap.daily_swap_cap
    else:
        raise ConfigError("sweep-price needs --swap-cap or a swap block in the config")
    labor = args.labor if args.labor is not None else (
        config.swap.labor_cost if config.swap else 10.0)
    rows = sweep_swap_price(config.battery, config.economics, prices,
                            config.price_grid, cap, config.mdc_grid,
                            labor_cost=labor,
                            reserve_enabled=config.flags.reserve_enabled)
    emit_price_sweep(rows, args.out)


def _cmd_optimize_curve_price(config: ScenarioConfig, prices, args) -> None:
    curves = [_parse_curve(c) for c in args.curve]
    if not curves and config.demand_curve is not None:
        curves = [config.demand_curve]
    if not curves:
        raise ConfigError("optimize-curve-price needs --curve k,b or a demand_curve "
                          "block in the config")
    labor = args.labor if args.labor is not None else (
        config.swap.labor_cost if config.swap else 10.0)
    results = []
    for curve in curves:
        res = optimize_price_for_curve(
            config.battery, config.economics, prices, curve,
            config.price_grid, config.mdc_grid, labor_cost=labor,
            reserve_enabled=config.flags.reserve_enabled)
        results.append((curve.slope, curve.intercept, res))
    emit_curve_optima(results, args.out)


def _cmd_eol(config: ScenarioConfig, prices, args) -> None:
    om_grid = _parse_grid(args.om_grid)
    rows = []
    modes = [("with_swap", config.swap), ("no_swap", None)]
    if config.swap is None:
        modes = [("no_swap", None)]
    for mode, swap in modes:
        if args.mu is not None:
            mu = args.mu
        else:
            sweep = optimize_mdc(config.battery, config.economics, prices, swap,
                                 config.mdc_grid,
                                 reserve_enabled=config.flags.reserve_enabled)
            mu = sweep.mu_star
        result = simulate_lifecycle(config.battery, config.economics, prices, mu,
                                    swap_policy=swap,
                                    reserve_enabled=config.flags.reserve_enabled,
                                    keep_daily_log=False)
        for om in om_grid:
            econ = dataclasses.replace(config.economics, fixed_om_per_kw_year=om)
            eol = eol_analysis(result, config.battery, econ,
                               include_mdc_in_cashflow=config.flags.include_mdc_in_cashflow)
            rows.append({
                "om_per_kw_year": om, "mode": mode, "mu": mu,
                "economic_eol_year": eol["economic_eol_year"],
                "physical_eol_year": eol["physical_eol_year"],
            })
    emit_eol_sensitivity(rows, args.out)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "optimize-mdc": _cmd_optimize_mdc,
    "sweep-price": _cmd_sweep_price,
    "optimize-curve-price": _cmd_optimize_curve_price,
    "eol": _cmd_eol,
}


def _fail(args, exc: Exception, code: int) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record), file=sys.stderr)
    out = getattr(args, "out", None)
    if out:
        try:
            os.makedirs(out, exist_ok=True)
            with open(os.path.join(out, "error.json"), "w", encoding="utf-8") as fh:
                json.dump(record, fh, indent=2)
                fh.write("\n")
        except OSError:
            pass
    return code


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        config = _apply_overrides(config, args)
        prices = resolve_prices(config)
        os.makedirs(args.out, exist_ok=True)
        emit_config(config, os.path.join(args.out, "config.json"))
        _COMMANDS[args.command](config, prices, args)
    except ConfigError as exc:
        return _fail(args, exc, EXIT_CONFIG)
    except (PriceDataError, FileNotFoundError) as exc:
        return _fail(args, exc, EXIT_DATA)
    except (LPError, ScheduleError, SweepError) as exc:
        return _fail(args, exc, EXIT_SOLVER)
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
