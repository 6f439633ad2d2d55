"""Outer searches: optimal MDC, swap-price sweeps, and curve-based pricing.

Each grid point is one independent lifecycle simulation, so sweeps run
embarrassingly parallel across processes (capped by the SWAPVAL_THREADS
environment variable) and aggregate in grid order for deterministic output.
Plain exhaustive search everywhere: the life-cycle objective is not known
to be unimodal in the degradation cost, so no bracketing descent is used.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from swapval.lifecycle import EconomicParams, LifecycleResult, simulate_lifecycle
from swapval.market_data import HourlyPriceSeries
from swapval.scheduler import BatterySpec, SwapTerms


class SweepError(RuntimeError):
    """A grid point's simulation failed; the message names the point."""


@dataclass(frozen=True)
class DemandPriceCurve:
    """Linear daily demand-price relation: price = slope * demand + intercept."""

    slope: float  # $/MWh per MWh/day, < 0
    intercept: float  # $/MWh at zero demand, > 0

    def __post_init__(self):
        if self.slope >= 0:
            raise ValueError(f"slope must be negative, got {self.slope}")
        if self.intercept <= 0:
            raise ValueError(f"intercept must be positive, got {self.intercept}")


@dataclass
class MdcSweepResult:
    """Grid of lifecycle outcomes over candidate MDC values."""

    grid: list[dict]  # mu, lb_star, abu, days_lived, arbitrage_revenue, reserve_revenue
    mu_star: float
    lb_at_star: float


@dataclass
class CurvePriceResult:
    """Best swap price under one demand-price curve."""

    price_star: float
    demand_star: float
    mu_star: float
    lb_star: float
    rows: list[dict]  # one per candidate price


def _worker_count(n_tasks: int) -> int:
    env = os.environ.get("SWAPVAL_THREADS", "").strip()
    if env:
        return max(1, int(env))
    return max(1, min(os.cpu_count() or 1, n_tasks))


def _simulate_point(args) -> LifecycleResult:
    spec, econ, prices, mu, swap, reserve_enabled = args
    return simulate_lifecycle(spec, econ, prices, mu, swap_policy=swap,
                              reserve_enabled=reserve_enabled, keep_daily_log=False)


def _validate_grid(grid, name: str) -> list[float]:
    values = [float(g) for g in grid]
    if not values:
        raise ValueError(f"{name} grid must be non-empty")
    if any(v < 0 for v in values):
        raise ValueError(f"{name} grid values must be >= 0")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} grid must be strictly increasing")
    return values


def optimize_mdc(spec: BatterySpec, econ: EconomicParams, prices: HourlyPriceSeries,
                 swap_policy: SwapTerms | None, grid,
                 reserve_enabled: bool = True) -> MdcSweepResult:
    """Sweep candidate MDC values and return the grid argmax.

    One full lifecycle per grid point; ties break toward the smaller mu.
    """
    mu_values = _validate_grid(grid, "mdc")
    results = _run_mu_grid(spec, econ, prices, swap_policy, mu_values, reserve_enabled)
    return _sweep_from_results(mu_values, results)


def _run_mu_grid(spec, econ, prices, swap_policy, mu_values, reserve_enabled):
    tasks = [(mu, swap_policy) for mu in mu_values]
    results = []
    args = [(spec, econ, prices, mu, swap, reserve_enabled) for mu, swap in tasks]
    workers = _worker_count(len(args))
    if workers == 1 or len(args) == 1:
        for (mu, _), a in zip(tasks, args):
            try:
                results.append(_simulate_point(a))
            except Exception as exc:
                raise SweepError(f"simulation failed at mu={mu}: {exc}") from exc
        return results
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_simulate_point, a) for a in args]
        for (mu, _), fut in zip(tasks, futures):
            try:
                results.append(fut.result())
            except Exception as exc:
                raise SweepError(f"simulation failed at mu={mu}: {exc}") from exc
    return results


def _sweep_from_results(mu_values, results) -> MdcSweepResult:
    rows = []
    for mu, res in zip(mu_values, results):
        rows.append({
            "mu": mu,
            "lb_star": res.lb_star,
            "abu": res.abu,
            "days_lived": res.days_lived,
            "arbitrage_revenue": res.lb_star - res.discounted_reserve_revenue,
            "reserve_revenue": res.discounted_reserve_revenue,
        })
    best = max(range(len(rows)), key=lambda i: (rows[i]["lb_star"], -rows[i]["mu"]))
    return MdcSweepResult(grid=rows, mu_star=rows[best]["mu"], lb_at_star=rows[best]["lb_star"])


def refine_mdc(coarse: MdcSweepResult, spec: BatterySpec, econ: EconomicParams,
               prices: HourlyPriceSeries, swap_policy: SwapTerms | None,
               step: float, reserve_enabled: bool = True) -> MdcSweepResult:
    """Re-sweep a one-spacing bracket around the coarse argmax at finer step.

    The bracket is clamped at zero and at the coarse grid maximum; nothing
    outside it is assumed about the objective's shape.
    """
    mu_values = [row["mu"] for row in coarse.grid]
    if len(mu_values) < 2:
        raise ValueError("coarse sweep needs at least two grid points to refine")
    spacing = max(b - a for a, b in zip(mu_values, mu_values[1:]))
    if step <= 0 or step >= spacing:
        raise ValueError(f"step must be in (0, coarse spacing {spacing}), got {step}")
    lo = max(0.0, coarse.mu_star - spacing)
    hi = min(mu_values[-1], coarse.mu_star + spacing)
    fine = np.arange(lo, hi + step / 2, step)
    fine = np.unique(np.concatenate([fine, [coarse.mu_star, hi]]))
    fine_values = [float(v) for v in fine]
    results = _run_mu_grid(spec, econ, prices, swap_policy, fine_values, reserve_enabled)
    return _sweep_from_results(fine_values, results)


def sweep_swap_price(spec: BatterySpec, econ: EconomicParams, prices: HourlyPriceSeries,
                     price_grid, fixed_daily_cap: float, mdc_grid,
                     labor_cost: float = 10.0,
                     reserve_enabled: bool = True) -> list[dict]:
    """Re-optimize the MDC at each candidate swap price.

    Returns one row per price: {swap_price, mu_star, lb_star, abu, days_lived},
    where abu and days_lived are those of the mu_star run.
    """
    prices_list = _validate_grid(price_grid, "price")
    if fixed_daily_cap < 0:
        raise ValueError(f"fixed_daily_cap must be >= 0, got {fixed_daily_cap}")
    rows = []
    for price in prices_list:
        swap = SwapTerms(swap_price=price, daily_swap_cap=fixed_daily_cap,
                         labor_cost=labor_cost)
        sweep = optimize_mdc(spec, econ, prices, swap, mdc_grid,
                             reserve_enabled=reserve_enabled)
        best = next(r for r in sweep.grid if r["mu"] == sweep.mu_star)
        rows.append({
            "swap_price": price,
            "mu_star": sweep.mu_star,
            "lb_star": sweep.lb_at_star,
            "abu": best["abu"],
            "days_lived": best["days_lived"],
        })
    return rows


def demand_at_price(curve: DemandPriceCurve, price: float) -> float:
    """Daily swap demand the market absorbs at a price; zero at/above the
    extinction price (the curve's intercept)."""
    if price < 0:
        raise ValueError(f"price must be >= 0, got {price}")
    return max(0.0, (price - curve.intercept) / curve.slope)


def optimize_price_for_curve(spec: BatterySpec, econ: EconomicParams,
                             prices: HourlyPriceSeries, curve: DemandPriceCurve,
                             price_grid, mdc_grid, labor_cost: float = 10.0,
                             reserve_enabled: bool = True) -> CurvePriceResult:
    """Pick the swap price maximizing life-cycle value under a demand curve.

    Each candidate price fixes the daily swap cap at the curve's demand and
    re-optimizes the MDC.  Ties break toward the lower price.
    """
    prices_list = _validate_grid(price_grid, "price")
    rows = []
    for price in prices_list:
        demand = demand_at_price(curve, price)
        swap = SwapTerms(swap_price=price, daily_swap_cap=demand, labor_cost=labor_cost)
        sweep = optimize_mdc(spec, econ, prices, swap, mdc_grid,
                             reserve_enabled=reserve_enabled)
        rows.append({
            "swap_price": price,
            "demand": demand,
            "mu_star": sweep.mu_star,
            "lb_star": sweep.lb_at_star,
        })
    best = max(range(len(rows)),
               key=lambda i: (rows[i]["lb_star"], -rows[i]["swap_price"]))
    return CurvePriceResult(
        price_star=rows[best]["swap_price"],
        demand_star=rows[best]["demand"],
        mu_star=rows[best]["mu_star"],
        lb_star=rows[best]["lb_star"],
        rows=rows,
    )
