"""Life-cycle simulation: chain daily schedules until the battery dies.

Degradation is budgeted in MWh of throughput: every MWh charged, discharged
or swapped out, plus a fixed daily calendar-equivalent, draws down a total
budget fixed by cycle life.  State of health falls linearly with the budget
consumed, derating the usable energy capacity day by day.  Daily profits
are discounted year-by-year into the life-cycle objective, and yearly cash
flows (excluding the degradation opportunity cost, which is not cash)
support the economic end-of-life analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from swapval.market_data import HourlyPriceSeries
from swapval.scheduler import (
    NO_SWAP,
    BatterySpec,
    DayInput,
    SwapTerms,
    solve_day,
)

DAYS_PER_YEAR = 365

# A schedule whose largest hourly move is below this is "all zero" for the
# idle-day shortcut.
_ZERO_EPS = 1e-11


@dataclass
class DegradationLedger:
    """Cumulative throughput against the total budget, with derived SOH."""

    total_budget: float  # MWh-throughput available over the whole life
    eol_capacity_fraction: float
    cumulative_throughput: float = 0.0

    @property
    def soh(self) -> float:
        """Remaining capacity fraction, linear in consumed budget."""
        frac = 1.0 - (1.0 - self.eol_capacity_fraction) * (
            self.cumulative_throughput / self.total_budget)
        return min(1.0, max(self.eol_capacity_fraction, frac))

    def add(self, throughput: float) -> None:
        if throughput < 0:
            raise ValueError(f"negative throughput {throughput}")
        self.cumulative_throughput += throughput

    @property
    def exhausted(self) -> bool:
        return self.cumulative_throughput >= self.total_budget


@dataclass(frozen=True)
class EconomicParams:
    discount_rate: float = 0.07  # per year
    fixed_om_per_kw_year: float = 0.0  # $/kW-year
    horizon_cap_years: int = 30  # safety stop for immortal configurations

    def __post_init__(self):
        if self.discount_rate < 0:
            raise ValueError(f"discount_rate must be >= 0, got {self.discount_rate}")
        if self.fixed_om_per_kw_year < 0:
            raise ValueError(f"fixed O&M must be >= 0, got {self.fixed_om_per_kw_year}")
        if self.horizon_cap_years < 1:
            raise ValueError(f"horizon_cap_years must be >= 1, got {self.horizon_cap_years}")


@dataclass
class DailyLog:
    """Per-day trajectory arrays (one entry per simulated day)."""

    day: np.ndarray
    soh: np.ndarray  # at the start of the day
    throughput: np.ndarray
    sb_star: np.ndarray
    soc_end: np.ndarray
    energy_revenue: np.ndarray
    swap_revenue: np.ndarray
    reserve_revenue: np.ndarray
    labor_cost: np.ndarray
    degradation_cost: np.ndarray


@dataclass
class LifecycleResult:
    """Outcome of one full simulation at a fixed marginal degradation cost."""

    mu: float
    lb_star: float  # discounted life-cycle objective
    abu: float  # lb_star / total budget
    days_lived: int
    physical_eol_year: int | None  # 1-based year containing the stop day
    economic_eol_year: int | None  # last year with non-negative net profit
    horizon_capped: bool
    cumulative_throughput: float
    total_budget: float
    final_soh: float
    discounted_reserve_revenue: float
    discounted_energy_revenue: float
    discounted_swap_revenue: float
    yearly: list[dict]
    soh_series: np.ndarray  # SOH at the start of each simulated day
    daily_log: DailyLog | None = None


def total_budget(spec: BatterySpec) -> float:
    """Lifetime MWh-throughput budget.

    Both charge and discharge legs count against the budget, matching the
    objective's symmetric per-MWh degradation charge, so one full cycle at
    100% DOD consumes twice the energy capacity.
    """
    return spec.cycle_life * 2.0 * spec.energy_capacity_0


def calendar_throughput_per_day(spec: BatterySpec) -> float:
    """Daily budget draw equivalent to calendar fade.

    Calendar fade eats capacity at ``calendar_fade_per_year`` of initial
    capacity; mapped onto the linear SOH-vs-throughput line, a year of
    sitting idle consumes fade/(1 - eol_fraction) of the budget.
    """
    d = total_budget(spec)
    loss_fraction_per_year = spec.calendar_fade_per_year / (1.0 - spec.eol_capacity_fraction)
    return d * loss_fraction_per_year / DAYS_PER_YEAR


def adjusted_mdc(mu: float, day_index: int, econ: EconomicParams) -> float:
    """Inflate the life-cycle MDC into day-t terms: mu * (1+r)**year(t)."""
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    if day_index < 0:
        raise ValueError(f"day_index must be >= 0, got {day_index}")
    kappa = day_index // DAYS_PER_YEAR
    return mu * (1.0 + econ.discount_rate) ** kappa


def abu(lb_star: float, budget: float) -> float:
    """Average benefit of usage: life-cycle profit per MWh of budget."""
    if budget <= 0:
        raise ValueError(f"budget must be positive, got {budget}")
    return lb_star / budget


def simulate_lifecycle(
    spec: BatterySpec,
    econ: EconomicParams,
    prices: HourlyPriceSeries,
    mu: float,
    swap_policy: SwapTerms | None = None,
    reserve_enabled: bool = True,
    keep_daily_log: bool = True,
) -> LifecycleResult:
    """Run day-by-day from fresh battery to physical EOL (or the horizon cap).

    Each day solves the scheduling LP at the year-adjusted MDC and the
    SOH-derated capacity, carries end-of-day SOC into the next morning, and
    draws the day's throughput (plus the calendar equivalent) from the
    budget.  Stops the first day cumulative throughput reaches the budget;
    the final day may overshoot by at most one day's maximum throughput.

    Idle shortcut: once a given price-pattern day solves to the all-zero
    schedule from an empty battery, later visits to that pattern day skip
    the solve.  This is exact: the adjusted MDC never decreases and the
    capacity never increases as the simulation advances, so a day that was
    not worth operating never becomes worth operating.
    """
    if mu < 0:
        raise ValueError(f"mu must be >= 0, got {mu}")
    swap = NO_SWAP if swap_policy is None else swap_policy

    budget = total_budget(spec)
    q_day = calendar_throughput_per_day(spec)
    ledger = DegradationLedger(total_budget=budget,
                               eol_capacity_fraction=spec.eol_capacity_fraction)
    max_days = DAYS_PER_YEAR * econ.horizon_cap_years
    rate = econ.discount_rate

    soc = 0.0
    keep24 = (1.0 - spec.self_discharge) ** 24
    zero_memo: set[int] = set()
    n_pattern_days = prices.n_days

    log_rows: list[tuple] = []
    soh_series: list[float] = []
    yearly: dict[int, dict] = {}
    lb = 0.0
    disc_energy = disc_swap = disc_reserve = 0.0

    day = 0
    horizon_capped = False
    while True:
        if day >= max_days:
            horizon_capped = True
            break
        kappa = day // DAYS_PER_YEAR
        delta = (1.0 + rate) ** (-kappa)
        mu_t = mu * (1.0 + rate) ** kappa
        soh = ledger.soh
        capacity_now = soh * spec.energy_capacity_0
        # Capacity fade can strand stored energy, and solver round-off can
        # leave SOC a hair outside [0, capacity]; clamp the carried value.
        soc = min(max(soc, 0.0), capacity_now)
        soh_series.append(soh)

        pattern_day = day % n_pattern_days
        if pattern_day in zero_memo and soc <= _ZERO_EPS:
            energy_rev = swap_rev = reserve_rev = labor = 0.0
            degradation = mu_t * q_day
            sb = -degradation
            throughput = q_day
            soc = soc * keep24
        else:
            lmp, reserve_price = prices.day(day)
            day_input = DayInput(
                battery=spec, lmp=lmp, reserve_price=reserve_price,
                amdc=mu_t, swap=swap, soc_start=soc, capacity_now=capacity_now,
                calendar_throughput_today=q_day, reserve_enabled=reserve_enabled,
            )
            schedule = solve_day(day_input)
            moved = schedule.throughput_today - q_day
            if soc <= _ZERO_EPS and moved <= _ZERO_EPS \
                    and float(schedule.reserve_offer.sum()) <= _ZERO_EPS:
                zero_memo.add(pattern_day)
            energy_rev = schedule.energy_revenue
            swap_rev = schedule.swap_revenue
            reserve_rev = schedule.reserve_revenue
            labor = schedule.swap_labor_cost
            degradation = schedule.degradation_cost
            sb = schedule.sb_star
            throughput = schedule.throughput_today
            soc = float(schedule.soc[-1])

        ledger.add(throughput)
        lb += delta * sb
        disc_energy += delta * energy_rev
        disc_swap += delta * swap_rev
        disc_reserve += delta * reserve_rev

        year = kappa + 1
        row = yearly.setdefault(year, {
            "year": year, "days": 0, "operating_cash": 0.0, "mdc_cost": 0.0,
        })
        row["days"] += 1
        row["operating_cash"] += energy_rev + swap_rev + reserve_rev - labor
        row["mdc_cost"] += degradation

        if keep_daily_log:
            log_rows.append((day, soh, throughput, sb, soc,
                             energy_rev, swap_rev, reserve_rev, labor, degradation))

        day += 1
        if ledger.exhausted:
            break

    days_lived = day
    physical_year = None if horizon_capped else (days_lived - 1) // DAYS_PER_YEAR + 1

    log = None
    if keep_daily_log and log_rows:
        cols = [np.array(c) for c in zip(*log_rows)]
        log = DailyLog(*cols)

    result = LifecycleResult(
        mu=mu,
        lb_star=lb,
        abu=abu(lb, budget),
        days_lived=days_lived,
        physical_eol_year=physical_year,
        economic_eol_year=None,
        horizon_capped=horizon_capped,
        cumulative_throughput=ledger.cumulative_throughput,
        total_budget=budget,
        final_soh=ledger.soh,
        discounted_reserve_revenue=disc_reserve,
        discounted_energy_revenue=disc_energy,
        discounted_swap_revenue=disc_swap,
        yearly=[yearly[y] for y in sorted(yearly)],
        soh_series=np.array(soh_series),
        daily_log=log,
    )
    eol = eol_analysis(result, spec, econ)
    result.economic_eol_year = eol["economic_eol_year"]
    return result


def eol_analysis(result: LifecycleResult, spec: BatterySpec, econ: EconomicParams,
                 include_mdc_in_cashflow: bool = False) -> dict:
    """Fill yearly cash-flow columns and locate the economic end of life.

    Yearly net profit is operating cash (market + swap + reserve income
    minus swap labor) less fixed O&M; the degradation charge is an
    opportunity cost, not cash, and is excluded unless
    ``include_mdc_in_cashflow`` is set.  O&M is prorated in a partial final
    year.  The economic EOL is the last year before the first
    negative-profit year: 0 if the first year is already unprofitable, and
    the physical EOL when no year is unprofitable.  Refreshes the
    O&M-dependent columns of ``result.yearly`` in place.
    """
    om_full_year = econ.fixed_om_per_kw_year * spec.power_limit * 1000.0
    rate = econ.discount_rate
    first_negative = None
    for row in result.yearly:
        om = om_full_year * row["days"] / DAYS_PER_YEAR
        cash = row["operating_cash"]
        if include_mdc_in_cashflow:
            cash -= row["mdc_cost"]
        net = cash - om
        row["om_cost"] = om
        row["net_profit"] = net
        row["discounted_net"] = net * (1.0 + rate) ** (-(row["year"] - 1))
        if net < 0 and first_negative is None:
            first_negative = row["year"]

    if first_negative is not None:
        economic = first_negative - 1
    else:
        economic = result.physical_eol_year  # profitable to the end
    return {
        "physical_eol_year": result.physical_eol_year,
        "economic_eol_year": economic,
    }


def max_daily_throughput(spec: BatterySpec, swap: SwapTerms | None = None) -> float:
    """Upper bound on one day's budget draw, for the overshoot invariant."""
    swap_cap = 0.0 if swap is None else min(swap.daily_swap_cap,
                                            24.0 * spec.energy_capacity_0)
    return 24.0 * 2.0 * spec.power_limit + swap_cap + calendar_throughput_per_day(spec)
