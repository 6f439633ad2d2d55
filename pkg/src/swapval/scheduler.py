"""Daily dispatch: build and solve the 24-hour scheduling LP.

One day couples four channels on a shared state of charge: grid charging,
grid discharging, battery swapping (energy handed to EV customers), and a
non-spinning reserve offer.  The objective prices energy at the hourly LMP,
swapped energy at the swap price net of labor, reserve capacity at the
reserve price, and every MWh moved through the battery at the adjusted
marginal degradation cost ``amdc``.  A daily calendar-throughput charge
``amdc * calendar_throughput_today`` applies regardless of activity; it is
a constant, so it is added when profits are reported rather than carried in
the LP.

A tiny penalty on throughput breaks ties among optimal schedules in favor
of the least-degrading one (e.g. no simultaneous charge+discharge unless
negative prices genuinely pay for it); the penalty is removed from all
reported profit figures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from swapval.lp import LE, EQ, LinearProgram, solve_lp

TIE_BREAK_EPS = 1e-7


class ScheduleError(RuntimeError):
    """Internal scheduling failure: an infeasible daily LP or a corrupted
    schedule.  The all-zero schedule is always feasible, so these indicate
    modeling bugs rather than bad market data."""


@dataclass(frozen=True)
class BatterySpec:
    """Physical battery parameters."""

    energy_capacity_0: float  # MWh at start of life
    power_limit: float  # MWh per hour, charge and discharge each
    efficiency: float  # one-way charge/discharge efficiency in (0, 1]
    self_discharge: float = 0.0  # hourly fraction in [0, 1)
    cycle_life: float = 2000.0  # full cycles at 100% DOD until EOL capacity
    eol_capacity_fraction: float = 0.8
    calendar_fade_per_year: float = 0.01  # fraction of initial capacity

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if not 0 <= self.self_discharge < 1:
            raise ValueError(f"self_discharge must be in [0, 1), got {self.self_discharge}")
        if not 0 < self.eol_capacity_fraction < 1:
            raise ValueError(
                f"eol_capacity_fraction must be in (0, 1), got {self.eol_capacity_fraction}")
        if self.cycle_life <= 0:
            raise ValueError(f"cycle_life must be positive, got {self.cycle_life}")
        if self.energy_capacity_0 <= 0 or self.power_limit <= 0:
            raise ValueError("energy_capacity_0 and power_limit must be positive")
        if self.calendar_fade_per_year < 0:
            raise ValueError(f"calendar fade must be >= 0, got {self.calendar_fade_per_year}")


@dataclass(frozen=True)
class SwapTerms:
    """Swap pricing: $/MWh paid by EV customers, daily demand cap, labor."""

    swap_price: float  # $/MWh delivered
    daily_swap_cap: float  # MWh/day the market will absorb
    labor_cost: float = 10.0  # $/MWh delivered

    def __post_init__(self):
        if self.daily_swap_cap < 0:
            raise ValueError(f"daily_swap_cap must be >= 0, got {self.daily_swap_cap}")
        if self.labor_cost < 0:
            raise ValueError(f"labor_cost must be >= 0, got {self.labor_cost}")


NO_SWAP = SwapTerms(swap_price=0.0, daily_swap_cap=0.0, labor_cost=0.0)


@dataclass
class DayInput:
    """Everything the daily LP needs for one day."""

    battery: BatterySpec
    lmp: np.ndarray  # 24 hourly energy prices, $/MWh (may be negative)
    reserve_price: np.ndarray  # 24 hourly reserve prices, $/MW-h, >= 0
    amdc: float  # adjusted marginal degradation cost, $/MWh-throughput
    swap: SwapTerms
    soc_start: float  # MWh stored at hour 0
    capacity_now: float  # SOH-derated usable capacity, MWh
    calendar_throughput_today: float = 0.0  # MWh-throughput charged daily
    reserve_enabled: bool = True

    def __post_init__(self):
        self.lmp = np.asarray(self.lmp, dtype=float)
        self.reserve_price = np.asarray(self.reserve_price, dtype=float)
        if self.lmp.shape != (24,) or self.reserve_price.shape != (24,):
            raise ValueError("lmp and reserve_price must each hold 24 hourly values")
        if np.any(self.reserve_price < 0):
            raise ValueError("reserve prices must be >= 0")
        if self.amdc < 0:
            raise ValueError(f"amdc must be >= 0, got {self.amdc}")
        if self.calendar_throughput_today < 0:
            raise ValueError("calendar_throughput_today must be >= 0")
        if self.capacity_now <= 0:
            raise ValueError(f"capacity_now must be positive, got {self.capacity_now}")
        if not 0 <= self.soc_start <= self.capacity_now + 1e-9:
            raise ValueError(
                f"soc_start {self.soc_start} outside [0, capacity {self.capacity_now}]")


@dataclass
class DailySchedule:
    """Solved day: hourly quantities, SOC path, and profit decomposition."""

    charge: np.ndarray
    discharge: np.ndarray
    swap_out: np.ndarray
    reserve_offer: np.ndarray
    soc: np.ndarray  # end-of-hour stored energy
    market_revenue: float  # energy + swap + reserve income
    swap_labor_cost: float
    degradation_cost: float  # amdc * (throughput incl. calendar)
    sb_star: float  # market_revenue - swap_labor_cost - degradation_cost
    throughput_today: float  # charge + discharge + swap + calendar, MWh
    energy_revenue: float = 0.0
    swap_revenue: float = 0.0
    reserve_revenue: float = 0.0
    lp_objective: float = 0.0  # raw LP optimum (tie-break included, no calendar)


def _weights(hours: int, keep: float) -> np.ndarray:
    # w[h, j] = keep**(h - j) for j <= h else 0; soc_h response to hour-j flows.
    idx = np.arange(hours)
    power = idx[:, None] - idx[None, :]
    w = np.where(power >= 0, keep ** np.maximum(power, 0), 0.0)
    return w


def _objective(day: DayInput, hours: int, with_swap: bool, with_reserve: bool,
               with_soc: bool) -> np.ndarray:
    lmp = day.lmp[:hours]
    mu = day.amdc
    parts = [
        -lmp - mu - TIE_BREAK_EPS,  # charge
        lmp - mu - TIE_BREAK_EPS,  # discharge
    ]
    if with_swap:
        parts.append(np.full(hours, day.swap.swap_price - day.swap.labor_cost
                             - mu - TIE_BREAK_EPS))
    if with_soc:
        parts.append(np.zeros(hours))
    if with_reserve:
        parts.append(day.reserve_price[:hours].astype(float))
    return np.concatenate(parts)


def build_daily_lp(day: DayInput, hours: int = 24) -> LinearProgram:
    """Assemble the scheduling LP for the first ``hours`` hours of a day.

    Variable order: charge[0..H), discharge[0..H), swap[0..H), soc[0..H),
    and reserve[0..H) when reserve is enabled.  The SOC recursion appears as
    equality rows; swap demand as one cap row; reserve as headroom and
    stored-energy coupling rows.  The daily calendar charge is a constant
    and is excluded here (see module docstring).
    """
    if not 1 <= hours <= 24:
        raise ValueError(f"hours must be in [1, 24], got {hours}")
    b = day.battery
    eta, keep = b.efficiency, 1.0 - b.self_discharge
    H = hours
    res = day.reserve_enabled
    n = (5 if res else 4) * H
    i_cha, i_dis, i_swp, i_soc = 0, H, 2 * H, 3 * H
    i_res = 4 * H

    lower = np.zeros(n)
    upper = np.empty(n)
    upper[i_cha:i_dis] = b.power_limit
    upper[i_dis:i_swp] = b.power_limit
    upper[i_swp:i_soc] = day.capacity_now
    upper[i_soc : i_soc + H] = day.capacity_now
    if res:
        upper[i_res:] = b.power_limit

    rows, rels, rhs = [], [], []
    for h in range(H):
        row = np.zeros(n)
        row[i_soc + h] = 1.0
        if h > 0:
            row[i_soc + h - 1] = -keep
        row[i_cha + h] = -eta
        row[i_dis + h] = 1.0 / eta
        row[i_swp + h] = 1.0 / eta
        rows.append(row)
        rels.append(EQ)
        rhs.append(keep * day.soc_start if h == 0 else 0.0)

    cap_row = np.zeros(n)
    cap_row[i_swp:i_soc] = 1.0
    rows.append(cap_row)
    rels.append(LE)
    rhs.append(day.swap.daily_swap_cap)

    if res:
        for h in range(H):
            row = np.zeros(n)
            row[i_res + h] = 1.0
            row[i_dis + h] = 1.0
            rows.append(row)
            rels.append(LE)
            rhs.append(b.power_limit)
        for h in range(H):
            row = np.zeros(n)
            row[i_res + h] = 1.0
            row[i_soc + h] = -eta
            rows.append(row)
            rels.append(LE)
            rhs.append(0.0)

    return LinearProgram(
        objective=_objective(day, H, with_swap=True, with_reserve=res, with_soc=True),
        lower=lower, upper=upper,
        A=np.array(rows), relations=rels, rhs=np.array(rhs),
    )


def build_compact_lp(day: DayInput, hours: int) -> LinearProgram:
    """State-eliminated form of the same day, for the enumeration oracle.

    SOC variables are substituted out through the recursion, turning SOC
    bounds into general rows over the flow variables; rows that the box
    bounds already make unviolable are dropped.  When the swap cap is zero
    the swap variables are dropped too.  The optimum (including the
    tie-break term) matches build_daily_lp exactly, reaching far fewer
    variables so small instances fit the oracle's enumeration limit.
    """
    if not 1 <= hours <= 24:
        raise ValueError(f"hours must be in [1, 24], got {hours}")
    b = day.battery
    eta, keep = b.efficiency, 1.0 - b.self_discharge
    H = hours
    res = day.reserve_enabled
    swap_on = day.swap.daily_swap_cap > 0
    blocks = 2 + (1 if swap_on else 0) + (1 if res else 0)
    n = blocks * H
    i_cha, i_dis = 0, H
    i_swp = 2 * H if swap_on else None
    i_res = (3 * H if swap_on else 2 * H) if res else None

    lower = np.zeros(n)
    upper = np.empty(n)
    upper[i_cha:i_cha + H] = b.power_limit
    upper[i_dis:i_dis + H] = b.power_limit
    if swap_on:
        upper[i_swp : i_swp + H] = day.capacity_now
    if res:
        upper[i_res : i_res + H] = b.power_limit

    w = _weights(H, keep)  # soc_h = base_h + sum_j w[h,j] * flow_j
    base = keep ** (np.arange(H) + 1.0) * day.soc_start

    def soc_coeffs(h: int) -> np.ndarray:
        row = np.zeros(n)
        row[i_cha : i_cha + H] = w[h] * eta
        row[i_dis : i_dis + H] = -w[h] / eta
        if swap_on:
            row[i_swp : i_swp + H] = -w[h] / eta
        return row

    rows, rels, rhs = [], [], []
    for h in range(H):
        coeff = soc_coeffs(h)
        rows.append(-coeff)  # soc_h >= 0
        rels.append(LE)
        rhs.append(base[h])
        rows.append(coeff)  # soc_h <= capacity
        rels.append(LE)
        rhs.append(day.capacity_now - base[h])

    if swap_on:
        cap_row = np.zeros(n)
        cap_row[i_swp : i_swp + H] = 1.0
        rows.append(cap_row)
        rels.append(LE)
        rhs.append(day.swap.daily_swap_cap)

    if res:
        for h in range(H):
            row = np.zeros(n)
            row[i_res + h] = 1.0
            row[i_dis + h] = 1.0
            rows.append(row)
            rels.append(LE)
            rhs.append(b.power_limit)
        for h in range(H):
            row = -eta * soc_coeffs(h)
            row[i_res + h] += 1.0
            rows.append(row)
            rels.append(LE)
            rhs.append(eta * base[h])

    A = np.array(rows)
    rhs = np.array(rhs)
    # Drop rows no corner of the box can violate.
    sup = np.where(A > 0, A * upper[None, :], A * lower[None, :]).sum(axis=1)
    live = sup > rhs
    A, rhs = A[live], rhs[live]
    rels = [r for r, keep_row in zip(rels, live) if keep_row]

    return LinearProgram(
        objective=_objective(day, H, with_swap=swap_on, with_reserve=res, with_soc=False),
        lower=lower, upper=upper, A=A, relations=rels, rhs=rhs,
    )


def solve_day(day: DayInput, hours: int = 24) -> DailySchedule:
    """Solve one day and return the schedule with its profit decomposition.

    ``hours`` < 24 truncates the horizon (test reductions only).  Raises
    ScheduleError if the LP is anything but optimal: the all-zero schedule
    is always feasible, so a non-optimal verdict means an internal bug.
    """
    lp = build_daily_lp(day, hours)
    sol = solve_lp(lp)
    if sol.status != "optimal":
        raise ScheduleError(
            f"daily LP reported {sol.status!r}; the all-zero schedule is always "
            f"feasible, so this is a modeling bug")
    H = hours
    x = sol.x
    charge = x[0:H]
    discharge = x[H : 2 * H]
    swap_out = x[2 * H : 3 * H]
    soc = x[3 * H : 4 * H]
    reserve = x[4 * H : 5 * H] if day.reserve_enabled else np.zeros(H)

    energy_rev = float(day.lmp[:H] @ (discharge - charge))
    swap_rev = float(day.swap.swap_price * swap_out.sum())
    reserve_rev = float(day.reserve_price[:H] @ reserve)
    labor = float(day.swap.labor_cost * swap_out.sum())
    moved = float(charge.sum() + discharge.sum() + swap_out.sum())
    throughput = moved + day.calendar_throughput_today
    degradation = day.amdc * throughput
    revenue = energy_rev + swap_rev + reserve_rev

    return DailySchedule(
        charge=charge, discharge=discharge, swap_out=swap_out,
        reserve_offer=reserve, soc=soc,
        market_revenue=revenue,
        swap_labor_cost=labor,
        degradation_cost=degradation,
        sb_star=revenue - labor - degradation,
        throughput_today=throughput,
        energy_revenue=energy_rev, swap_revenue=swap_rev, reserve_revenue=reserve_rev,
        lp_objective=float(sol.objective_value),
    )


def validate_schedule(schedule: DailySchedule, day: DayInput,
                      soc_tol: float = 1e-9) -> None:
    """Assert the schedule's physical invariants; raises ScheduleError."""
    b = day.battery
    H = len(schedule.charge)
    eta, keep = b.efficiency, 1.0 - b.self_discharge
    prev = np.concatenate([[day.soc_start], schedule.soc[:-1]])
    resid = schedule.soc - (keep * prev + eta * schedule.charge
                            - schedule.discharge / eta - schedule.swap_out / eta)
    checks = [
        (np.max(np.abs(resid)), soc_tol, "SOC recursion residual"),
        (np.max(-schedule.soc, initial=-np.inf), 1e-7, "negative SOC"),
        (np.max(schedule.soc - day.capacity_now, initial=-np.inf), 1e-7, "SOC above capacity"),
        (np.max(schedule.swap_out - day.capacity_now, initial=-np.inf), 1e-7,
         "hourly swap above capacity"),
        (schedule.swap_out.sum() - day.swap.daily_swap_cap, 1e-7, "swap above daily cap"),
        (np.max(np.concatenate([schedule.charge, schedule.discharge]) - b.power_limit),
         1e-7, "power limit"),
        (np.max(-np.concatenate([schedule.charge, schedule.discharge,
                                 schedule.swap_out, schedule.reserve_offer])),
         1e-7, "negative quantity"),
        (abs(schedule.sb_star - (schedule.market_revenue - schedule.swap_labor_cost
                                 - schedule.degradation_cost)), 1e-6, "profit identity"),
    ]
    if day.reserve_enabled:
        checks.append((np.max(schedule.reserve_offer + schedule.discharge - b.power_limit),
                       1e-7, "reserve headroom"))
        checks.append((np.max(schedule.reserve_offer - eta * schedule.soc),
                       1e-7, "reserve energy coupling"))
    for value, tol, label in checks:
        if value > tol:
            raise ScheduleError(f"{label} violated by {value:.3e}")


def decompose_profit(schedule: DailySchedule, day: DayInput) -> dict[str, float]:
    """Recompute the profit decomposition from the raw schedule.

    Returns {'revenue', 'labor', 'degradation', 'sb_star'} and raises
    ScheduleError if the recomputation disagrees with the schedule's own
    totals beyond tolerance (a corrupted schedule).
    """
    H = len(schedule.charge)
    energy_rev = float(day.lmp[:H] @ (schedule.discharge - schedule.charge))
    swap_total = float(schedule.swap_out.sum())
    revenue = energy_rev + day.swap.swap_price * swap_total \
        + float(day.reserve_price[:H] @ schedule.reserve_offer)
    labor = day.swap.labor_cost * swap_total
    moved = float(schedule.charge.sum() + schedule.discharge.sum() + swap_total)
    degradation = day.amdc * (moved + day.calendar_throughput_today)
    sb = revenue - labor - degradation

    scale = max(1.0, abs(revenue), abs(degradation))
    for got, stored, label in [
        (revenue, schedule.market_revenue, "revenue"),
        (labor, schedule.swap_labor_cost, "labor"),
        (degradation, schedule.degradation_cost, "degradation"),
        (sb, schedule.sb_star, "sb_star"),
    ]:
        if abs(got - stored) > 1e-6 * scale:
            raise ScheduleError(
                f"schedule inconsistent: recomputed {label} {got} != stored {stored}")
    return {"revenue": revenue, "labor": labor, "degradation": degradation, "sb_star": sb}
