"""Compiled hourly loop used by the engine.

Mirrors ``engine.step_power`` slot for slot; kept separate so the public
function stays readable and this one stays fast.
"""

import numpy as np
from numba import njit

AT_HOME = 0
COMMUTING = 1
AT_WORK = 2
IDLE = 3


@njit(cache=True)
def run_hours(labels, sell_ok, prices, commute_kwh, capacity, dod, eta,
              r_ch, r_d, floor, can_sell, soc_trace):
    """Simulate contiguous hours starting from a full battery.

    Returns (revenue, energy_cost, kwh_sold, kwh_bought, discharged_kwh,
    commute_total, final_soc, min_soc, max_soc, first_violation). Stored
    energy is tracked in kWh; ``first_violation`` is -1 when the SoC stayed in
    bounds, else the first offending hour. ``soc_trace`` (length 0 or n)
    receives the SoC at the end of each hour.
    """
    n = labels.shape[0]
    stored = capacity
    floor_kwh = floor * capacity
    low_kwh = (1.0 - dod) * capacity
    tol = 1e-9 * capacity
    revenue = 0.0
    energy_cost = 0.0
    sold = 0.0
    bought = 0.0
    discharged = 0.0
    commuted = 0.0
    min_soc = 1.0
    max_soc = 1.0
    violation = -1
    record = soc_trace.shape[0] == n
    for i in range(n):
        label = labels[i]
        if label == AT_WORK:
            if can_sell and sell_ok[i]:
                head = stored - floor_kwh
                if head > 0.0:
                    e = r_d if r_d < head else head
                    stored -= e
                    grid = eta * e
                    revenue += grid * prices[i]
                    sold += grid
                    discharged += e
        elif label == AT_HOME:
            head = capacity - stored
            if head > 0.0:
                e = r_ch if r_ch < head else head
                stored += e
                grid = e / eta
                energy_cost += grid * prices[i]
                bought += grid
        elif label == COMMUTING:
            e = commute_kwh[i]
            stored -= e
            discharged += e
            commuted += e
        soc = stored / capacity
        if soc < min_soc:
            min_soc = soc
        if soc > max_soc:
            max_soc = soc
        if violation < 0 and (stored < low_kwh - tol or stored > capacity + tol):
            violation = i
        if record:
            soc_trace[i] = soc
    return (revenue, energy_cost, sold, bought, discharged, commuted,
            stored / capacity, min_soc, max_soc, violation)


def empty_trace():
    return np.empty(0, dtype=np.float64)
