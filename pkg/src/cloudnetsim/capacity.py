"""Offline capacity region and minimum-cost allocation linear program.

Time-averaged flow variables f and allocation-share variables p decide
whether long-run average arrival rates can be supported by the network,
and at what minimum average cost.  The share p[element, k, c] is the
fraction of slots the element spends at allocation level k serving
commodity c, so each element's shares sum to at most 1.  Products
"fraction of time at level k" x "fraction given to c" are linearized
exactly by summing capacity over (k, c) pairs.

Reconfiguration delays and costs do not enter: time-average capacity and
cost are properties of the stationary shares alone, so this module never
reads the reconfiguration profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .model import CloudNetwork, CommoditySet

_HIGHS_OPTS = {
    "primal_feasibility_tolerance": 1e-7,
    "dual_feasibility_tolerance": 1e-7,
}


@dataclass
class CapacityProgram:
    """min c @ x  s.t.  A_ub @ x <= b_ub, bounds[i][0] <= x_i <= bounds[i][1]."""

    objective: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    bounds: list
    scale: float
    link_flow_index: dict = field(default_factory=dict)   # (link, c) -> column
    node_flow_index: dict = field(default_factory=dict)   # (node, c) -> column
    node_alloc_index: dict = field(default_factory=dict)  # (node, k, c) -> column
    link_alloc_index: dict = field(default_factory=dict)  # (link, k, c) -> column

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    def describe(self) -> str:
        return (
            f"{self.n_vars} variables "
            f"({len(self.link_flow_index)} link flows, "
            f"{len(self.node_flow_index)} node flows, "
            f"{len(self.node_alloc_index)} node shares, "
            f"{len(self.link_alloc_index)} link shares), "
            f"{self.A_ub.shape[0]} inequality rows, scale {self.scale:g}"
        )


def rates_from_specs(specs) -> dict:
    """Mean injection rates keyed by (node, commodity id)."""
    rates = {}
    for s in specs:
        key = (s.node, s.commodity)
        rates[key] = rates.get(key, 0.0) + s.rate
    return rates


def build_program(net: CloudNetwork, commodities: CommoditySet,
                  rates: dict, scale: float = 1.0) -> CapacityProgram:
    """Assemble the LP for arrival rates multiplied by `scale`.

    rates maps (node, commodity id) to a mean packets-per-slot rate.
    Flow conservation is imposed for every (node, commodity) pair except a
    final-stage commodity at its own destination, where packets leave the
    system."""
    nodes = list(net.nodes)
    links = list(net.links)
    cids = sorted(commodities.ids())
    for (i, c) in rates:
        if i not in net.nodes:
            raise KeyError(f"unknown arrival node {i!r}")
        if c not in commodities:
            raise KeyError(f"unknown arrival commodity {c!r}")

    lf, nf, na_, la = {}, {}, {}, {}
    col = 0
    for ln in links:
        for c in cids:
            lf[(ln, c)] = col
            col += 1
    for i in nodes:
        for c in cids:
            nf[(i, c)] = col
            col += 1
    for i in nodes:
        prof = net.node_profile[i]
        for k in range(1, prof.max_units + 1):
            for c in cids:
                if commodities[c].successor is None:
                    continue
                na_[(i, k, c)] = col
                col += 1
    for ln in links:
        prof = net.link_profile[ln]
        for k in range(1, prof.max_units + 1):
            for c in cids:
                la[(ln, k, c)] = col
                col += 1
    n = col

    obj = np.zeros(n)
    for (i, k, c), j in na_.items():
        prof = net.node_profile[i]
        ratio = commodities[c].proc_ratio_at(i)
        obj[j] = prof.alloc_cost[k] + prof.unit_flow_cost * prof.capacity[k] / ratio
    for (ln, k, c), j in la.items():
        prof = net.link_profile[ln]
        obj[j] = prof.alloc_cost[k] + prof.unit_flow_cost * prof.capacity[k]

    bounds = [(0.0, None)] * n
    for (i, c), j in nf.items():
        if commodities[c].successor is None:
            bounds[j] = (0.0, 0.0)   # final stages are not processed further

    rows, rhs = [], []

    # conservation: inflow + production + arrivals <= outflow + processing
    for i in nodes:
        for c in cids:
            com = commodities[c]
            if com.successor is None and com.destination == i:
                continue
            row = np.zeros(n)
            for ln in net.in_links(i):
                row[lf[(ln, c)]] += 1.0
            if com.predecessor is not None:
                row[nf[(i, com.predecessor)]] += com.scale
            for ln in net.out_links(i):
                row[lf[(ln, c)]] -= 1.0
            row[nf[(i, c)]] -= 1.0
            rows.append(row)
            rhs.append(-scale * rates.get((i, c), 0.0))

    # processing capacity per (node, processable commodity)
    for i in nodes:
        prof = net.node_profile[i]
        for c in cids:
            if commodities[c].successor is None:
                continue
            ratio = commodities[c].proc_ratio_at(i)
            row = np.zeros(n)
            row[nf[(i, c)]] = 1.0
            for k in range(1, prof.max_units + 1):
                row[na_[(i, k, c)]] = -prof.capacity[k] / ratio
            rows.append(row)
            rhs.append(0.0)

    # transmission capacity per (link, commodity)
    for ln in links:
        prof = net.link_profile[ln]
        for c in cids:
            row = np.zeros(n)
            row[lf[(ln, c)]] = 1.0
            for k in range(1, prof.max_units + 1):
                row[la[(ln, k, c)]] = -prof.capacity[k]
            rows.append(row)
            rhs.append(0.0)

    # share budgets
    for i in nodes:
        cols = [j for (ii, _, _), j in na_.items() if ii == i]
        if cols:
            row = np.zeros(n)
            row[cols] = 1.0
            rows.append(row)
            rhs.append(1.0)
    for ln in links:
        cols = [j for (ll, _, _), j in la.items() if ll == ln]
        if cols:
            row = np.zeros(n)
            row[cols] = 1.0
            rows.append(row)
            rhs.append(1.0)

    return CapacityProgram(
        objective=obj,
        A_ub=np.array(rows) if rows else np.zeros((0, n)),
        b_ub=np.array(rhs),
        bounds=bounds,
        scale=float(scale),
        link_flow_index=lf,
        node_flow_index=nf,
        node_alloc_index=na_,
        link_alloc_index=la,
    )


def _solve(program: CapacityProgram):
    return linprog(program.objective, A_ub=program.A_ub, b_ub=program.b_ub,
                   bounds=program.bounds, method="highs", options=_HIGHS_OPTS)


def is_feasible(net: CloudNetwork, commodities: CommoditySet, rates: dict,
                scale: float = 1.0) -> bool:
    res = _solve(build_program(net, commodities, rates, scale))
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    raise RuntimeError(f"solver failure: {res.message}")


def min_cost(net: CloudNetwork, commodities: CommoditySet, rates: dict,
             scale: float = 1.0, drop_below: float = 1e-9):
    """Minimum long-run average cost supporting the scaled rates.

    Returns (cost, allocation); allocation holds the nonzero optimizer
    entries under keys node_share, link_share, node_flow, link_flow.
    Raises ValueError when the rates are outside the capacity region."""
    program = build_program(net, commodities, rates, scale)
    res = _solve(program)
    if res.status == 2:
        raise ValueError(f"rates at scale {scale:g} are not supportable")
    if res.status != 0:
        raise RuntimeError(f"solver failure: {res.message}")
    x = res.x
    alloc = {"node_share": {}, "link_share": {}, "node_flow": {}, "link_flow": {}}
    for key, j in program.node_alloc_index.items():
        if x[j] > drop_below:
            alloc["node_share"][key] = float(x[j])
    for key, j in program.link_alloc_index.items():
        if x[j] > drop_below:
            alloc["link_share"][key] = float(x[j])
    for key, j in program.node_flow_index.items():
        if x[j] > drop_below:
            alloc["node_flow"][key] = float(x[j])
    for key, j in program.link_flow_index.items():
        if x[j] > drop_below:
            alloc["link_flow"][key] = float(x[j])
    return float(res.fun), alloc


def max_throughput_scale(net: CloudNetwork, commodities: CommoditySet,
                         rates: dict, tol: float = 1e-3,
                         max_doublings: int = 40) -> float:
    """Largest rate multiplier t such that t * rates stays supportable,
    located by doubling then bisection to absolute tolerance tol.  Returns
    the last multiplier verified feasible."""
    if all(r == 0 for r in rates.values()):
        return math.inf
    lo, hi = 0.0, 1.0
    for _ in range(max_doublings):
        if not is_feasible(net, commodities, rates, scale=hi):
            break
        lo, hi = hi, hi * 2.0
    else:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_feasible(net, commodities, rates, scale=mid):
            lo = mid
        else:
            hi = mid
    return lo
