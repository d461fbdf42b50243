"""Slot-level simulation of schedule-controlled queueing dynamics.

State sampling convention: SimState at time t holds the backlogs Q(t) seen
at the start of slot t, the last decided schedule of every element (pending
schedules included while a reconfiguration is in progress) and the
countdown value computed in slot t-1.

Within step(t): reconfiguration triggers first (countdown resets to the
element's delay and the event cost is charged; re-triggering during a
countdown restarts it), countdowns of untouched elements decrement floored
at zero, and an element serves in this slot iff its updated countdown is
zero.  Service draws on the slot-start backlog snapshot; in `actual` mode
realized flow is capped by what is available (processing claims a queue
before outgoing links, links in lexicographic id order), in `nominal` mode
the scheduled rates are applied literally with the queue update clamped at
zero (receivers are credited the full rate, so packets can be created at a
queue that ran empty; useful for contract tests, not conservation).
Final-stage packets that reach their destination are absorbed into the
delivered counters.  Cost per slot = unit flow costs on (realized or
nominal) flow + allocation cost w(k) of every element not under countdown
+ reconfiguration event costs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from ._kernel import ACTUAL, NOMINAL, NetArrays, _decide_links, _decide_nodes, _run, _step
from .arrivals import generate_schedule
from .model import CloudNetwork, CommoditySet

Schedule = tuple  # (k, commodity id or None)


@dataclass
class SimState:
    t: int
    queues: dict            # (node, commodity id) -> backlog
    node_schedule: dict     # node -> (k, c)
    link_schedule: dict     # link -> (k, c)
    node_countdown: dict    # node -> countdown value from the previous slot
    link_countdown: dict
    delivered: dict         # commodity id -> cumulative packets delivered

    def total_queue(self) -> float:
        return float(sum(self.queues.values()))


@dataclass
class PolicyDecision:
    node_targets: dict      # node -> (k, c)
    link_targets: dict      # link -> (k, c)
    # elements whose schedule change should be charged at the commodity-only
    # reconfiguration overhead (set by the two-stage policy's second stage)
    commodity_only_nodes: frozenset = frozenset()
    commodity_only_links: frozenset = frozenset()


@dataclass
class SlotReport:
    t: int
    flows: dict             # (element, commodity id) -> packets moved
    cost_flow: float
    cost_alloc: float
    cost_reconfig: float
    reconfig_events: list   # (element, previous schedule, new schedule)
    deliveries: dict        # commodity id -> packets delivered this slot
    reconfiguring: int      # elements under countdown this slot

    @property
    def cost_total(self) -> float:
        return self.cost_flow + self.cost_alloc + self.cost_reconfig


def initial_state(net: CloudNetwork, commodities: CommoditySet) -> SimState:
    """Empty queues, everything idle at k = 0, no countdowns."""
    queues = {(i, c.id): 0.0 for i in net.nodes for c in commodities}
    return SimState(
        t=0,
        queues=queues,
        node_schedule={i: (0, None) for i in net.nodes},
        link_schedule={ln: (0, None) for ln in net.links},
        node_countdown={i: 0 for i in net.nodes},
        link_countdown={ln: 0 for ln in net.links},
        delivered={c.id: 0.0 for c in commodities},
    )


def is_reconfiguration(prev: Schedule, new: Schedule) -> bool:
    """A schedule change: any k change, or a commodity change while k > 0."""
    pk, pc = prev
    nk, nc = new
    if nk != pk:
        return True
    return nk > 0 and nc != pc


def _sched_to_arrays(na: NetArrays, sched: dict, keys, is_node: bool):
    n = len(keys)
    ks = np.zeros(n, dtype=np.int64)
    cs = np.full(n, -1, dtype=np.int64)
    for idx, key in enumerate(keys):
        k, c = sched.get(key, (0, None))
        ks[idx] = k
        if k > 0 and c is not None:
            cs[idx] = na.comm_index[c]
    return ks, cs


def _state_to_arrays(na: NetArrays, state: SimState):
    Q = np.zeros((na.N, na.C))
    for (node, cid), q in state.queues.items():
        Q[na.node_index[node], na.comm_index[cid]] = float(q)
    kn, cn = _sched_to_arrays(na, state.node_schedule, na.node_names, True)
    kl, cl = _sched_to_arrays(na, state.link_schedule, na.link_ids, False)
    rn = np.array([int(state.node_countdown.get(i, 0)) for i in na.node_names], dtype=np.int64)
    rl = np.array([int(state.link_countdown.get(ln, 0)) for ln in na.link_ids], dtype=np.int64)
    delivered = np.array([float(state.delivered.get(c, 0.0)) for c in na.comm_ids])
    return Q, kn, cn, rn, kl, cl, rl, delivered


def _arrays_to_state(na: NetArrays, t, Q, kn, cn, rn, kl, cl, rl, delivered) -> SimState:
    def sched(k, c):
        return (int(k), na.comm_ids[c] if k > 0 and c >= 0 else None)
    return SimState(
        t=t,
        queues={(i, cid): float(Q[ii, ci])
                for ii, i in enumerate(na.node_names)
                for ci, cid in enumerate(na.comm_ids)},
        node_schedule={i: sched(kn[ii], cn[ii]) for ii, i in enumerate(na.node_names)},
        link_schedule={ln: sched(kl[e], cl[e]) for e, ln in enumerate(na.link_ids)},
        node_countdown={i: int(rn[ii]) for ii, i in enumerate(na.node_names)},
        link_countdown={ln: int(rl[e]) for e, ln in enumerate(na.link_ids)},
        delivered={cid: float(delivered[ci]) for ci, cid in enumerate(na.comm_ids)},
    )


def _validate_decision(decision: PolicyDecision, net: CloudNetwork,
                       commodities: CommoditySet):
    for name, targets, profiles in (
        ("node", decision.node_targets, net.node_profile),
        ("link", decision.link_targets, net.link_profile),
    ):
        for elem, (k, c) in targets.items():
            if elem not in profiles:
                raise ValueError(f"decision targets unknown {name} {elem!r}")
            prof = profiles[elem]
            if not (0 <= k <= prof.max_units):
                raise ValueError(
                    f"{name} {elem!r}: allocation {k} outside 0..{prof.max_units}")
            if k > 0:
                if c is None or c not in commodities:
                    raise ValueError(f"{name} {elem!r}: unknown commodity {c!r}")
                if name == "node" and commodities[c].successor is None:
                    raise ValueError(
                        f"node {elem!r}: commodity {c} is final-stage, it cannot be processed")


def step(state: SimState, decision: PolicyDecision, arrivals: dict,
         net: CloudNetwork, commodities: CommoditySet,
         mode: str = "actual") -> tuple[SimState, SlotReport]:
    """Advance one slot.  `arrivals` maps (node, commodity id) -> count."""
    _validate_decision(decision, net, commodities)
    na = NetArrays(net, commodities)
    Q, kn, cn, rn, kl, cl, rl, delivered = _state_to_arrays(na, state)
    prev_nsched = {i: state.node_schedule.get(i, (0, None)) for i in na.node_names}
    prev_lsched = {ln: state.link_schedule.get(ln, (0, None)) for ln in na.link_ids}

    dk_n, dc_n = _sched_to_arrays(na, decision.node_targets, na.node_names, True)
    dk_l, dc_l = _sched_to_arrays(na, decision.link_targets, na.link_ids, False)

    # elements without an explicit target keep their schedule
    for idx, i in enumerate(na.node_names):
        if i not in decision.node_targets:
            dk_n[idx], dc_n[idx] = kn[idx], cn[idx]
    for e, ln in enumerate(na.link_ids):
        if ln not in decision.link_targets:
            dk_l[e], dc_l[e] = kl[e], cl[e]

    cf_n = np.array([1 if i in decision.commodity_only_nodes else 0
                     for i in na.node_names], dtype=np.uint8)
    cf_l = np.array([1 if ln in decision.commodity_only_links else 0
                     for ln in na.link_ids], dtype=np.uint8)

    for (node, cid) in arrivals:
        if node not in na.node_index or cid not in na.comm_index:
            raise ValueError(f"arrival targets unknown queue ({node}, {cid})")
    spec_node = np.array([na.node_index[n] for (n, c) in arrivals], dtype=np.int64)
    spec_comm = np.array([na.comm_index[c] for (n, c) in arrivals], dtype=np.int64)
    arr = np.array([float(v) for v in arrivals.values()])

    dep = np.zeros((na.N, na.C))
    inflow = np.zeros((na.N, na.C))
    deliv_c = np.zeros(na.C)
    flow_n = np.zeros(na.N)
    flow_l = np.zeros(na.E)
    ev_n = np.zeros(na.N, dtype=np.uint8)
    ev_l = np.zeros(na.E, dtype=np.uint8)

    mode_code = NOMINAL if mode == "nominal" else ACTUAL
    if mode not in ("actual", "nominal"):
        raise ValueError(f"unknown mode {mode!r}")

    cost_flow, cost_alloc, cost_rec, _, reconfiguring, _ = _step(
        Q, kn, cn, rn, kl, cl, rl, delivered,
        dk_n, dc_n, cf_n, dk_l, dc_l, cf_l,
        arr, spec_node, spec_comm,
        na.src, na.dst, na.link_cap, na.link_w, na.link_e,
        na.node_cap, na.node_w, na.node_e, na.rho,
        na.succ, na.scale_succ, na.dest, na.final, na.link_lex,
        na.node_full_delay, na.node_full_cost, na.node_comm_delay, na.node_comm_cost,
        na.link_full_delay, na.link_full_cost, na.link_comm_delay, na.link_comm_cost,
        mode_code, dep, inflow, deliv_c, flow_n, flow_l, ev_n, ev_l)

    new_state = _arrays_to_state(na, state.t + 1, Q, kn, cn, rn, kl, cl, rl, delivered)

    flows = {}
    for ii, i in enumerate(na.node_names):
        if flow_n[ii] != 0.0:
            flows[(i, na.comm_ids[cn[ii]])] = float(flow_n[ii])
    for e, ln in enumerate(na.link_ids):
        if flow_l[e] != 0.0:
            flows[(ln, na.comm_ids[cl[e]])] = float(flow_l[e])
    events = []
    for ii, i in enumerate(na.node_names):
        if ev_n[ii]:
            events.append((i, prev_nsched[i], new_state.node_schedule[i]))
    for e, ln in enumerate(na.link_ids):
        if ev_l[e]:
            events.append((ln, prev_lsched[ln], new_state.link_schedule[ln]))
    report = SlotReport(
        t=state.t,
        flows=flows,
        cost_flow=float(cost_flow),
        cost_alloc=float(cost_alloc),
        cost_reconfig=float(cost_rec),
        reconfig_events=events,
        deliveries={na.comm_ids[c]: float(deliv_c[c]) for c in range(na.C)
                    if deliv_c[c] != 0.0},
        reconfiguring=int(reconfiguring),
    )
    return new_state, report


@dataclass
class RunResult:
    """Per-slot series of one simulation (index = slot number)."""

    total_queue: np.ndarray      # backlog at slot start
    cost_flow: np.ndarray
    cost_alloc: np.ndarray
    cost_reconfig: np.ndarray
    deliveries: np.ndarray       # packets delivered per slot
    reconfiguring: np.ndarray    # elements under countdown per slot
    reconfig_events: np.ndarray  # schedule-change events per slot
    final_state: SimState
    horizon: int
    seed: int
    mode: str
    # populated when collect_lemma=True
    link_diff: np.ndarray | None = None   # per slot, per link max commodity differential
    node_diff: np.ndarray | None = None
    link_events: np.ndarray | None = None
    node_events: np.ndarray | None = None
    link_ids: list = field(default_factory=list)
    node_names: list = field(default_factory=list)

    @property
    def cost_total(self) -> np.ndarray:
        return self.cost_flow + self.cost_alloc + self.cost_reconfig


def run(net: CloudNetwork, commodities: CommoditySet, policy, specs,
        horizon: int, seed: int = 0, mode: str = "actual",
        state: SimState | None = None, collect_lemma: bool = False,
        trace_path: str | None = None,
        arrival_schedule: np.ndarray | None = None) -> RunResult:
    """Simulate `horizon` slots under `policy`.

    `policy` is one of the built-in policy objects (fast path) or any object
    with decide(state, net, commodities) -> PolicyDecision (generic path,
    one public step per slot).  Arrival counts are pre-drawn from `specs`
    with the per-slot seeding contract, so results are reproducible and
    independent of internal batching.  `arrival_schedule` short-circuits the
    pre-draw (callers that sweep many cells over the same arrivals reuse one
    generate_schedule(specs, horizon, seed, start=state.t) matrix); it must
    have shape (horizon, len(specs)).
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if mode not in ("actual", "nominal"):
        raise ValueError(f"unknown mode {mode!r}")
    na = NetArrays(net, commodities)
    if state is None:
        state = initial_state(net, commodities)

    rules = getattr(policy, "kernel_rules", None)
    if rules is None:
        return _run_generic(net, commodities, policy, specs, horizon, seed, mode, state)

    node_rule, link_rule, V, g_a, g_b, use_override, override = rules
    if arrival_schedule is not None:
        arr_sched = np.ascontiguousarray(arrival_schedule, dtype=np.int64)
        if arr_sched.shape != (int(horizon), len(specs)):
            raise ValueError(
                f"arrival_schedule shape {arr_sched.shape} != ({horizon}, {len(specs)})")
    else:
        arr_sched = generate_schedule(specs, horizon, seed, start=state.t)
    spec_node = np.array([na.node_index[s.node] for s in specs], dtype=np.int64)
    spec_comm = np.array([na.comm_index[s.commodity] for s in specs], dtype=np.int64)

    Q, kn, cn, rn, kl, cl, rl, delivered = _state_to_arrays(na, state)
    H = int(horizon)
    out_totq = np.zeros(H)
    out_cf = np.zeros(H)
    out_ca = np.zeros(H)
    out_cr = np.zeros(H)
    out_deliv = np.zeros(H)
    out_reconfiguring = np.zeros(H, dtype=np.int64)
    out_events = np.zeros(H, dtype=np.int64)
    if collect_lemma:
        link_diff = np.zeros((H, na.E))
        node_diff = np.zeros((H, na.N))
        ev_n_hist = np.zeros((H, na.N), dtype=np.uint8)
        ev_l_hist = np.zeros((H, na.E), dtype=np.uint8)
    else:
        link_diff = np.zeros((0, na.E))
        node_diff = np.zeros((0, na.N))
        ev_n_hist = np.zeros((0, na.N), dtype=np.uint8)
        ev_l_hist = np.zeros((0, na.E), dtype=np.uint8)

    _run(Q, kn, cn, rn, kl, cl, rl, delivered,
         arr_sched, spec_node, spec_comm,
         na.src, na.dst, na.link_K, na.link_cap, na.link_w, na.link_e,
         na.node_K, na.node_cap, na.node_w, na.node_e, na.rho,
         na.succ, na.scale_succ, na.dest, na.final, na.lexp, na.link_lex,
         na.node_full_delay, na.node_full_cost, na.node_comm_delay, na.node_comm_cost,
         na.link_full_delay, na.link_full_cost, na.link_comm_delay, na.link_comm_cost,
         int(node_rule), int(link_rule), float(V), float(g_a), float(g_b),
         1 if use_override else 0, float(override),
         NOMINAL if mode == "nominal" else ACTUAL,
         1 if collect_lemma else 0,
         out_totq, out_cf, out_ca, out_cr, out_deliv, out_reconfiguring,
         out_events, link_diff, node_diff, ev_n_hist, ev_l_hist)

    final = _arrays_to_state(na, state.t + H, Q, kn, cn, rn, kl, cl, rl, delivered)
    result = RunResult(
        total_queue=out_totq, cost_flow=out_cf, cost_alloc=out_ca,
        cost_reconfig=out_cr, deliveries=out_deliv,
        reconfiguring=out_reconfiguring, reconfig_events=out_events,
        final_state=final, horizon=H, seed=seed, mode=mode,
        link_diff=link_diff if collect_lemma else None,
        node_diff=node_diff if collect_lemma else None,
        link_events=ev_l_hist if collect_lemma else None,
        node_events=ev_n_hist if collect_lemma else None,
        link_ids=list(na.link_ids), node_names=list(na.node_names),
    )
    if trace_path:
        write_trace(result, trace_path)
    return result


def _run_generic(net, commodities, policy, specs, horizon, seed, mode, state):
    """Fallback run loop for custom policy objects (public step per slot)."""
    from .arrivals import sample_arrivals

    H = int(horizon)
    out = RunResult(
        total_queue=np.zeros(H), cost_flow=np.zeros(H), cost_alloc=np.zeros(H),
        cost_reconfig=np.zeros(H), deliveries=np.zeros(H),
        reconfiguring=np.zeros(H, dtype=np.int64),
        reconfig_events=np.zeros(H, dtype=np.int64),
        final_state=state, horizon=H, seed=seed, mode=mode,
    )
    for t in range(H):
        out.total_queue[t] = state.total_queue()
        decision = policy.decide(state, net, commodities)
        arr = sample_arrivals(specs, state.t, seed)
        state, report = step(state, decision, arr, net, commodities, mode=mode)
        out.cost_flow[t] = report.cost_flow
        out.cost_alloc[t] = report.cost_alloc
        out.cost_reconfig[t] = report.cost_reconfig
        out.deliveries[t] = sum(report.deliveries.values())
        out.reconfiguring[t] = report.reconfiguring
        out.reconfig_events[t] = len(report.reconfig_events)
    out.final_state = state
    return out


def write_trace(result: RunResult, path: str):
    """Per-slot trace: one CSV row per slot."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "total_queue", "cost_flow", "cost_alloc",
                    "cost_reconfig", "deliveries", "reconfiguring"])
        for t in range(result.horizon):
            w.writerow([
                t,
                f"{result.total_queue[t]:.9g}",
                f"{result.cost_flow[t]:.9g}",
                f"{result.cost_alloc[t]:.9g}",
                f"{result.cost_reconfig[t]:.9g}",
                f"{result.deliveries[t]:.9g}",
                int(result.reconfiguring[t]),
            ])
