"""Max-weight control policies with and without reconfiguration hysteresis.

Per slot, each element scores candidate schedules (k, c):

  link (i, j):  C_ij(k) * [Q_i^c - Q_j^c - V e_ij]^+ - V w_ij(k)
  node i:       (C_i(k) / rho_i^c) * [Q_i^c - xi^(c+) Q_i^(c+) - V e_i]^+ - V w_i(k)

with ties broken toward the smallest k, then the lexicographically first
commodity id.  The greedy rule ("dcnc") adopts the maximizer every slot.
The hysteresis rule ("adcnc") keeps the current schedule unless the weight
gain exceeds theta = g(C(k_cur) * d*), where d* is the raw backlog
differential of the candidate commodity and g is a strictly increasing
sublinear function (default 0.99 x^0.99).  The two-stage variant ("adcnc2")
additionally allows commodity-only switches under the current allocation,
gated by g of the candidate differential, and charged at the (usually
cheaper) commodity-switch reconfiguration profile.

V >= 0 trades queue backlog against operational cost: larger V weighs cost
more and lets backlogs grow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernel import (
    ADCNC_RULE,
    DCNC_RULE,
    TWO_STAGE_RULE,
    NetArrays,
    _decide_links,
    _decide_nodes,
)
from .engine import PolicyDecision, SimState
from .model import CloudNetwork, CommoditySet, ResourceProfile


@dataclass(frozen=True)
class SublinearG:
    """g(x) = scale * x^exponent on x > 0, zero otherwise."""

    scale: float = 0.99
    exponent: float = 0.99

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be > 0")
        if not (0 < self.exponent < 1):
            raise ValueError("exponent must be in (0, 1)")

    def __call__(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return self.scale * x ** self.exponent

    def inverse(self, y: float) -> float:
        if y <= 0:
            return 0.0
        return (y / self.scale) ** (1.0 / self.exponent)


def _order(backlogs, extra=()):
    keys = set(backlogs)
    for b in extra:
        keys |= set(b)
    return sorted(keys)


def transmission_max_weight(backlog_i: dict, backlog_j: dict,
                            profile: ResourceProfile, V: float,
                            commodity_order=None):
    """Best (weight, k, c) for a link with tail backlogs backlog_i and head
    backlogs backlog_j.  The k = 0 row scores exactly 0, so the returned
    weight is never negative and (0, first commodity) wins all-zero ties."""
    order = list(commodity_order) if commodity_order is not None \
        else _order(backlog_i, (backlog_j,))
    best = (-math.inf, 0, None)
    for k in range(profile.max_units + 1):
        cap, wk = profile.capacity[k], profile.alloc_cost[k]
        for c in order:
            d = backlog_i.get(c, 0.0) - backlog_j.get(c, 0.0) - V * profile.unit_flow_cost
            w = cap * max(d, 0.0) - V * wk
            if w > best[0]:
                best = (w, k, c)
    return best


def transmission_current_weight(backlog_i: dict, backlog_j: dict,
                                profile: ResourceProfile, V: float,
                                schedule) -> float:
    k, c = schedule
    if k == 0 or c is None:
        return 0.0
    d = backlog_i.get(c, 0.0) - backlog_j.get(c, 0.0) - V * profile.unit_flow_cost
    return profile.capacity[k] * max(d, 0.0) - V * profile.alloc_cost[k]


def adcnc_link_decide(backlog_i: dict, backlog_j: dict, profile: ResourceProfile,
                      V: float, g: SublinearG, schedule, commodity_order=None):
    """Hysteresis rule for one link; returns the (k, c) to run this slot."""
    w_star, k_star, c_star = transmission_max_weight(
        backlog_i, backlog_j, profile, V, commodity_order)
    w_cur = transmission_current_weight(backlog_i, backlog_j, profile, V, schedule)
    k_cur = schedule[0]
    theta = 0.0
    if c_star is not None:
        d_star = backlog_i.get(c_star, 0.0) - backlog_j.get(c_star, 0.0)
        theta = g(profile.capacity[k_cur] * d_star)
    if w_star - w_cur > theta:
        return (k_star, c_star if k_star > 0 else None)
    return (schedule[0], schedule[1])


def _node_diff(backlog_i: dict, commodities: CommoditySet, c,
               weighted: bool = True) -> float:
    com = commodities[c]
    succ = com.successor
    q_succ = backlog_i.get(succ, 0.0)
    scale = commodities[succ].scale if weighted else 1.0
    return backlog_i.get(c, 0.0) - scale * q_succ


def processing_max_weight(backlog_i: dict, commodities: CommoditySet,
                          profile: ResourceProfile, V: float, node: str):
    """Best (weight, k, c) for processing at `node`; final-stage commodities
    are not candidates (they have no consuming function)."""
    order = sorted(c.id for c in commodities.processable())
    best = (-math.inf, 0, None)
    for k in range(profile.max_units + 1):
        cap, wk = profile.capacity[k], profile.alloc_cost[k]
        for c in order:
            d = _node_diff(backlog_i, commodities, c) - V * profile.unit_flow_cost
            ratio = commodities[c].proc_ratio_at(node)
            w = (cap / ratio) * max(d, 0.0) - V * wk
            if w > best[0]:
                best = (w, k, c)
    return best


def processing_current_weight(backlog_i: dict, commodities: CommoditySet,
                              profile: ResourceProfile, V: float,
                              schedule, node: str) -> float:
    k, c = schedule
    if k == 0 or c is None:
        return 0.0
    d = _node_diff(backlog_i, commodities, c) - V * profile.unit_flow_cost
    ratio = commodities[c].proc_ratio_at(node)
    return (profile.capacity[k] / ratio) * max(d, 0.0) - V * profile.alloc_cost[k]


def adcnc_node_decide(backlog_i: dict, commodities: CommoditySet,
                      profile: ResourceProfile, V: float, g: SublinearG,
                      schedule, node: str):
    """Hysteresis rule for one node.  The threshold argument is the raw
    (unscaled) backlog difference of the candidate commodity."""
    w_star, k_star, c_star = processing_max_weight(backlog_i, commodities, profile, V, node)
    if c_star is None:
        return (0, None)
    w_cur = processing_current_weight(backlog_i, commodities, profile, V, schedule, node)
    k_cur = schedule[0]
    d_star = _node_diff(backlog_i, commodities, c_star, weighted=False)
    theta = g(profile.capacity[k_cur] * d_star)
    if w_star - w_cur > theta:
        return (k_star, c_star if k_star > 0 else None)
    return (schedule[0], schedule[1])


def two_stage_node_decide(backlog_i: dict, commodities: CommoditySet,
                          profile: ResourceProfile, V: float, g: SublinearG,
                          schedule, node: str):
    """Two-stage rule: returns (k, c, commodity_only).

    Stage 1 reconfigures allocation and commodity together when the weight
    gain exceeds g(best weight).  Otherwise stage 2 switches only the served
    commodity under the current allocation when the candidate's clipped
    differential beats the current one by more than g(candidate
    differential)."""
    w_star, k_star, c_star = processing_max_weight(backlog_i, commodities, profile, V, node)
    if c_star is None:
        return (0, None, False)
    w_cur = processing_current_weight(backlog_i, commodities, profile, V, schedule, node)
    if w_star - w_cur > g(w_star):
        return (k_star, c_star if k_star > 0 else None, False)
    k_cur, c_cur = schedule
    if k_cur > 0:
        d_star = max(_node_diff(backlog_i, commodities, c_star, weighted=False), 0.0)
        d_cur = 0.0
        if c_cur is not None:
            d_cur = max(_node_diff(backlog_i, commodities, c_cur, weighted=False), 0.0)
        if d_star - d_cur > g(d_star):
            return (k_cur, c_star, True)
    return (k_cur, c_cur, False)


class _KernelPolicy:
    """Shared decide() built on the array kernels, so the public decision
    path and the fast run loop cannot drift apart."""

    name = "policy"
    node_rule = DCNC_RULE
    link_rule = DCNC_RULE

    def __init__(self, V: float = 5.0, g: SublinearG | None = None):
        if V < 0:
            raise ValueError("V must be >= 0")
        self.V = float(V)
        self.g = g if g is not None else SublinearG()
        self._theta_override = None   # test hook: forces the threshold

    @property
    def kernel_rules(self):
        override = self._theta_override
        return (self.node_rule, self.link_rule, self.V,
                self.g.scale, self.g.exponent,
                override is not None, override if override is not None else 0.0)

    def decide(self, state: SimState, net: CloudNetwork,
               commodities: CommoditySet) -> PolicyDecision:
        from .engine import _sched_to_arrays, _state_to_arrays

        na = NetArrays(net, commodities)
        Q, kn, cn, rn, kl, cl, rl, _ = _state_to_arrays(na, state)
        dk_n = np.zeros(na.N, dtype=np.int64)
        dc_n = np.zeros(na.N, dtype=np.int64)
        cf_n = np.zeros(na.N, dtype=np.uint8)
        dk_l = np.zeros(na.E, dtype=np.int64)
        dc_l = np.zeros(na.E, dtype=np.int64)
        _, _, V, g_a, g_b, use_ov, ov = self.kernel_rules
        _decide_nodes(Q, kn, cn, na.node_K, na.node_cap, na.node_w, na.node_e,
                      na.rho, na.succ, na.scale_succ, na.lexp, self.node_rule,
                      V, g_a, g_b, 1 if use_ov else 0, ov, dk_n, dc_n, cf_n)
        _decide_links(Q, kl, cl, na.src, na.dst, na.link_K, na.link_cap,
                      na.link_w, na.link_e, na.lexp, self.link_rule,
                      V, g_a, g_b, 1 if use_ov else 0, ov, dk_l, dc_l)

        def sched(k, c):
            return (int(k), na.comm_ids[c] if k > 0 and c >= 0 else None)

        return PolicyDecision(
            node_targets={n: sched(dk_n[i], dc_n[i]) for i, n in enumerate(na.node_names)},
            link_targets={ln: sched(dk_l[e], dc_l[e]) for e, ln in enumerate(na.link_ids)},
            commodity_only_nodes=frozenset(
                n for i, n in enumerate(na.node_names) if cf_n[i]),
        )


class DCNC(_KernelPolicy):
    """Reconfiguration-agnostic baseline: adopt the maximizer every slot."""

    name = "dcnc"
    node_rule = DCNC_RULE
    link_rule = DCNC_RULE


class ADCNC(_KernelPolicy):
    """Hysteresis policy: reconfigure only on a g-sized weight gain."""

    name = "adcnc"
    node_rule = ADCNC_RULE
    link_rule = ADCNC_RULE


class TwoStageADCNC(_KernelPolicy):
    """Hysteresis with cheap commodity-only switches at the nodes."""

    name = "adcnc2"
    node_rule = TWO_STAGE_RULE
    link_rule = ADCNC_RULE


def dcnc_decide(state, net, commodities, V: float) -> PolicyDecision:
    return DCNC(V).decide(state, net, commodities)


def adcnc_decide(state, net, commodities, V: float, g: SublinearG | None = None) -> PolicyDecision:
    return ADCNC(V, g).decide(state, net, commodities)


def make_policy(name: str, V: float = 5.0, g: SublinearG | None = None):
    table = {"dcnc": DCNC, "adcnc": ADCNC, "adcnc2": TwoStageADCNC}
    if name not in table:
        raise KeyError(f"unknown policy {name!r}; choose from {sorted(table)}")
    return table[name](V, g)


@dataclass
class DriftConstants:
    """Bounds used by the bounded-reconfiguration window check.

    gamma_max bounds the per-slot change of any element's maximal backlog
    differential; M_link / M_node are per-element differential levels above
    which the hysteresis policy reconfigures at most once per (T+1)-slot
    window."""

    V: float
    T: int
    a_max: float
    c_max: float
    v_max: int
    rho_min: float
    xi_max: float
    gamma_max: float
    M_link: dict = field(default_factory=dict)
    M_node: dict = field(default_factory=dict)


def _element_M(profile: ResourceProfile, V: float, g: SublinearG,
               T: int, gamma_max: float) -> float:
    if profile.max_units < 1:
        return math.inf   # element can never allocate, the window bound is vacuous
    ratio = min(profile.alloc_cost[k] / profile.capacity[k]
                for k in range(1, profile.max_units + 1))
    c1 = profile.capacity[1]
    c_top = profile.capacity[profile.max_units]
    m1 = V * (ratio + profile.unit_flow_cost) + T * gamma_max
    m2 = (1.0 / c1) * g.inverse(2.0 * c_top * T * gamma_max) + T * gamma_max
    return max(m1, m2)


def lemma_constants(net: CloudNetwork, commodities: CommoditySet,
                    V: float, g: SublinearG, T: int, a_max: float) -> DriftConstants:
    """Window-bound constants for the given network, load bound and policy
    parameters.  T is the window length in slots (>= 1)."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if a_max < 0:
        raise ValueError("a_max must be >= 0")
    rho_min = 1.0
    for c in commodities.processable():
        for i in net.nodes:
            rho_min = min(rho_min, c.proc_ratio_at(i))
    xi_max = max(1.0, max((c.scale for c in commodities), default=1.0))
    caps = [net.node_profile[i].capacity[net.node_profile[i].max_units] for i in net.nodes]
    caps += [net.link_profile[ln].capacity[net.link_profile[ln].max_units] for ln in net.links]
    c_max = max(caps, default=0.0)
    v_max = 0
    for i in net.nodes:
        v_max = max(v_max, len(net.out_links(i)), len(net.in_links(i)))
    gamma_max = (1.0 / rho_min) * (1.0 + xi_max) * (a_max + c_max * (v_max + 1))
    out = DriftConstants(V=V, T=int(T), a_max=float(a_max), c_max=c_max,
                         v_max=v_max, rho_min=rho_min, xi_max=xi_max,
                         gamma_max=gamma_max)
    for ln in net.links:
        out.M_link[ln] = _element_M(net.link_profile[ln], V, g, T, gamma_max)
    for i in net.nodes:
        out.M_node[i] = _element_M(net.node_profile[i], V, g, T, gamma_max)
    return out


def check_reconfig_windows(result, constants: DriftConstants) -> list:
    """Scan a run collected with collect_lemma=True.

    Returns (element, slot, event count) triples for every slot whose
    backlog differential exceeded the element's M while more than one
    reconfiguration of that element happened within [t, t+T]."""
    if result.link_diff is None:
        raise ValueError("run() must be called with collect_lemma=True")
    T = constants.T
    out = []

    def scan(diffs, events, keys, M_map):
        H = diffs.shape[0]
        for idx, key in enumerate(keys):
            M = M_map[key]
            hot = np.nonzero(diffs[:, idx] > M)[0]
            if hot.size == 0:
                continue
            prefix = np.concatenate([[0], np.cumsum(events[:, idx], dtype=np.int64)])
            hi = np.minimum(hot + T + 1, H)
            counts = prefix[hi] - prefix[hot]
            for t, n in zip(hot[counts > 1], counts[counts > 1]):
                out.append((key, int(t), int(n)))

    scan(result.link_diff, result.link_events, result.link_ids, constants.M_link)
    scan(result.node_diff, result.node_events, result.node_names, constants.M_node)
    return out


def check_differential_changes(result, gamma_max: float) -> list:
    """Per-slot changes of every element's maximal backlog differential must
    stay within gamma_max.  Returns (element, slot, change) violations."""
    if result.link_diff is None:
        raise ValueError("run() must be called with collect_lemma=True")
    out = []
    for diffs, keys in ((result.link_diff, result.link_ids),
                        (result.node_diff, result.node_names)):
        if diffs.shape[0] < 2:
            continue
        delta = np.abs(np.diff(diffs, axis=0))
        bad = np.argwhere(delta > gamma_max + 1e-9)
        for t, idx in bad:
            out.append((keys[int(idx)], int(t), float(delta[t, idx])))
    return out
