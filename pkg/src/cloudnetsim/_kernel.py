"""Array-level simulation core.

Everything here is an internal detail of engine/policies: the network,
commodity wiring and schedules are flattened into plain numpy arrays and the
per-slot logic runs inside numba kernels (one CPU-bound python loop per slot
would dominate multi-hundred-run sweeps otherwise).  The public dict-based
API converts to and from this representation at the boundary, so there is a
single implementation of the slot semantics.

Conventions:
  * commodity / node / link indices follow the declared order; tie-breaking
    in the max-weight scans iterates commodities in lexicographic id order
    (precomputed permutation) and allocation levels ascending, keeping the
    first strict maximum.
  * a schedule is (k, c) with c = -1 when k = 0 (idle has no commodity).
  * countdown arrays hold the value computed in the most recent slot; an
    element serves in the slot its countdown reaches zero.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DCNC_RULE = 0
ADCNC_RULE = 1
TWO_STAGE_RULE = 2

ACTUAL = 0
NOMINAL = 1

NEG = -1.0e300


class NetArrays:
    """Flattened network + commodity wiring shared by policies and engine."""

    def __init__(self, net, commodities):
        nodes = list(net.nodes)
        links = list(net.links)
        comms = list(commodities)
        self.node_names = nodes
        self.link_ids = links
        self.comm_ids = [c.id for c in comms]
        self.node_index = {n: i for i, n in enumerate(nodes)}
        self.link_index = {ln: e for e, ln in enumerate(links)}
        self.comm_index = {c.id: ci for ci, c in enumerate(comms)}

        N, E, C = len(nodes), len(links), len(comms)
        self.N, self.E, self.C = N, E, C

        kmax_n = max((net.node_profile[n].max_units for n in nodes), default=0)
        kmax_l = max((net.link_profile[ln].max_units for ln in links), default=0)

        self.src = np.array([self.node_index[u] for u, v in links], dtype=np.int64)
        self.dst = np.array([self.node_index[v] for u, v in links], dtype=np.int64)

        self.link_K = np.zeros(E, dtype=np.int64)
        self.link_cap = np.zeros((E, kmax_l + 1))
        self.link_w = np.zeros((E, kmax_l + 1))
        self.link_e = np.zeros(E)
        for e, ln in enumerate(links):
            p = net.link_profile[ln]
            self.link_K[e] = p.max_units
            self.link_cap[e, : p.max_units + 1] = p.capacity
            self.link_w[e, : p.max_units + 1] = p.alloc_cost
            self.link_e[e] = p.unit_flow_cost

        self.node_K = np.zeros(N, dtype=np.int64)
        self.node_cap = np.zeros((N, kmax_n + 1))
        self.node_w = np.zeros((N, kmax_n + 1))
        self.node_e = np.zeros(N)
        for i, n in enumerate(nodes):
            p = net.node_profile[n]
            self.node_K[i] = p.max_units
            self.node_cap[i, : p.max_units + 1] = p.capacity
            self.node_w[i, : p.max_units + 1] = p.alloc_cost
            self.node_e[i] = p.unit_flow_cost

        self.succ = np.full(C, -1, dtype=np.int64)
        self.scale_succ = np.zeros(C)
        self.dest = np.zeros(C, dtype=np.int64)
        self.final = np.zeros(C, dtype=np.uint8)
        self.rho = np.ones((N, C))
        for ci, c in enumerate(comms):
            self.dest[ci] = self.node_index[c.destination]
            if c.successor is None:
                self.final[ci] = 1
            else:
                sc = self.comm_index[c.successor]
                self.succ[ci] = sc
                self.scale_succ[ci] = comms[sc].scale
                for i, n in enumerate(nodes):
                    self.rho[i, ci] = c.proc_ratio_at(n)

        self.lexp = np.array(
            sorted(range(C), key=lambda ci: comms[ci].id), dtype=np.int64
        ) if C else np.zeros(0, dtype=np.int64)
        self.link_lex = np.array(
            sorted(range(E), key=lambda e: links[e]), dtype=np.int64
        ) if E else np.zeros(0, dtype=np.int64)

        def rec_arrays(keys, plain_map, comm_map):
            n = len(keys)
            fd = np.zeros(n, dtype=np.int64)
            fc = np.zeros(n)
            cd = np.zeros(n, dtype=np.int64)
            cc = np.zeros(n)
            for a, key in enumerate(keys):
                plain = plain_map[key]
                comm = comm_map.get(key, plain)
                cd[a], cc[a] = comm.delay, comm.cost
                fd[a] = max(plain.delay, comm.delay)
                fc[a] = max(plain.cost, comm.cost)
            return fd, fc, cd, cc

        (self.node_full_delay, self.node_full_cost,
         self.node_comm_delay, self.node_comm_cost) = rec_arrays(
            nodes, net.node_reconfig, net.node_commodity_reconfig)
        (self.link_full_delay, self.link_full_cost,
         self.link_comm_delay, self.link_comm_cost) = rec_arrays(
            links, net.link_reconfig, net.link_commodity_reconfig)


@njit(cache=True)
def _g(x, g_a, g_b):
    if x <= 0.0:
        return 0.0
    return g_a * x ** g_b


@njit(cache=True)
def _decide_links(Q, kl, cl, src, dst, link_K, link_cap, link_w, link_e, lexp,
                  rule, V, g_a, g_b, use_override, override, out_k, out_c):
    E = kl.shape[0]
    C = lexp.shape[0]
    for e in range(E):
        i = src[e]
        j = dst[e]
        best_w = NEG
        best_k = 0
        best_c = -1
        for k in range(link_K[e] + 1):
            cap = link_cap[e, k]
            wk = link_w[e, k]
            for a in range(C):
                c = lexp[a]
                d = Q[i, c] - Q[j, c] - V * link_e[e]
                if d < 0.0:
                    d = 0.0
                w = cap * d - V * wk
                if w > best_w:
                    best_w = w
                    best_k = k
                    best_c = c
        if rule == DCNC_RULE:
            out_k[e] = best_k
            out_c[e] = best_c if best_k > 0 else -1
            continue
        # hysteresis: adopt only if the gain beats g(current capacity * new differential)
        cur_w = 0.0
        if kl[e] > 0 and cl[e] >= 0:
            d = Q[i, cl[e]] - Q[j, cl[e]] - V * link_e[e]
            if d < 0.0:
                d = 0.0
            cur_w = link_cap[e, kl[e]] * d - V * link_w[e, kl[e]]
        gain = best_w - cur_w
        if best_c >= 0:
            theta_arg = link_cap[e, kl[e]] * (Q[i, best_c] - Q[j, best_c])
        else:
            theta_arg = 0.0
        theta = _g(theta_arg, g_a, g_b)
        if use_override:
            theta = override
        if gain > theta:
            out_k[e] = best_k
            out_c[e] = best_c if best_k > 0 else -1
        else:
            out_k[e] = kl[e]
            out_c[e] = cl[e]


@njit(cache=True)
def _decide_nodes(Q, kn, cn, node_K, node_cap, node_w, node_e, rho,
                  succ, scale_succ, lexp, rule, V, g_a, g_b,
                  use_override, override, out_k, out_c, out_cf):
    N = kn.shape[0]
    C = lexp.shape[0]
    for i in range(N):
        best_w = NEG
        best_k = 0
        best_c = -1
        for k in range(node_K[i] + 1):
            cap = node_cap[i, k]
            wk = node_w[i, k]
            for a in range(C):
                c = lexp[a]
                if succ[c] < 0:
                    continue
                d = Q[i, c] - scale_succ[c] * Q[i, succ[c]] - V * node_e[i]
                if d < 0.0:
                    d = 0.0
                w = (cap / rho[i, c]) * d - V * wk
                if w > best_w:
                    best_w = w
                    best_k = k
                    best_c = c
        out_cf[i] = 0
        if best_c < 0:
            # nothing processable here
            out_k[i] = 0
            out_c[i] = -1
            continue
        if rule == DCNC_RULE:
            out_k[i] = best_k
            out_c[i] = best_c if best_k > 0 else -1
            continue
        cur_w = 0.0
        if kn[i] > 0 and cn[i] >= 0:
            c = cn[i]
            d = Q[i, c] - scale_succ[c] * Q[i, succ[c]] - V * node_e[i]
            if d < 0.0:
                d = 0.0
            cur_w = (node_cap[i, kn[i]] / rho[i, c]) * d - V * node_w[i, kn[i]]
        gain = best_w - cur_w
        if rule == ADCNC_RULE:
            theta = _g(node_cap[i, kn[i]] * (Q[i, best_c] - Q[i, succ[best_c]]), g_a, g_b)
            if use_override:
                theta = override
            if gain > theta:
                out_k[i] = best_k
                out_c[i] = best_c if best_k > 0 else -1
            else:
                out_k[i] = kn[i]
                out_c[i] = cn[i]
        else:
            # two-stage rule: full reconfiguration gated by g(best weight),
            # otherwise a commodity-only switch under the current allocation
            # gated by g of the new raw differential.
            if gain > _g(best_w, g_a, g_b):
                out_k[i] = best_k
                out_c[i] = best_c if best_k > 0 else -1
            elif kn[i] > 0:
                d_star = Q[i, best_c] - Q[i, succ[best_c]]
                if d_star < 0.0:
                    d_star = 0.0
                d_cur = 0.0
                if cn[i] >= 0:
                    d_cur = Q[i, cn[i]] - Q[i, succ[cn[i]]]
                    if d_cur < 0.0:
                        d_cur = 0.0
                if d_star - d_cur > _g(d_star, g_a, g_b):
                    out_k[i] = kn[i]
                    out_c[i] = best_c
                    out_cf[i] = 1
                else:
                    out_k[i] = kn[i]
                    out_c[i] = cn[i]
            else:
                out_k[i] = kn[i]
                out_c[i] = cn[i]


@njit(cache=True)
def _step(Q, kn, cn, rn, kl, cl, rl, delivered,
          dk_n, dc_n, cf_n, dk_l, dc_l, cf_l,
          arr, spec_node, spec_comm,
          src, dst, link_cap, link_w, link_e,
          node_cap, node_w, node_e, rho,
          succ, scale_succ, dest, final, link_lex,
          node_full_delay, node_full_cost, node_comm_delay, node_comm_cost,
          link_full_delay, link_full_cost, link_comm_delay, link_comm_cost,
          mode, dep, inflow, deliv_c, flow_n, flow_l, ev_n, ev_l):
    N = kn.shape[0]
    E = kl.shape[0]
    C = delivered.shape[0]

    # 1. reconfiguration triggers, then countdown bookkeeping
    cost_rec = 0.0
    events = 0
    for i in range(N):
        tk = dk_n[i]
        tc = dc_n[i] if tk > 0 else -1
        prev_k = kn[i]
        prev_c = cn[i]
        ev_n[i] = 0
        if tk != prev_k or (tk > 0 and tc != prev_c):
            if cf_n[i] == 1 and tk == prev_k and tk > 0:
                rn[i] = node_comm_delay[i]
                cost_rec += node_comm_cost[i]
            else:
                rn[i] = node_full_delay[i]
                cost_rec += node_full_cost[i]
            kn[i] = tk
            cn[i] = tc
            ev_n[i] = 1
            events += 1
        else:
            rn[i] = rn[i] - 1 if rn[i] > 0 else 0
    for e in range(E):
        tk = dk_l[e]
        tc = dc_l[e] if tk > 0 else -1
        prev_k = kl[e]
        prev_c = cl[e]
        ev_l[e] = 0
        if tk != prev_k or (tk > 0 and tc != prev_c):
            if cf_l[e] == 1 and tk == prev_k and tk > 0:
                rl[e] = link_comm_delay[e]
                cost_rec += link_comm_cost[e]
            else:
                rl[e] = link_full_delay[e]
                cost_rec += link_full_cost[e]
            kl[e] = tk
            cl[e] = tc
            ev_l[e] = 1
            events += 1
        else:
            rl[e] = rl[e] - 1 if rl[e] > 0 else 0

    # 2. service against the slot-start backlog snapshot; processing claims
    # a queue before outgoing links, links in lexicographic id order
    for i in range(N):
        for c in range(C):
            dep[i, c] = 0.0
            inflow[i, c] = 0.0
    for c in range(C):
        deliv_c[c] = 0.0
    cost_flow = 0.0
    cost_alloc = 0.0
    for i in range(N):
        flow_n[i] = 0.0
        if rn[i] == 0 and kn[i] > 0:
            cost_alloc += node_w[i, kn[i]]
            c = cn[i]
            want = node_cap[i, kn[i]] / rho[i, c]
            if mode == NOMINAL:
                got = want
            else:
                avail = Q[i, c] - dep[i, c]
                if avail < 0.0:
                    avail = 0.0
                got = want if want < avail else avail
            dep[i, c] += got
            flow_n[i] = got
            cost_flow += node_e[i] * got
            sc = succ[c]
            produced = scale_succ[c] * got
            if final[sc] == 1 and dest[sc] == i:
                deliv_c[sc] += produced
            else:
                inflow[i, sc] += produced
    for a in range(E):
        e = link_lex[a]
        flow_l[e] = 0.0
        if rl[e] == 0 and kl[e] > 0:
            cost_alloc += link_w[e, kl[e]]
            c = cl[e]
            i = src[e]
            j = dst[e]
            want = link_cap[e, kl[e]]
            if mode == NOMINAL:
                got = want
            else:
                avail = Q[i, c] - dep[i, c]
                if avail < 0.0:
                    avail = 0.0
                got = want if want < avail else avail
            dep[i, c] += got
            flow_l[e] = got
            cost_flow += link_e[e] * got
            if final[c] == 1 and dest[c] == j:
                deliv_c[c] += got
            else:
                inflow[j, c] += got

    # 3. queue update, then arrivals; final-stage packets reaching their
    # destination are absorbed
    for i in range(N):
        for c in range(C):
            q = Q[i, c] - dep[i, c]
            if q < 0.0:
                q = 0.0
            Q[i, c] = q + inflow[i, c]
    for s in range(arr.shape[0]):
        a = float(arr[s])
        if a == 0.0:
            continue
        i = spec_node[s]
        c = spec_comm[s]
        if final[c] == 1 and dest[c] == i:
            deliv_c[c] += a
        else:
            Q[i, c] += a

    deliv_total = 0.0
    for c in range(C):
        delivered[c] += deliv_c[c]
        deliv_total += deliv_c[c]
    reconfiguring = 0
    for i in range(N):
        if rn[i] > 0:
            reconfiguring += 1
    for e in range(E):
        if rl[e] > 0:
            reconfiguring += 1
    return cost_flow, cost_alloc, cost_rec, deliv_total, reconfiguring, events


@njit(cache=True)
def _run(Q, kn, cn, rn, kl, cl, rl, delivered,
         arr_sched, spec_node, spec_comm,
         src, dst, link_K, link_cap, link_w, link_e,
         node_K, node_cap, node_w, node_e, rho,
         succ, scale_succ, dest, final, lexp, link_lex,
         node_full_delay, node_full_cost, node_comm_delay, node_comm_cost,
         link_full_delay, link_full_cost, link_comm_delay, link_comm_cost,
         node_rule, link_rule, V, g_a, g_b, use_override, override, mode,
         collect_lemma,
         out_totq, out_cf, out_ca, out_cr, out_deliv, out_reconfiguring,
         out_events, link_diff, node_diff, ev_n_hist, ev_l_hist):
    H = out_totq.shape[0]
    N = kn.shape[0]
    E = kl.shape[0]
    C = delivered.shape[0]
    dk_n = np.zeros(N, dtype=np.int64)
    dc_n = np.zeros(N, dtype=np.int64)
    cf_n = np.zeros(N, dtype=np.uint8)
    dk_l = np.zeros(E, dtype=np.int64)
    dc_l = np.zeros(E, dtype=np.int64)
    cf_l = np.zeros(E, dtype=np.uint8)
    dep = np.zeros((N, C))
    inflow = np.zeros((N, C))
    deliv_c = np.zeros(C)
    flow_n = np.zeros(N)
    flow_l = np.zeros(E)
    ev_n = np.zeros(N, dtype=np.uint8)
    ev_l = np.zeros(E, dtype=np.uint8)

    for t in range(H):
        tot = 0.0
        for i in range(N):
            for c in range(C):
                tot += Q[i, c]
        out_totq[t] = tot
        if collect_lemma == 1:
            for e in range(E):
                best = NEG
                for c in range(C):
                    d = Q[src[e], c] - Q[dst[e], c]
                    if d > best:
                        best = d
                link_diff[t, e] = best
            for i in range(N):
                best = NEG
                for c in range(C):
                    if succ[c] < 0:
                        continue
                    d = Q[i, c] - scale_succ[c] * Q[i, succ[c]]
                    if d > best:
                        best = d
                node_diff[t, i] = best

        _decide_nodes(Q, kn, cn, node_K, node_cap, node_w, node_e, rho,
                      succ, scale_succ, lexp, node_rule, V, g_a, g_b,
                      use_override, override, dk_n, dc_n, cf_n)
        _decide_links(Q, kl, cl, src, dst, link_K, link_cap, link_w, link_e,
                      lexp, link_rule, V, g_a, g_b, use_override, override,
                      dk_l, dc_l)

        cf, ca, cr, dv, rec, ev = _step(
            Q, kn, cn, rn, kl, cl, rl, delivered,
            dk_n, dc_n, cf_n, dk_l, dc_l, cf_l,
            arr_sched[t], spec_node, spec_comm,
            src, dst, link_cap, link_w, link_e,
            node_cap, node_w, node_e, rho,
            succ, scale_succ, dest, final, link_lex,
            node_full_delay, node_full_cost, node_comm_delay, node_comm_cost,
            link_full_delay, link_full_cost, link_comm_delay, link_comm_cost,
            mode, dep, inflow, deliv_c, flow_n, flow_l, ev_n, ev_l)
        out_cf[t] = cf
        out_ca[t] = ca
        out_cr[t] = cr
        out_deliv[t] = dv
        out_reconfiguring[t] = rec
        out_events[t] = ev
        if collect_lemma == 1:
            for i in range(N):
                ev_n_hist[t, i] = ev_n[i]
            for e in range(E):
                ev_l_hist[t, e] = ev_l[e]
