"""Long-run feasibility LP: hand oracles, structure, reconfig independence."""

import math

import numpy as np
import pytest

from cloudnetsim.arrivals import specs_for_services
from cloudnetsim.capacity import (
    build_program, is_feasible, max_throughput_scale, min_cost,
    rates_from_specs,
)
from cloudnetsim.model import (
    CloudNetwork, ReconfigProfile, build_commodities,
)
from cloudnetsim.scenarios import abilene_scenario
from conftest import make_line4, make_two_node


def rates_for(services):
    return rates_from_specs(specs_for_services(services))


def test_rates_from_specs_accumulates():
    from cloudnetsim.arrivals import ArrivalSpec
    specs = [ArrivalSpec("a", "svc:0:0", "poisson", 0.5),
             ArrivalSpec("a", "svc:0:0", "deterministic", 0.25)]
    assert rates_from_specs(specs) == {("a", "svc:0:0"): 0.75}


def test_two_node_min_cost_hand_value():
    # lambda = 0.5 with unit staircases: half a processing share at `a` plus
    # half a link share, each at unit cost
    net, services = make_two_node(rate=0.5)
    coms = build_commodities(services)
    cost, alloc = min_cost(net, coms, rates_for(services))
    assert cost == pytest.approx(1.0, abs=1e-7)
    assert alloc["node_share"][("a", 1, "svc:0:0")] == pytest.approx(0.5, abs=1e-7)
    assert alloc["link_share"][(("a", "b"), 1, "svc:0:1")] == pytest.approx(0.5, abs=1e-7)
    assert alloc["node_flow"][("a", "svc:0:0")] == pytest.approx(0.5, abs=1e-7)
    assert alloc["link_flow"][(("a", "b"), "svc:0:1")] == pytest.approx(0.5, abs=1e-7)


def test_two_node_min_cost_brute_force_share_grid():
    # exhaustive time-share search on the same 2-element network
    net, services = make_two_node(rate=0.5)
    coms = build_commodities(services)
    lp_cost, _ = min_cost(net, coms, rates_for(services))
    best = math.inf
    for a_share in np.linspace(0, 1, 401):
        for l_share in np.linspace(0, 1, 401):
            if a_share * 1.0 >= 0.5 and l_share * 1.0 >= 0.5:
                best = min(best, a_share * 1.0 + l_share * 1.0)
    assert lp_cost == pytest.approx(best, abs=5e-3)


def test_two_node_capacity_boundary():
    # one processing unit of capacity 1 saturates at rate 1
    net, services = make_two_node(rate=0.5)
    coms = build_commodities(services)
    rates = rates_for(services)
    assert is_feasible(net, coms, rates, scale=2.0)
    assert not is_feasible(net, coms, rates, scale=2.2)
    t_star = max_throughput_scale(net, coms, rates)
    assert t_star == pytest.approx(2.0, abs=2e-3)


def test_line4_min_cost_hand_value():
    # 3 hops + 2 processing stages, every unit moved costs 1 + e = 1.1
    # per share unit at rate 0.3: 5 * 0.3 * 1.1 = 1.65
    net, services = make_line4(rate=0.3, flow_cost=0.1)
    coms = build_commodities(services)
    cost, _ = min_cost(net, coms, rates_for(services))
    assert cost == pytest.approx(1.65, abs=1e-7)


def test_min_cost_scales_linearly_until_saturation():
    net, services = make_line4(rate=0.3, flow_cost=0.1)
    coms = build_commodities(services)
    rates = rates_for(services)
    c1, _ = min_cost(net, coms, rates, scale=1.0)
    c2, _ = min_cost(net, coms, rates, scale=2.0)
    assert c2 == pytest.approx(2 * c1, abs=1e-6)


def test_infeasible_min_cost_raises():
    net, services = make_two_node(rate=0.5)
    coms = build_commodities(services)
    with pytest.raises(ValueError, match="not supportable"):
        min_cost(net, coms, rates_for(services), scale=3.0)


def test_unknown_rate_key_rejected():
    net, services = make_two_node()
    coms = build_commodities(services)
    with pytest.raises(KeyError):
        build_program(net, coms, {("a", "mystery"): 0.2})


def test_zero_rates_have_unbounded_scale():
    net, services = make_two_node(rate=0.5)
    coms = build_commodities(services)
    assert max_throughput_scale(net, coms, {}) == math.inf
    assert max_throughput_scale(net, coms, {("a", "svc:0:0"): 0.0}) == math.inf


def test_program_shape_two_node():
    net, services = make_two_node(rate=0.5)
    coms = build_commodities(services)
    prog = build_program(net, coms, rates_for(services))
    # shares are per (element, k, commodity): 1 processing pair, 2 link pairs
    assert len(prog.link_flow_index) == 2
    assert len(prog.node_flow_index) == 4
    assert len(prog.node_alloc_index) == 1
    assert len(prog.link_alloc_index) == 2
    assert prog.n_vars == 9
    assert "9 variables" in prog.describe()
    # final-stage node flows are pinned to zero
    for (node, cid), j in prog.node_flow_index.items():
        if cid == "svc:0:1":
            assert prog.bounds[j] == (0.0, 0.0)


def test_feasibility_ignores_reconfiguration_profiles():
    class Poisoned(dict):
        def __getitem__(self, key):
            raise AssertionError("capacity math read a reconfiguration profile")

        def get(self, key, default=None):
            raise AssertionError("capacity math read a reconfiguration profile")

    net, services = make_two_node(rate=0.5, delta=7, eta=3.0)
    coms = build_commodities(services)
    poisoned = CloudNetwork(
        nodes=net.nodes, links=net.links,
        node_profile=net.node_profile, link_profile=net.link_profile,
        node_reconfig=Poisoned(), link_reconfig=Poisoned(),
        node_commodity_reconfig=Poisoned(), link_commodity_reconfig=Poisoned(),
    )
    rates = rates_for(services)
    cost, _ = min_cost(poisoned, coms, rates)
    assert cost == pytest.approx(1.0, abs=1e-7)
    assert max_throughput_scale(poisoned, coms, rates) == pytest.approx(2.0, abs=2e-3)


def test_solution_satisfies_program_rows():
    net, services = make_line4(rate=0.3, flow_cost=0.1)
    coms = build_commodities(services)
    prog = build_program(net, coms, rates_for(services))
    from scipy.optimize import linprog
    res = linprog(prog.objective, A_ub=prog.A_ub, b_ub=prog.b_ub,
                  bounds=prog.bounds, method="highs")
    assert res.status == 0
    assert np.all(prog.A_ub @ res.x <= prog.b_ub + 1e-6)


# -- reference backbone ------------------------------------------------------

@pytest.fixture(scope="module")
def backbone():
    sc = abilene_scenario()
    return sc.net, build_commodities(sc.services), rates_from_specs(
        specs_for_services(sc.services))


def test_backbone_program_shape(backbone):
    net, coms, rates = backbone
    prog = build_program(net, coms, rates)
    assert len(prog.link_flow_index) == 168   # 28 arcs x 6 commodities
    assert len(prog.node_flow_index) == 66    # 11 nodes x 6 commodities
    assert len(prog.node_alloc_index) == 44   # 11 nodes x 4 processable
    assert len(prog.link_alloc_index) == 168
    assert prog.n_vars == 446
    assert prog.A_ub.shape[0] == 315


def test_backbone_min_cost_low_load(backbone):
    net, coms, rates = backbone
    cost, _ = min_cost(net, coms, rates)
    assert cost == pytest.approx(2.4, abs=1e-6)


def test_backbone_min_cost_full_load(backbone):
    net, coms, _ = backbone
    sc = abilene_scenario(lambda1=1.0, lambda2=1.0)
    rates = rates_from_specs(specs_for_services(sc.services))
    cost, alloc = min_cost(net, coms, rates)
    assert cost == pytest.approx(12.0, abs=1e-6)
    # every share stays inside its unit budget
    share_total = {}
    for key, v in {**alloc["node_share"], **alloc["link_share"]}.items():
        share_total[key[0]] = share_total.get(key[0], 0.0) + v
    assert all(v <= 1 + 1e-7 for v in share_total.values())


def test_backbone_saturation_boundary(backbone):
    net, coms, _ = backbone
    sc = abilene_scenario(lambda1=1.0, lambda2=1.0)
    rates = rates_from_specs(specs_for_services(sc.services))
    assert is_feasible(net, coms, rates)
    bigger = {k: 1.05 * v for k, v in rates.items()}
    assert not is_feasible(net, coms, bigger)
    assert max_throughput_scale(net, coms, rates) == pytest.approx(1.0, abs=2e-3)


def test_backbone_scale_monotone(backbone):
    net, coms, rates = backbone
    costs = [min_cost(net, coms, rates, scale=s)[0] for s in (1.0, 2.0, 4.0)]
    assert costs[0] < costs[1] < costs[2]
