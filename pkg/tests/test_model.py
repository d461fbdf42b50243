"""Network / service data model and validation."""

import dataclasses

import pytest

from cloudnetsim.model import (
    CloudNetwork, ClientDemand, Function, ReconfigProfile, ResourceProfile,
    ServiceChain, build_commodities, commodity_id, unit_profile,
    validate_network, validate_services,
)
from conftest import make_two_node, zero_profile


def test_unit_profile_is_identity_staircase():
    p = unit_profile(3, 0.5)
    assert p.max_units == 3
    assert p.capacity == (0.0, 1.0, 2.0, 3.0)
    assert p.alloc_cost == (0.0, 1.0, 2.0, 3.0)
    assert p.unit_flow_cost == 0.5


def test_profiles_are_frozen():
    p = unit_profile(1)
    with pytest.raises(dataclasses.FrozenInstanceError):
        p.max_units = 2


def test_build_commodities_line():
    svc = ServiceChain(
        id="s",
        functions=(Function(scale=2.0, proc_ratio=0.5), Function()),
        clients=(ClientDemand("a", "b", "poisson", 0.2),
                 ClientDemand("b", "a", "poisson", 0.1)),
    )
    coms = build_commodities([svc])
    # 2 clients x 3 stages
    assert len(coms) == 6
    c0 = coms[commodity_id("s", 0, 0)]
    c1 = coms[commodity_id("s", 0, 1)]
    c2 = coms[commodity_id("s", 0, 2)]
    assert (c0.predecessor, c0.successor) == (None, c1.id)
    assert (c2.predecessor, c2.successor) == (c1.id, None)
    assert c0.scale == 1.0          # raw input is unscaled
    assert c1.scale == 2.0          # output multiplier of function 0
    assert c0.proc_ratio == 0.5     # consumed by function 0
    assert c2.proc_ratio is None
    assert (c0.source, c0.destination) == ("a", "b")
    assert {c.id for c in coms.finals()} == {"s:0:2", "s:1:2"}
    assert len(coms.processable()) == 4


def test_proc_ratio_at_node_map():
    svc = ServiceChain(
        id="s",
        functions=(Function(proc_ratio={"a": 0.5, "b": 2.0}),),
        clients=(ClientDemand("a", "b", "poisson", 0.2),),
    )
    coms = build_commodities([svc])
    c0 = coms["s:0:0"]
    assert c0.proc_ratio_at("a") == 0.5
    assert c0.proc_ratio_at("b") == 2.0
    final = coms["s:0:1"]
    with pytest.raises(ValueError, match="final-stage"):
        final.proc_ratio_at("a")


def test_build_commodities_rejects_duplicates_and_empty():
    svc = ServiceChain("s", (Function(),), (ClientDemand("a", "b"),))
    with pytest.raises(ValueError):
        build_commodities([svc, svc])
    empty = ServiceChain("t", (), (ClientDemand("a", "b"),))
    with pytest.raises(ValueError):
        build_commodities([empty])


def test_commodity_set_lookup(two_node_coms):
    _, _, coms = two_node_coms
    assert "svc:0:0" in coms
    assert coms.ids() == ["svc:0:0", "svc:0:1"]
    with pytest.raises(KeyError):
        coms["nope"]


def test_validate_network_clean(two_node):
    net, _ = two_node
    assert validate_network(net) == []


def test_validate_network_flags_bad_shapes():
    rec = ReconfigProfile()
    net = CloudNetwork(
        nodes=("a", "b"),
        links=(("a", "a"), ("a", "c")),
        node_profile={"a": ResourceProfile(2, (0.0, 1.0, 1.0), (0.0, 1.0, 2.0))},
        link_profile={},
        node_reconfig={"a": rec},
        link_reconfig={},
    )
    msgs = validate_network(net)
    assert any("self-loop" in m for m in msgs)
    assert any("endpoint not declared" in m for m in msgs)
    assert any("not strictly increasing" in m for m in msgs)
    assert any("missing resource profile" in m for m in msgs)


def test_validate_network_checks_reconfig():
    net, _ = make_two_node()
    bad = CloudNetwork(
        nodes=net.nodes, links=net.links,
        node_profile=net.node_profile, link_profile=net.link_profile,
        node_reconfig={"a": ReconfigProfile(-1, 0.0), "b": ReconfigProfile()},
        link_reconfig={("a", "b"): ReconfigProfile(0, -2.0)},
    )
    msgs = validate_network(bad)
    assert len(msgs) >= 2


def test_commodity_reconfig_defaults_to_full_profile():
    net, _ = make_two_node(delta=3, eta=1.5)
    assert net.node_commodity_reconfig["a"] == ReconfigProfile(3, 1.5)
    assert net.link_commodity_reconfig[("a", "b")] == ReconfigProfile(3, 1.5)
    # explicit map survives
    net2 = CloudNetwork(
        nodes=net.nodes, links=net.links,
        node_profile=net.node_profile, link_profile=net.link_profile,
        node_reconfig=net.node_reconfig, link_reconfig=net.link_reconfig,
        node_commodity_reconfig={"a": ReconfigProfile(1, 0.0),
                                 "b": ReconfigProfile(1, 0.0)},
    )
    assert net2.node_commodity_reconfig["a"].delay == 1
    assert net2.link_commodity_reconfig[("a", "b")].delay == 3


def test_validate_services_messages(two_node):
    net, _ = two_node
    bad = [
        ServiceChain("x", (Function(scale=0.0),), (ClientDemand("a", "b"),)),
        ServiceChain("y", (Function(),), (ClientDemand("zz", "b"),)),
        ServiceChain("z", (Function(),), (ClientDemand("a", "b", "weird", 1.0),)),
        ServiceChain("w", (Function(),), (ClientDemand("a", "b", "poisson", -1.0),)),
    ]
    msgs = validate_services(net, bad)
    assert any("scale" in m for m in msgs)
    assert any("unknown" in m and "zz" in m for m in msgs)
    assert any("weird" in m for m in msgs)
    assert any(("rate" in m) and ("w" in m) for m in msgs)
    assert validate_services(net, []) == []


def test_zero_profile_has_no_capacity():
    p = zero_profile()
    assert p.max_units == 0
    assert p.capacity == (0.0,)
