"""Shared fixture networks.

two_node: a -> b with one processing stage at a; small enough to verify
slot arithmetic by hand.  line4: a 4-node path with a two-function chain
and nonzero unit flow cost, used for cost oracles.
"""

import pytest

from cloudnetsim.model import (
    CloudNetwork, ClientDemand, Function, ReconfigProfile, ResourceProfile,
    ServiceChain, build_commodities, unit_profile, validate_network,
    validate_services,
)


def zero_profile():
    return ResourceProfile(0, (0.0,), (0.0,))


def make_two_node(rate=0.5, kind="poisson", delta=0, eta=0.0,
                  node_e=0.0, link_e=0.0, max_units=1, scale=1.0,
                  proc_ratio=1.0, cap=None):
    """a -> b, single-function chain processed at a, delivered at b."""
    rec = ReconfigProfile(delta, eta)
    net = CloudNetwork(
        nodes=("a", "b"),
        links=(("a", "b"),),
        node_profile={"a": unit_profile(max_units, node_e), "b": zero_profile()},
        link_profile={("a", "b"): unit_profile(max_units, link_e)},
        node_reconfig={"a": rec, "b": rec},
        link_reconfig={("a", "b"): rec},
    )
    svc = ServiceChain(
        id="svc",
        functions=(Function(scale=scale, proc_ratio=proc_ratio),),
        clients=(ClientDemand("a", "b", kind, rate, cap),),
    )
    assert validate_network(net) == []
    assert validate_services(net, [svc]) == []
    return net, [svc]


def make_line4(rate=0.3, flow_cost=0.1, delta=0, eta=0.0):
    """n0 -> n1 -> n2 -> n3 path, two-function chain, e > 0 everywhere."""
    nodes = ("n0", "n1", "n2", "n3")
    links = (("n0", "n1"), ("n1", "n2"), ("n2", "n3"))
    rec = ReconfigProfile(delta, eta)
    net = CloudNetwork(
        nodes=nodes,
        links=links,
        node_profile={n: unit_profile(1, flow_cost) for n in nodes},
        link_profile={l: unit_profile(1, flow_cost) for l in links},
        node_reconfig={n: rec for n in nodes},
        link_reconfig={l: rec for l in links},
    )
    svc = ServiceChain(
        id="chain",
        functions=(Function(), Function()),
        clients=(ClientDemand("n0", "n3", "poisson", rate),),
    )
    assert validate_network(net) == []
    assert validate_services(net, [svc]) == []
    return net, [svc]


@pytest.fixture
def two_node():
    return make_two_node()


@pytest.fixture
def two_node_coms(two_node):
    net, services = two_node
    return net, services, build_commodities(services)


@pytest.fixture
def line4():
    return make_line4()
