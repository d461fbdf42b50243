"""Scenario definitions: a network plus the service chains that run on it.

Scenarios are YAML documents with sections nodes, links, node_profile,
link_profile, reconfig, services and arrivals (see data/abilene.yaml for a
commented example).  The built-in registry currently contains the 11-node
US continental backbone used throughout the bundled experiments.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .model import (
    ClientDemand,
    CloudNetwork,
    Function,
    ReconfigProfile,
    ResourceProfile,
    ServiceChain,
    build_commodities,
    unit_profile,
    validate_network,
    validate_services,
)

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


@dataclass
class PolicyConfig:
    """Default control parameters a scenario ships with."""

    V: float = 5.0
    g_scale: float = 0.99
    g_exponent: float = 0.99


@dataclass
class Scenario:
    name: str
    net: CloudNetwork
    services: tuple[ServiceChain, ...]
    policy: PolicyConfig = field(default_factory=PolicyConfig)

    def commodities(self):
        return build_commodities(self.services)

    def validate(self) -> list[str]:
        return validate_network(self.net) + validate_services(self.net, self.services)


# The 11-node US research backbone.  Undirected edges; expanded to directed
# link pairs below.  With unit capacities the directed cut
# {kansas_city->indianapolis, houston->atlanta} bounds the total west-to-east
# demand by 2, which the two bundled service chains can saturate exactly.
ABILENE_NODES = (
    "seattle", "sunnyvale", "los_angeles", "denver", "kansas_city", "houston",
    "chicago", "indianapolis", "atlanta", "washington", "new_york",
)

ABILENE_EDGES = (
    ("seattle", "sunnyvale"),
    ("seattle", "denver"),
    ("sunnyvale", "denver"),
    ("sunnyvale", "los_angeles"),
    ("los_angeles", "houston"),
    ("denver", "kansas_city"),
    ("kansas_city", "houston"),
    ("kansas_city", "indianapolis"),
    ("houston", "atlanta"),
    ("indianapolis", "chicago"),
    ("indianapolis", "atlanta"),
    ("chicago", "new_york"),
    ("atlanta", "washington"),
    ("washington", "new_york"),
)


def abilene_scenario(lambda1: float = 0.2, lambda2: float = 0.2,
                     delta_r: int = 0, eta_r: float = 0.0) -> Scenario:
    """Two 2-function chains over the backbone, unit profiles everywhere.

    Service 1 carries seattle -> new_york traffic at Poisson rate lambda1,
    service 2 sunnyvale -> atlanta at lambda2.  All nodes host processing
    with K = 1, C(k) = w(k) = k and zero flow cost; reconfiguration overhead
    is uniform (delta_r, eta_r).
    """
    links = tuple((u, v) for u, v in ABILENE_EDGES) + tuple((v, u) for u, v in ABILENE_EDGES)
    prof = unit_profile(1)
    rec = ReconfigProfile(int(delta_r), float(eta_r))
    net = CloudNetwork(
        nodes=ABILENE_NODES,
        links=links,
        node_profile={i: prof for i in ABILENE_NODES},
        link_profile={ln: prof for ln in links},
        node_reconfig={i: rec for i in ABILENE_NODES},
        link_reconfig={ln: rec for ln in links},
    )
    fns = (Function(scale=1.0, proc_ratio=1.0), Function(scale=1.0, proc_ratio=1.0))
    services = (
        ServiceChain("svc1", fns, (ClientDemand("seattle", "new_york", "poisson", float(lambda1)),)),
        ServiceChain("svc2", fns, (ClientDemand("sunnyvale", "atlanta", "poisson", float(lambda2)),)),
    )
    return Scenario("abilene", net, services)


BUILTIN_SCENARIOS = {
    "abilene": abilene_scenario,
}


def _parse_profile(d: dict) -> ResourceProfile:
    return ResourceProfile(
        max_units=int(d["max_units"]),
        capacity=tuple(d["capacity"]),
        alloc_cost=tuple(d["alloc_cost"]),
        unit_flow_cost=float(d.get("unit_flow_cost", 0.0)),
    )


def _parse_reconfig(d: dict | None) -> ReconfigProfile:
    if d is None:
        return ReconfigProfile()
    return ReconfigProfile(delay=int(d.get("delay", 0)), cost=float(d.get("cost", 0.0)))


def scenario_from_dict(doc: dict, name: str = "") -> Scenario:
    nodes = tuple(str(n) for n in doc["nodes"])
    links_sec = doc["links"]
    if isinstance(links_sec, dict):
        pairs = [tuple(p) for p in links_sec["pairs"]]
        if links_sec.get("bidirectional", False):
            pairs = pairs + [(v, u) for u, v in pairs]
    else:
        pairs = [tuple(p) for p in links_sec]
    links = tuple((str(u), str(v)) for u, v in pairs)

    node_prof = _parse_profile(doc["node_profile"])
    link_prof = _parse_profile(doc["link_profile"])
    rec = doc.get("reconfig", {}) or {}
    node_rec = _parse_reconfig(rec.get("node"))
    link_rec = _parse_reconfig(rec.get("link"))
    node_crec = _parse_reconfig(rec.get("node_commodity")) if "node_commodity" in rec else node_rec
    link_crec = _parse_reconfig(rec.get("link_commodity")) if "link_commodity" in rec else link_rec

    net = CloudNetwork(
        nodes=nodes,
        links=links,
        node_profile={i: node_prof for i in nodes},
        link_profile={ln: link_prof for ln in links},
        node_reconfig={i: node_rec for i in nodes},
        link_reconfig={ln: link_rec for ln in links},
        node_commodity_reconfig={i: node_crec for i in nodes},
        link_commodity_reconfig={ln: link_crec for ln in links},
    )

    arrivals = doc.get("arrivals", {}) or {}
    services = []
    for svc in doc["services"]:
        fns = tuple(
            Function(scale=float(f.get("scale", 1.0)), proc_ratio=f.get("proc_ratio", 1.0))
            for f in svc["functions"]
        )
        clients = []
        for cl in svc["clients"]:
            arr = arrivals.get(cl.get("arrival"), {}) if cl.get("arrival") else {}
            clients.append(ClientDemand(
                source=str(cl["source"]),
                destination=str(cl["destination"]),
                kind=str(arr.get("kind", cl.get("kind", "poisson"))),
                rate=float(arr.get("rate", cl.get("rate", 0.0))),
                cap=arr.get("cap", cl.get("cap")),
            ))
        services.append(ServiceChain(str(svc["id"]), fns, tuple(clients)))

    pol = doc.get("policy", {}) or {}
    policy = PolicyConfig(
        V=float(pol.get("V", 5.0)),
        g_scale=float(pol.get("g_scale", 0.99)),
        g_exponent=float(pol.get("g_exponent", 0.99)),
    )
    return Scenario(str(doc.get("name", name or "scenario")), net, tuple(services), policy)


def load_scenario_file(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"scenario file {path} does not contain a mapping")
    sc = scenario_from_dict(doc, name=os.path.splitext(os.path.basename(path))[0])
    problems = sc.validate()
    if problems:
        raise ValueError(f"invalid scenario {path}: " + "; ".join(problems))
    return sc


def load_scenario(name_or_path: str) -> Scenario:
    """Resolve a built-in scenario name or a path to a scenario file."""
    if name_or_path in BUILTIN_SCENARIOS:
        return BUILTIN_SCENARIOS[name_or_path]()
    if os.path.exists(name_or_path):
        return load_scenario_file(name_or_path)
    raise KeyError(
        f"unknown scenario {name_or_path!r}; built-ins: {sorted(BUILTIN_SCENARIOS)}"
    )
