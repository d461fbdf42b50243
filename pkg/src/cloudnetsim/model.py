"""Network, resource and service-chain model.

A cloud network is a directed graph whose nodes can host processing
resources and whose links carry transmission flow.  Every element (node or
link) owns a resource profile: k = 0..K allocation levels with capacities
C(k) and allocation costs w(k), both zero at k = 0 and strictly increasing,
plus a per-flow-unit cost e.  Changing an element's schedule (allocation
level or served commodity) is a reconfiguration governed by a delay/cost
profile.

Traffic is organized in service chains: each chain applies M functions in
order, so a packet admitted for client (source, destination) moves through
stages 0..M.  Stage m packets form one commodity; function m+1 consumes
commodity m and produces commodity m+1, scaled by the function's scale
factor and costing proc_ratio processing-flow units per packet.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ResourceProfile:
    """Allocation levels of one element: capacity/cost tables indexed by k."""

    max_units: int
    capacity: tuple[float, ...]       # C(0..K), C(0) = 0, strictly increasing
    alloc_cost: tuple[float, ...]     # w(0..K), w(0) = 0, strictly increasing
    unit_flow_cost: float = 0.0       # e, charged per flow unit moved

    def __post_init__(self):
        object.__setattr__(self, "capacity", tuple(float(x) for x in self.capacity))
        object.__setattr__(self, "alloc_cost", tuple(float(x) for x in self.alloc_cost))


def unit_profile(max_units: int = 1, unit_flow_cost: float = 0.0) -> ResourceProfile:
    """C(k) = w(k) = k profile, the homogeneous unit-capacity case."""
    ks = tuple(float(k) for k in range(max_units + 1))
    return ResourceProfile(max_units, ks, ks, unit_flow_cost)


@dataclass(frozen=True)
class ReconfigProfile:
    """Reconfiguration overhead: delay slots and a one-off cost per event."""

    delay: int = 0
    cost: float = 0.0


@dataclass(frozen=True)
class Function:
    """One stage of a service chain."""

    scale: float = 1.0        # output packets per input packet
    proc_ratio: float = 1.0   # processing-flow units per input packet (may be a map node -> ratio)


@dataclass(frozen=True)
class ClientDemand:
    """A (source, destination) pair of one service plus its arrival process."""

    source: str
    destination: str
    kind: str = "poisson"     # poisson | deterministic | zero
    rate: float = 0.0
    cap: int | None = None


@dataclass(frozen=True)
class ServiceChain:
    id: str
    functions: tuple[Function, ...]
    clients: tuple[ClientDemand, ...]


@dataclass
class CloudNetwork:
    """Directed graph plus per-element profiles.

    Bidirectional physical links are represented as two directed links.
    commodity_reconfig maps hold the overhead of commodity-only schedule
    changes; by default they equal the plain (resource) profiles.
    """

    nodes: tuple[str, ...]
    links: tuple[tuple[str, str], ...]
    node_profile: dict[str, ResourceProfile]
    link_profile: dict[tuple[str, str], ResourceProfile]
    node_reconfig: dict[str, ReconfigProfile]
    link_reconfig: dict[tuple[str, str], ReconfigProfile]
    node_commodity_reconfig: dict[str, ReconfigProfile] = field(default_factory=dict)
    link_commodity_reconfig: dict[tuple[str, str], ReconfigProfile] = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = tuple(self.nodes)
        self.links = tuple((u, v) for u, v in self.links)
        if not self.node_commodity_reconfig:
            self.node_commodity_reconfig = dict(self.node_reconfig)
        if not self.link_commodity_reconfig:
            self.link_commodity_reconfig = dict(self.link_reconfig)

    def out_links(self, i: str) -> list[tuple[str, str]]:
        return [ln for ln in self.links if ln[0] == i]

    def in_links(self, i: str) -> list[tuple[str, str]]:
        return [ln for ln in self.links if ln[1] == i]

    def out_neighbors(self, i: str) -> list[str]:
        return [v for u, v in self.links if u == i]

    def in_neighbors(self, i: str) -> list[str]:
        return [u for u, v in self.links if v == i]


@dataclass(frozen=True)
class Commodity:
    """Packets of one service/client at one processing stage.

    scale is the output multiplier of the function that produced this
    commodity (1.0 at stage 0).  proc_ratio belongs to the function that
    will consume it (None at the final stage); it may be a single float or
    a map node -> float.
    """

    id: str
    service: str
    client: int
    stage: int
    source: str
    destination: str
    predecessor: str | None
    successor: str | None
    scale: float = 1.0
    proc_ratio: object = None

    def proc_ratio_at(self, node: str) -> float:
        if self.proc_ratio is None:
            raise ValueError(f"commodity {self.id} is final-stage, it cannot be processed")
        if isinstance(self.proc_ratio, dict):
            return float(self.proc_ratio[node])
        return float(self.proc_ratio)


class CommoditySet:
    """Order-stable collection of commodities with id lookup."""

    def __init__(self, commodities):
        self.commodities = tuple(commodities)
        self.by_id = {c.id: c for c in self.commodities}
        if len(self.by_id) != len(self.commodities):
            raise ValueError("duplicate commodity ids")

    def __iter__(self):
        return iter(self.commodities)

    def __len__(self):
        return len(self.commodities)

    def __getitem__(self, cid: str) -> Commodity:
        return self.by_id[cid]

    def __contains__(self, cid: str) -> bool:
        return cid in self.by_id

    def ids(self) -> list[str]:
        return [c.id for c in self.commodities]

    def processable(self) -> list[Commodity]:
        return [c for c in self.commodities if c.successor is not None]

    def finals(self) -> list[Commodity]:
        return [c for c in self.commodities if c.successor is None]


def commodity_id(service: str, client: int, stage: int) -> str:
    return f"{service}:{client}:{stage}"


def build_commodities(services) -> CommoditySet:
    """Expand service chains into per-stage commodities.

    A chain with M functions and one client yields M+1 commodities wired in
    a predecessor/successor line; stage 0 is the raw input, stage M the
    deliverable output.  Ids are stable "(service):(client):(stage)" strings.
    """
    seen = set()
    out = []
    for svc in services:
        if svc.id in seen:
            raise ValueError(f"duplicate service id {svc.id!r}")
        seen.add(svc.id)
        if len(svc.functions) == 0:
            raise ValueError(f"service {svc.id!r} has no functions")
        m_max = len(svc.functions)
        for ci, client in enumerate(svc.clients):
            for stage in range(m_max + 1):
                pred = commodity_id(svc.id, ci, stage - 1) if stage > 0 else None
                succ = commodity_id(svc.id, ci, stage + 1) if stage < m_max else None
                scale = svc.functions[stage - 1].scale if stage > 0 else 1.0
                ratio = svc.functions[stage].proc_ratio if stage < m_max else None
                out.append(Commodity(
                    id=commodity_id(svc.id, ci, stage),
                    service=svc.id,
                    client=ci,
                    stage=stage,
                    source=client.source,
                    destination=client.destination,
                    predecessor=pred,
                    successor=succ,
                    scale=float(scale),
                    proc_ratio=ratio,
                ))
    return CommoditySet(out)


def _check_profile(where: str, prof: ResourceProfile, out: list):
    k = prof.max_units
    if k < 0:
        out.append(f"{where}: max_units must be >= 0")
        return
    for name, table in (("capacity", prof.capacity), ("alloc_cost", prof.alloc_cost)):
        if len(table) != k + 1:
            out.append(f"{where}: {name} table must have K+1 = {k + 1} entries")
            continue
        if table[0] != 0.0:
            out.append(f"{where}: {name} must be 0 at k=0")
        for j in range(1, len(table)):
            if not table[j] > table[j - 1]:
                out.append(f"{where}: {name} not strictly increasing at k={j}")


def _check_reconfig(where: str, rec: ReconfigProfile, out: list):
    if rec.delay < 0 or int(rec.delay) != rec.delay:
        out.append(f"{where}: reconfiguration delay must be a non-negative integer")
    if rec.cost < 0:
        out.append(f"{where}: reconfiguration cost must be non-negative")


def validate_network(net: CloudNetwork) -> list[str]:
    """Return a list of invariant violations; empty means the network is valid."""
    out = []
    nodes = set(net.nodes)
    if len(nodes) != len(net.nodes):
        out.append("duplicate node names")
    seen_links = set()
    for u, v in net.links:
        if u == v:
            out.append(f"link ({u}, {v}): self-loop")
        if u not in nodes or v not in nodes:
            out.append(f"link ({u}, {v}): endpoint not declared as a node")
        if (u, v) in seen_links:
            out.append(f"link ({u}, {v}): duplicate link")
        seen_links.add((u, v))
    for i in net.nodes:
        if i not in net.node_profile:
            out.append(f"node {i}: missing resource profile")
        else:
            _check_profile(f"node {i}", net.node_profile[i], out)
        if i not in net.node_reconfig:
            out.append(f"node {i}: missing reconfiguration profile")
        else:
            _check_reconfig(f"node {i}", net.node_reconfig[i], out)
        if i in net.node_commodity_reconfig:
            _check_reconfig(f"node {i} (commodity switch)", net.node_commodity_reconfig[i], out)
    for ln in net.links:
        if ln not in net.link_profile:
            out.append(f"link {ln}: missing resource profile")
        else:
            _check_profile(f"link {ln}", net.link_profile[ln], out)
        if ln not in net.link_reconfig:
            out.append(f"link {ln}: missing reconfiguration profile")
        else:
            _check_reconfig(f"link {ln}", net.link_reconfig[ln], out)
        if ln in net.link_commodity_reconfig:
            _check_reconfig(f"link {ln} (commodity switch)", net.link_commodity_reconfig[ln], out)
    return out


def validate_services(net: CloudNetwork, services) -> list[str]:
    """Check service chains against the network they will run on."""
    out = []
    nodes = set(net.nodes)
    for svc in services:
        if len(svc.functions) == 0:
            out.append(f"service {svc.id}: no functions")
        for fn in svc.functions:
            if fn.scale <= 0:
                out.append(f"service {svc.id}: function scale must be > 0")
            ratios = fn.proc_ratio.values() if isinstance(fn.proc_ratio, dict) else [fn.proc_ratio]
            if any(r <= 0 for r in ratios):
                out.append(f"service {svc.id}: proc_ratio must be > 0")
        for cl in svc.clients:
            if cl.source not in nodes:
                out.append(f"service {svc.id}: unknown source {cl.source}")
            if cl.destination not in nodes:
                out.append(f"service {svc.id}: unknown destination {cl.destination}")
            if cl.kind not in ("poisson", "deterministic", "zero"):
                out.append(f"service {svc.id}: unknown arrival kind {cl.kind!r}")
            if cl.rate < 0:
                out.append(f"service {svc.id}: arrival rate must be >= 0")
    return out
