"""Smallest end-to-end example: a two-node network, one service chain,
one policy, a thousand slots.

Node a hosts processing (one unit, capacity 1), the link a->b carries the
processed packets to their destination b.  Packets arrive at a as stage-0
commodities, become stage-1 after processing, and are absorbed at b.
"""

from cloudnetsim.arrivals import specs_for_services
from cloudnetsim.engine import run
from cloudnetsim.experiments import compute_metrics
from cloudnetsim.model import (
    ClientDemand, CloudNetwork, Function, ReconfigProfile, ServiceChain,
    build_commodities, unit_profile,
)
from cloudnetsim.policies import ADCNC

prof = unit_profile(1)                       # K=1, C(k)=w(k)=k
rec = ReconfigProfile(delay=2, cost=0.5)     # 2 blocked slots + 0.5 per switch
net = CloudNetwork(
    nodes=("a", "b"),
    links=(("a", "b"),),
    node_profile={"a": prof, "b": unit_profile(0)},   # b only terminates
    link_profile={("a", "b"): prof},
    node_reconfig={"a": rec, "b": rec},
    link_reconfig={("a", "b"): rec},
)
services = [ServiceChain(
    "svc", (Function(scale=1.0, proc_ratio=1.0),),
    (ClientDemand("a", "b", "poisson", rate=0.3),),
)]

coms = build_commodities(services)
specs = specs_for_services(services)
result = run(net, coms, ADCNC(V=2.0), specs, horizon=1000, seed=7)

print("slot  total_queue  cost  reconfiguring")
for t in list(range(5)) + list(range(995, 1000)):
    print(f"{t:4d}  {result.total_queue[t]:11.0f}  {result.cost_total[t]:4.1f}"
          f"  {result.reconfiguring[t]:13.0f}")

m = compute_metrics(result, "adcnc", 0.3, 2.0, 2, 0.5, seed=7,
                    warmup_frac=0.5, n_elements=3)
print(f"\nmean queue {m.mean_total_queue:.2f}, mean cost {m.mean_cost:.3f}, "
      f"reconfig fraction {m.reconfig_fraction:.4f}, "
      f"delivered {m.delivered_rate:.3f}/slot (arrivals 0.3/slot)")
