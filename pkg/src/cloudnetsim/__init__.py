"""Discrete-time simulator for distributed cloud network control with
reconfiguration delays and costs.

Packets of service chain commodities move through a network whose nodes
host processing resources and whose links carry transmission resources.
Changing an element's resource allocation or served commodity stalls it
for a configurable number of slots and charges a switching cost.  The
package provides max-weight control policies with and without
reconfiguration hysteresis, an offline capacity/cost linear program, and
reproducible sweep experiments."""

from .arrivals import (
    ArrivalSpec,
    generate_schedule,
    max_arrival_bound,
    sample_arrivals,
    specs_for_services,
)
from .capacity import CapacityProgram, build_program, is_feasible, max_throughput_scale, min_cost
from .engine import PolicyDecision, RunResult, SimState, SlotReport, initial_state, run, step
from .model import (
    ClientDemand,
    CloudNetwork,
    Commodity,
    CommoditySet,
    Function,
    ReconfigProfile,
    ResourceProfile,
    ServiceChain,
    build_commodities,
    commodity_id,
    unit_profile,
    validate_network,
    validate_services,
)
from .policies import (
    ADCNC,
    DCNC,
    DriftConstants,
    SublinearG,
    TwoStageADCNC,
    adcnc_decide,
    adcnc_link_decide,
    adcnc_node_decide,
    check_differential_changes,
    check_reconfig_windows,
    dcnc_decide,
    lemma_constants,
    make_policy,
    processing_current_weight,
    processing_max_weight,
    transmission_current_weight,
    transmission_max_weight,
    two_stage_node_decide,
)
from .scenarios import Scenario, abilene_scenario, load_scenario, load_scenario_file

__version__ = "0.1.0"

__all__ = [
    "ADCNC",
    "ArrivalSpec",
    "CapacityProgram",
    "ClientDemand",
    "CloudNetwork",
    "Commodity",
    "CommoditySet",
    "DCNC",
    "DriftConstants",
    "Function",
    "PolicyDecision",
    "ReconfigProfile",
    "ResourceProfile",
    "RunResult",
    "Scenario",
    "ServiceChain",
    "SimState",
    "SlotReport",
    "SublinearG",
    "TwoStageADCNC",
    "abilene_scenario",
    "adcnc_decide",
    "adcnc_link_decide",
    "adcnc_node_decide",
    "build_commodities",
    "build_program",
    "check_differential_changes",
    "check_reconfig_windows",
    "commodity_id",
    "dcnc_decide",
    "generate_schedule",
    "initial_state",
    "is_feasible",
    "lemma_constants",
    "load_scenario",
    "load_scenario_file",
    "make_policy",
    "max_arrival_bound",
    "max_throughput_scale",
    "min_cost",
    "processing_current_weight",
    "processing_max_weight",
    "run",
    "sample_arrivals",
    "specs_for_services",
    "step",
    "transmission_current_weight",
    "transmission_max_weight",
    "two_stage_node_decide",
    "unit_profile",
    "validate_network",
    "validate_services",
]
