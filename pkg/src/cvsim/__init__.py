"""Deterministic microscopic traffic + V2V co-simulator.

Core pieces: a directed road network with override-aware Dijkstra routing, a
Krauss-type car-following kernel, an idealized range-gated broadcast layer
with warning flooding, breakdown scheduling with proactive rerouting, and a
KPI pipeline with a reproducible experiment matrix harness.
"""

from .comms import CommConfig, Inbox, V2xMessage, beacon_step, broadcast, in_range, relay_step
from .engine import World, run_scenario
from .incident import BreakdownSchedule, IncidentState, fire_transition, initialize_schedule, warning_emit_step
from .matrix import ExperimentMatrix, load_matrix, run_matrix
from .metrics import DecelStats, DetectorSpec, JourneyRecord, KpiStore, decel_stats, free_flow_time, summarize
from .network import (
    BLOCKED,
    Edge,
    NetworkError,
    Node,
    RoadNetwork,
    Route,
    UnknownEdgeError,
    UnknownNodeError,
    build_network,
    effective_travel_time,
    load_network,
    parse_network,
    save_network,
    serialize_network,
    shortest_path,
)
from .rerouting import CAUTION_ENGAGED, ROUTE_CHANGED, ROUTE_KEPT, ReroutingConfig, caution_mode, handle_resolved, handle_warning
from .scenario import ConfigError, DemandConfig, ScenarioConfig, generate_demand, load_demand_file, load_scenario
from .traffic import (
    HGV,
    PASSENGER,
    DemandEntry,
    Mode,
    VehicleClass,
    VehicleState,
    advance_world,
    krauss_step,
    lane_change_decide,
    spawn_step,
)

__version__ = "0.1.0"
