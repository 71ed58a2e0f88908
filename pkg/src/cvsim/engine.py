"""Scenario execution: the deterministic per-step loop.

Step phases, in fixed order at each time t:
  1. breakdown transitions (forced stop / resume)
  2. beacons and periodic breakdown warnings
  3. inbox drain: relay flooding + warning/resolved handlers
  4. demand insertion
  5. synchronous traffic advancement
  6. detectors and trace recording (state labelled t + dt)

Communication precedes motion inside a step, so deliveries see the paused
pre-step vehicle positions. Disabling rerouting switches the whole V2X stack
off; the breakdown itself still happens physically.
"""

from __future__ import annotations

import dataclasses
import math
from pathlib import Path
from typing import Optional

import numpy as np

from . import comms, incident, metrics, rerouting, traffic
from .network import shortest_path
from .scenario import ScenarioConfig, materialize_demand, resolve_network


class World:
    """Mutable state of one scenario run; stepped by exactly one thread."""

    def __init__(self, config: ScenarioConfig, network=None):
        self.config = config
        self.network = resolve_network(config) if network is None else network
        self.time = 0.0
        self.vehicles: dict[int, traffic.VehicleState] = {}
        self.arrived: dict[int, traffic.VehicleState] = {}
        self.pending = materialize_demand(config)
        self.demand_total = len(self.pending)
        self.inserted_count = 0

        self.comm_config = config.comm
        self.v2x_enabled = config.rerouting.enabled
        self.caution_factor = config.rerouting.caution_factor
        self.inboxes: dict[int, comms.Inbox] = {}
        self.msg_seq: dict[int, dict[str, int]] = {}
        self.positions: dict[int, tuple[float, float]] = {}

        # named streams from one seed; stream [seed, 0] belongs to demand
        # generation (scenario.generate_demand), so toggling breakdown or the
        # V2X flag can never perturb the demand realization
        seed = config.seed
        self.rng_krauss = np.random.default_rng(np.random.SeedSequence([seed, 1]))
        self.rng_incident = np.random.default_rng(np.random.SeedSequence([seed, 2]))

        self.incident: Optional[incident.IncidentState] = None
        if config.breakdown is not None:
            self.incident = incident.initialize_schedule(config.breakdown, 0.0)

        self.detectors = config.detectors
        self.profile_vehicles = config.output.profile_vehicles
        self.kpi: Optional[metrics.KpiStore] = metrics.KpiStore(
            trace=config.output.trace, messages=config.output.messages
        )
        self.caution_engagements = 0
        #: optional audit trail of (receiver, message key) handler dispatches
        self.debug_handler_log: Optional[list] = None
        self.stalled_vehicles: set[int] = set()
        self._stopped_since: dict[int, float] = {}
        self.step_base_speed: dict[int, float] = {}
        self.last_moves: dict[int, list] = {}
        self.last_arrivals: list[int] = []
        self._route_cache: dict[tuple[str, str], object] = {}

        # initial routes are fixed before execution: cheapest free-flow path
        for entry in self.pending:
            self.route_for(entry.origin, entry.destination)

    def route_for(self, origin: str, destination: str):
        key = (origin, destination)
        route = self._route_cache.get(key)
        if route is None:
            route = shortest_path(self.network, origin, destination)
            if route is None:
                raise ValueError(f"no route from {origin} to {destination}")
            self._route_cache[key] = route
        return route

    def register_vehicle(self, veh: traffic.VehicleState) -> None:
        self.vehicles[veh.id] = veh
        self.inboxes[veh.id] = comms.Inbox(messages=[], seen=veh.warning_seen)

    # --- one simulation step --------------------------------------------------

    def step(self) -> None:
        t = self.time
        dt = self.config.dt
        self.step_base_speed = {vid: v.speed for vid, v in self.vehicles.items()}
        self.positions = {
            vid: comms.vehicle_position(self, veh)
            for vid, veh in self.vehicles.items()
        }

        if self.incident is not None:
            incident.step_transitions(self.incident, self, t)

        if self.v2x_enabled:
            comms.beacon_step(self, t)
            if self.incident is not None:
                incident.warning_emit_step(self.incident, self, t)
            for receiver_id, msg in comms.relay_step(self):
                veh = self.vehicles[receiver_id]
                if self.debug_handler_log is not None:
                    self.debug_handler_log.append((receiver_id, msg.key))
                if msg.kind == comms.BREAKDOWN_WARNING:
                    result = rerouting.handle_warning(
                        veh, msg, self.network, self.config.rerouting
                    )
                    if result == rerouting.CAUTION_ENGAGED:
                        self.caution_engagements += 1
                elif msg.kind == comms.BREAKDOWN_RESOLVED:
                    rerouting.handle_resolved(veh, msg, self.network)

        inserted = traffic.spawn_step(self, t)
        for vid in inserted:
            self.register_vehicle_comm(vid)

        traffic.advance_world(self, dt)
        self.time = t + dt

        for veh in self.vehicles.values():
            rerouting.release_passed_caution(veh)
        self._track_stalls()

        if self.kpi is not None:
            self.kpi.record_step(self, self.time)
            self.kpi.detector_step(self, self.detectors, self.time)
            for vid in self.last_arrivals:
                self.kpi.record_journey(self, self.arrived[vid])

    def register_vehicle_comm(self, vid: int) -> None:
        veh = self.vehicles[vid]
        self.inboxes[vid] = comms.Inbox(messages=[], seen=veh.warning_seen)

    def _track_stalls(self) -> None:
        threshold = self.config.stall_threshold
        for vid, veh in self.vehicles.items():
            if veh.speed <= 1e-9:
                since = self._stopped_since.setdefault(vid, self.time)
                if self.time - since > threshold:
                    self.stalled_vehicles.add(vid)
            else:
                self._stopped_since.pop(vid, None)

    def run(self) -> None:
        end = self.config.end_time
        while self.time < end - 1e-9 and (self.pending or self.vehicles):
            self.step()


def config_echo(config: ScenarioConfig) -> dict:
    """Resolved configuration as a JSON-safe dict (defaults included)."""

    def clean(value):
        if isinstance(value, float) and math.isinf(value):
            return "blocked"
        if isinstance(value, Path):
            return str(value)
        if isinstance(value, tuple):
            return [clean(v) for v in value]
        if isinstance(value, dict):
            return {k: clean(v) for k, v in value.items()}
        return value

    raw = dataclasses.asdict(config)
    raw.pop("base_dir", None)
    return clean(raw)


def run_scenario(config: ScenarioConfig, outdir=None) -> dict:
    """Execute one scenario and return its summary (files written if outdir)."""
    world = World(config)
    world.run()
    summary = metrics.summarize(world, world.kpi, config_echo(config))
    if outdir is not None:
        metrics.write_outputs(Path(outdir), world.kpi, summary)
    return summary
