"""KPI pipeline: journey delay, kinematic traces, virtual loop detectors.

All recording happens inline in the step loop; aggregation is post-run.
Deceleration statistics pool the magnitudes of all negative per-step
accelerations across vehicles (population variance, divisor N).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable

from .network import RoadNetwork, Route
from .traffic import VehicleClass


@dataclass(frozen=True)
class JourneyRecord:
    vehicle: int
    class_name: str
    depart: float
    arrive: float
    journey_time: float
    free_flow_time: float
    delay: float
    rerouted: bool


@dataclass(frozen=True)
class DetectorSpec:
    id: str
    edge: str
    position: float  # m along the edge


@dataclass(frozen=True)
class DecelStats:
    mean: float  # m/s^2, magnitude
    variance: float  # population variance, (m/s^2)^2
    sample_count: int


def free_flow_time(route: Route, network: RoadNetwork, vclass: VehicleClass) -> float:
    """Unimpeded traversal time: sum of length / min(edge limit, class cap)."""
    total = 0.0
    for eid in route.edge_ids:
        edge = network.edges[eid]
        total += edge.length / min(edge.speed_limit, vclass.max_speed)
    return total


def decel_stats(accels: Iterable[float]) -> DecelStats:
    """Mean and population variance of |a| over the negative accelerations."""
    samples = [-a for a in accels if a < 0]
    n = len(samples)
    if n == 0:
        return DecelStats(0.0, 0.0, 0)
    mean = sum(samples) / n
    variance = sum((x - mean) ** 2 for x in samples) / n
    return DecelStats(mean, variance, n)


class KpiStore:
    """Per-run recorder for traces, messages, detector events and journeys."""

    def __init__(self, trace: bool = True, messages: bool = True):
        self.trace_enabled = trace
        self.messages_enabled = messages
        self.journeys: list[JourneyRecord] = []
        self.trace_rows: list[tuple] = []  # (t, vehicle, edge, pos, speed, accel)
        self.message_rows: list[tuple] = []  # (t, kind, origin, seq, sender, receiver, hop)
        self.detector_rows: list[tuple] = []  # (detector, t, vehicle, speed)
        self.detector_counts: dict[str, int] = {}
        self.accel_samples: list[float] = []

    def record_step(self, world, t: float) -> None:
        for vid in sorted(world.vehicles):
            veh = world.vehicles[vid]
            self.accel_samples.append(veh.accel)
            if self.trace_enabled:
                self.trace_rows.append(
                    (t, vid, veh.current_edge_id, veh.pos, veh.speed, veh.accel)
                )

    def record_message(self, t: float, message, sender: int, receiver: int) -> None:
        if self.messages_enabled:
            self.message_rows.append(
                (t, message.kind, message.origin_vehicle, message.seq,
                 sender, receiver, message.hop_count)
            )

    def record_journey(self, world, veh) -> None:
        ff = free_flow_time(veh.route, world.network, veh.vclass)
        journey = veh.arrive_time - veh.depart_time
        self.journeys.append(JourneyRecord(
            vehicle=veh.id,
            class_name=veh.vclass.name,
            depart=veh.depart_time,
            arrive=veh.arrive_time,
            journey_time=journey,
            free_flow_time=ff,
            delay=journey - ff,
            rerouted=veh.rerouted,
        ))

    def detector_step(self, world, detectors: Iterable[DetectorSpec], t: float) -> None:
        """Count each vehicle whose front crossed a detector during this step.

        A crossing is prev_pos < position <= new_pos on the detector's edge;
        wrap segments from edge transitions are checked per edge, so a vehicle
        is counted at most once per crossing and a stopped vehicle never is.
        """
        for det in detectors:
            for vid in sorted(world.last_moves):
                for edge_id, p0, p1 in world.last_moves[vid]:
                    if edge_id == det.edge and p0 < det.position <= p1:
                        veh = world.vehicles.get(vid) or world.arrived.get(vid)
                        self.detector_rows.append((det.id, t, vid, veh.speed))
                        self.detector_counts[det.id] = \
                            self.detector_counts.get(det.id, 0) + 1
                        break


def summarize(world, store: KpiStore, config_echo: dict) -> dict:
    """Aggregate one finished run into a structured, self-describing summary."""
    journeys = sorted(store.journeys, key=lambda j: j.vehicle)
    delays = [j.delay for j in journeys]
    times = [j.journey_time for j in journeys]
    stats = decel_stats(store.accel_samples)

    profiles = {}
    for vid in world.profile_vehicles:
        rows = [r for r in store.trace_rows if r[1] == vid]
        if rows:
            profiles[str(vid)] = {
                "t": [r[0] for r in rows],
                "speed": [r[4] for r in rows],
                "accel": [r[5] for r in rows],
            }

    incident = world.incident
    breakdown = None
    if incident is not None:
        breakdown = {
            "target": incident.target,
            "transitions": [[t, kind] for t, kind in incident.transitions],
            "warnings_emitted": incident.warnings_emitted,
            "abandoned": incident.abandoned,
            "location": None,
        }
        if incident.breakdown_sites:
            breakdown["location"] = {
                "edge": incident.breakdown_sites[-1][0],
                "pos": incident.breakdown_sites[-1][1],
            }

    summary = {
        "config": config_echo,
        "counts": {
            "demand": world.demand_total,
            "inserted": world.inserted_count,
            "arrived": len(journeys),
            "active_at_end": len(world.vehicles),
            "pending_at_end": len(world.pending),
        },
        "reroute_count": sum(1 for j in journeys if j.rerouted)
        + sum(1 for v in world.vehicles.values() if v.rerouted),
        "caution_engagements": world.caution_engagements,
        "delay": _series_stats(delays),
        "journey_time": _series_stats(times),
        "free_flow_time": _series_stats([j.free_flow_time for j in journeys]),
        "deceleration": {
            "mean": stats.mean,
            "variance": stats.variance,
            "count": stats.sample_count,
        },
        "detectors": {
            det.id: {
                "count": store.detector_counts.get(det.id, 0),
                "mean_speed": _mean(
                    [r[3] for r in store.detector_rows if r[0] == det.id]
                ),
            }
            for det in world.detectors
        },
        "breakdown": breakdown,
        "messages_delivered": len(store.message_rows)
        if store.messages_enabled else None,
        "stalled_vehicles": sorted(world.stalled_vehicles),
        "profiles": profiles,
        "end_time": world.time,
        "incomplete": len(journeys) == 0,
    }
    return summary


def _mean(xs):
    return sum(xs) / len(xs) if xs else 0.0


def _series_stats(xs):
    if not xs:
        return {"mean": 0.0, "max": 0.0, "min": 0.0, "count": 0}
    return {"mean": sum(xs) / len(xs), "max": max(xs), "min": min(xs),
            "count": len(xs)}


# --- output files -------------------------------------------------------------

VEHICLES_HEADER = ["vehicle", "class", "depart", "arrive", "journey_time",
                   "free_flow_time", "delay", "rerouted"]
TRACE_HEADER = ["t", "vehicle", "edge", "pos", "speed", "accel"]
DETECTORS_HEADER = ["detector", "t", "vehicle", "speed"]
MESSAGES_HEADER = ["t", "kind", "origin", "seq", "sender", "receiver", "hop_count"]


def write_outputs(outdir, store: KpiStore, summary: dict) -> None:
    """Write vehicles/trace/messages/detectors CSVs and summary.json.

    Floats are rendered with repr so that re-parsing reproduces the exact
    values the engine aggregated (bit-for-bit consistency checks rely on it).
    """
    outdir.mkdir(parents=True, exist_ok=True)

    with open(outdir / "vehicles.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(VEHICLES_HEADER)
        for j in sorted(store.journeys, key=lambda j: j.vehicle):
            w.writerow([j.vehicle, j.class_name, repr(j.depart), repr(j.arrive),
                        repr(j.journey_time), repr(j.free_flow_time),
                        repr(j.delay), "true" if j.rerouted else "false"])

    with open(outdir / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for t, vid, edge, pos, speed, accel in store.trace_rows:
            w.writerow([repr(t), vid, edge, repr(pos), repr(speed), repr(accel)])

    with open(outdir / "messages.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MESSAGES_HEADER)
        for t, kind, origin, seq, sender, receiver, hop in store.message_rows:
            w.writerow([repr(t), kind, origin, seq, sender, receiver, hop])

    with open(outdir / "detectors.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(DETECTORS_HEADER)
        for det, t, vid, speed in store.detector_rows:
            w.writerow([det, repr(t), vid, repr(speed)])

    with open(outdir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
