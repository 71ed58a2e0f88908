"""Idealized V2V broadcast layer.

Error-free, range-gated single-hop delivery: a broadcast reaches exactly the
active vehicles within the configured radio range at the current step.
Warning-class messages flood hop by hop (one hop per simulation step) with
per-vehicle duplicate suppression; beacons never relay. hop_count counts
transmissions, so a direct neighbour of the origin receives hop 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

BEACON = "beacon"
BREAKDOWN_WARNING = "breakdown_warning"
BREAKDOWN_RESOLVED = "breakdown_resolved"

#: message kinds that are relayed by receivers (flooding)
RELAYED_KINDS = frozenset({BREAKDOWN_WARNING, BREAKDOWN_RESOLVED})


@dataclass(frozen=True)
class CommConfig:
    beacon_interval: float = 1.0  # s
    range_m: float = 300.0
    tx_power_mw: float = 20.0  # recorded, inert
    antenna_height_m: float = 1.895  # recorded, inert
    packet_size_bytes: int = 1024  # bookkeeping only
    max_hops: int = 0  # 0 = unlimited relay depth


@dataclass(frozen=True)
class V2xMessage:
    kind: str
    origin_vehicle: int
    seq: int
    sent_at: float
    sender_position: tuple[float, float]
    hop_count: int = 1  # transmissions so far; direct delivery = 1
    payload: Optional[dict] = None

    @property
    def key(self) -> tuple[int, str, int]:
        return (self.origin_vehicle, self.kind, self.seq)


@dataclass
class Inbox:
    messages: list = field(default_factory=list)
    seen: set = field(default_factory=set)


def in_range(pos_a: tuple[float, float], pos_b: tuple[float, float],
             config: CommConfig) -> bool:
    """True iff the Euclidean distance is within the radio range (inclusive)."""
    return math.dist(pos_a, pos_b) <= config.range_m


def vehicle_position(world, vehicle) -> tuple[float, float]:
    """Planar position by linear interpolation along the current edge."""
    edge = world.network.edges[vehicle.current_edge_id]
    a = world.network.nodes[edge.from_node]
    b = world.network.nodes[edge.to_node]
    f = min(1.0, max(0.0, vehicle.pos / edge.length))
    return (a.x + f * (b.x - a.x), a.y + f * (b.y - a.y))


def broadcast(world, sender_id: int, message: V2xMessage) -> list[int]:
    """Deliver a message to every other in-range active vehicle, instantly.

    Returns the receiving vehicle ids (ascending). Every delivery is recorded
    for the messages.csv output when recording is enabled.
    """
    if sender_id not in world.vehicles:
        raise KeyError(f"unknown or inactive sender {sender_id}")
    config = world.comm_config
    sender_pos = message.sender_position
    delivered = []
    for vid in sorted(world.vehicles):
        if vid == sender_id:
            continue
        if in_range(sender_pos, world.positions[vid], config):
            world.inboxes[vid].messages.append(message)
            delivered.append(vid)
            if world.kpi is not None:
                world.kpi.record_message(world.time, message, sender_id, vid)
    return delivered


def next_seq(world, origin: int, kind: str) -> int:
    counters = world.msg_seq.setdefault(origin, {})
    seq = counters.get(kind, 0)
    counters[kind] = seq + 1
    return seq


def send_from(world, sender_id: int, kind: str, payload: Optional[dict] = None,
              origin: Optional[int] = None) -> V2xMessage:
    """Create a fresh message from a vehicle and broadcast it (hop 1)."""
    origin = sender_id if origin is None else origin
    msg = V2xMessage(
        kind=kind,
        origin_vehicle=origin,
        seq=next_seq(world, origin, kind),
        sent_at=world.time,
        sender_position=world.positions[sender_id],
        hop_count=1,
        payload=payload,
    )
    # the origin never re-handles its own traffic
    world.inboxes[sender_id].seen.add(msg.key)
    broadcast(world, sender_id, msg)
    return msg


def beacon_step(world, t: float) -> None:
    """Periodic kinematic beacons; they inform neighbours but never relay."""
    interval = world.comm_config.beacon_interval
    for vid in sorted(world.vehicles):
        veh = world.vehicles[vid]
        phase = (t - veh.depart_time) / interval
        if phase < 0 or abs(phase - round(phase)) > 1e-9:
            continue
        send_from(world, vid, BEACON, payload={
            "speed": veh.speed, "accel": veh.accel,
        })


def relay_step(world) -> list[tuple[int, V2xMessage]]:
    """Drain inboxes: dedup, re-broadcast warning-kind messages, hand off.

    Only messages already delivered before this call are processed; relayed
    copies land in the next drain, so floods advance one hop per step.
    Returns (receiver, message) pairs to dispatch to the warning handlers, at
    most one per (origin, kind, seq) per vehicle over the whole run.
    """
    handled = []
    max_hops = world.comm_config.max_hops
    batches = []
    for vid in sorted(world.vehicles):
        inbox = world.inboxes[vid]
        if inbox.messages:
            batches.append((vid, inbox.messages))
            inbox.messages = []
    for vid, batch in batches:
        if vid not in world.vehicles:  # pragma: no cover - vehicles never leave mid-step
            continue
        inbox = world.inboxes[vid]
        for msg in batch:
            if msg.kind not in RELAYED_KINDS:
                continue
            if msg.key in inbox.seen:
                continue
            inbox.seen.add(msg.key)
            if max_hops <= 0 or msg.hop_count < max_hops:
                broadcast(world, vid, replace(
                    msg,
                    hop_count=msg.hop_count + 1,
                    sender_position=world.positions[vid],
                ))
            handled.append((vid, msg))
    return handled
