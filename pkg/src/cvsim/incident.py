"""Vehicle breakdown scheduling: forced stops, periodic warnings, clearance.

A schedule binds a stop/resume cycle to one target vehicle: the target is
pinned at speed 0 for each breakdown window and resumes under car-following
control afterwards. While broken down it emits one breakdown warning per
beacon interval (fresh sequence number each time) carrying the breakdown
location; a single resolved message is broadcast at each clearance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from . import comms
from .traffic import Mode

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BreakdownSchedule:
    target_vehicle: Optional[int]  # None with random_target
    count: int
    start: float  # s after scenario start
    duration: float  # s
    interval: float = 0.0  # s between resume and the next stop
    random_target: bool = False

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("breakdown count must be >= 0")
        if self.count > 0 and self.duration <= 0:
            raise ValueError("breakdown duration must be > 0")
        if self.count > 1 and self.interval <= 0:
            raise ValueError("breakdown interval must be > 0 for repeated breakdowns")
        if self.start < 0:
            raise ValueError("breakdown start must be >= 0")
        if self.target_vehicle is None and not self.random_target:
            raise ValueError("breakdown needs a target vehicle or random_target")


@dataclass
class IncidentState:
    schedule: BreakdownSchedule
    target: Optional[int]
    remaining_count: int
    active: bool = False
    current_breakdown_location: Optional[tuple[str, float]] = None
    next_transition_time: Optional[float] = None
    pending_transition: Optional[str] = None  # "stop" | "resume"
    warning_seq: int = 0
    next_emit_time: Optional[float] = None
    abandoned: bool = False
    #: executed transitions as (time, "stop"|"resume") in firing order
    transitions: list = field(default_factory=list)
    #: (edge_id, pos) of every breakdown episode, in order
    breakdown_sites: list = field(default_factory=list)
    warnings_emitted: int = 0


def initialize_schedule(schedule: BreakdownSchedule, t0: float) -> IncidentState:
    """Arm the schedule: with count > 0 the first stop fires at t0 + start."""
    state = IncidentState(
        schedule=schedule,
        target=schedule.target_vehicle,
        remaining_count=schedule.count,
    )
    if schedule.count > 0:
        state.next_transition_time = t0 + schedule.start
        state.pending_transition = "stop"
    return state


def _resolve_random_target(state: IncidentState, world) -> Optional[int]:
    active = sorted(world.vehicles)
    if not active:
        return None
    idx = int(world.rng_incident.integers(0, len(active)))
    return active[idx]


def fire_transition(state: IncidentState, world, t: float) -> None:
    """Execute the due stop or resume transition at time t."""
    kind = state.pending_transition
    if kind == "stop":
        if state.target is None and state.schedule.random_target:
            state.target = _resolve_random_target(state, world)
        veh = world.vehicles.get(state.target) if state.target is not None else None
        if veh is None:
            # target already arrived (or never inserted): the run stays valid
            log.warning("breakdown target %s not active at t=%s; schedule abandoned",
                        state.target, t)
            state.abandoned = True
            state.next_transition_time = None
            state.pending_transition = None
            return
        veh.mode = Mode.BROKEN_DOWN
        veh.speed = 0.0
        state.active = True
        state.current_breakdown_location = (veh.current_edge_id, veh.pos)
        state.breakdown_sites.append(state.current_breakdown_location)
        state.remaining_count -= 1
        state.transitions.append((t, "stop"))
        state.next_transition_time = t + state.schedule.duration
        state.pending_transition = "resume"
        state.next_emit_time = t
    elif kind == "resume":
        veh = world.vehicles.get(state.target)
        if veh is not None and veh.mode is Mode.BROKEN_DOWN:
            veh.mode = Mode.NORMAL  # car-following governs speed again
        state.active = False
        state.transitions.append((t, "resume"))
        state.next_emit_time = None
        if world.v2x_enabled and veh is not None:
            comms.send_from(world, state.target, comms.BREAKDOWN_RESOLVED, payload={
                "breakdown_vehicle": state.target,
                "edge": state.current_breakdown_location[0],
                "pos": state.current_breakdown_location[1],
            })
        state.current_breakdown_location = None
        if state.remaining_count > 0:
            state.next_transition_time = t + state.schedule.interval
            state.pending_transition = "stop"
        else:
            state.next_transition_time = None
            state.pending_transition = None


def step_transitions(state: IncidentState, world, t: float) -> None:
    """Fire every transition due at or before t (engine calls once per step)."""
    while (state.next_transition_time is not None
           and state.next_transition_time <= t + 1e-9):
        fire_transition(state, world, state.next_transition_time)


def warning_emit_step(state: IncidentState, world, t: float) -> None:
    """While broken down, broadcast one location-stamped warning per beacon interval."""
    if not state.active or not world.v2x_enabled:
        return
    interval = world.comm_config.beacon_interval
    while state.next_emit_time is not None and state.next_emit_time <= t + 1e-9:
        edge_id, pos = state.current_breakdown_location
        msg = comms.V2xMessage(
            kind=comms.BREAKDOWN_WARNING,
            origin_vehicle=state.target,
            seq=state.warning_seq,
            sent_at=t,
            sender_position=world.positions[state.target],
            hop_count=1,
            payload={"breakdown_vehicle": state.target, "edge": edge_id, "pos": pos},
        )
        state.warning_seq += 1
        state.warnings_emitted += 1
        world.inboxes[state.target].seen.add(msg.key)
        comms.broadcast(world, state.target, msg)
        state.next_emit_time += interval
