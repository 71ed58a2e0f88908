"""Discrete-time microscopic traffic kernel.

Krauss-type safe-speed car following with a driver-imperfection term, a
simplified incentive-plus-safety lane-change rule, gap-checked insertion and
synchronous per-step world advancement. All updates are deterministic given
the scenario RNG stream: vehicles are processed in ascending id order and
leaders are resolved from the previous step's kinematics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .network import Route

#: 60 mph network-wide speed cap in m/s.
MAX_SPEED_MPS = 26.8224

#: A same-lane leader holding safe speed below this fraction of the desired
#: speed creates a lane-change incentive.
LANE_CHANGE_INCENTIVE = 0.5

#: How far ahead (m) leaders are resolved across downstream route edges.
#: Comfortably beyond the worst-case stopping distance at the 60 mph cap.
LEADER_LOOKAHEAD_M = 400.0


class Mode(enum.Enum):
    NORMAL = "normal"
    BROKEN_DOWN = "broken_down"
    CAUTION = "caution"


@dataclass(frozen=True)
class VehicleClass:
    name: str
    max_accel: float  # m/s^2
    max_decel: float  # m/s^2, positive magnitude
    max_speed: float  # m/s
    min_gap: float  # m, standstill offset to the leader
    sigma: float  # driver imperfection in [0, 1]
    length: float  # m


PASSENGER = VehicleClass(
    "PASSENGER", max_accel=2.6, max_decel=4.5, max_speed=MAX_SPEED_MPS,
    min_gap=2.5, sigma=0.6, length=5.0,
)
HGV = VehicleClass(
    "HGV", max_accel=2.6, max_decel=4.5, max_speed=MAX_SPEED_MPS,
    min_gap=2.5, sigma=0.4, length=12.0,
)
VEHICLE_CLASSES = {cls.name: cls for cls in (PASSENGER, HGV)}


@dataclass
class VehicleState:
    id: int
    vclass: VehicleClass
    route: Route
    route_index: int = 0
    lane: int = 0
    pos: float = 0.0  # m along the current edge, front bumper
    speed: float = 0.0  # m/s
    accel: float = 0.0  # m/s^2, signed, last step
    mode: Mode = Mode.NORMAL
    depart_time: float = 0.0
    arrive_time: Optional[float] = None
    rerouted: bool = False
    #: message keys already handled by this vehicle (dedup for flooding)
    warning_seen: set = field(default_factory=set)
    #: private travel-time override view used for rerouting decisions
    view_overrides: dict = field(default_factory=dict)
    #: breakdown location (edge_id, pos) this vehicle is cautious about
    caution_site: Optional[tuple[str, float]] = None

    @property
    def current_edge_id(self) -> str:
        return self.route.edge_ids[self.route_index]

    def remaining_edges(self) -> tuple[str, ...]:
        return self.route.edge_ids[self.route_index:]


@dataclass(frozen=True)
class DemandEntry:
    id: int
    class_name: str
    depart: float
    origin: str
    destination: str


def _safe_speed(vclass: VehicleClass, speed: float, leader_speed: float,
                gap: float, tau: float) -> float:
    """Krauss safe speed: never exceed what allows stopping behind a braking leader."""
    gap_eff = max(0.0, gap - vclass.min_gap)
    b = vclass.max_decel
    v_safe = leader_speed + (gap_eff - leader_speed * tau) / (
        (leader_speed + speed) / (2.0 * b) + tau
    )
    return max(0.0, v_safe)


def krauss_step(
    follower: VehicleState,
    leader_speed: Optional[float],
    gap: Optional[float],
    dt: float,
    rng,
    *,
    speed_limit: float = math.inf,
    caution_factor: float = 0.5,
) -> float:
    """New speed of `follower` after one step of dt seconds.

    v_safe = v_l + (gap_eff - v_l*tau) / ((v_l + v)/(2b) + tau) with tau = dt,
    gap_eff = gap - min_gap clamped at 0; the desired speed is the minimum of
    the class/edge cap (halved-by-default in caution mode), the acceleration
    bound v + a*dt and v_safe; driver imperfection subtracts sigma*a*dt*r with
    r ~ U[0,1) from the scenario RNG.

    Two clamps reconcile the speed-change box with hard collision freedom:
    deceleration is held to max_decel per step (comfortable braking) unless
    the gap itself requires more, and the follower never advances past the
    leader's rear bumper within the step (emergency bound gap/dt), which keeps
    gaps nonnegative even when a leader stops instantaneously.
    """
    if follower.mode is Mode.BROKEN_DOWN:
        raise ValueError("broken-down vehicles are pinned at speed 0")
    cls = follower.vclass
    v = follower.speed
    a = cls.max_accel

    cap = min(cls.max_speed, speed_limit)
    if follower.mode is Mode.CAUTION:
        cap *= caution_factor

    v_des = min(cap, v + a * dt)
    hard_cap = math.inf
    if leader_speed is not None:
        if gap is None or gap < 0:
            raise ValueError(f"negative or missing gap behind leader: {gap}")
        v_des = min(v_des, _safe_speed(cls, v, leader_speed, gap, dt))
        hard_cap = gap / dt

    r = rng.random()
    v_new = max(0.0, v_des - cls.sigma * a * dt * r)
    v_new = max(v_new, v - cls.max_decel * dt)  # comfortable-braking floor
    v_new = min(v_new, hard_cap)  # emergency bound, beats the floor
    return max(0.0, v_new)


@dataclass(frozen=True)
class LaneNeighbour:
    speed: float
    gap: float  # bumper-to-bumper, m
    vclass: VehicleClass


@dataclass(frozen=True)
class AdjacentLane:
    front: Optional[LaneNeighbour]
    rear: Optional[LaneNeighbour]


def lane_change_decide(
    vehicle: VehicleState,
    same_lane_leader: Optional[LaneNeighbour],
    adjacent: AdjacentLane,
    dt: float,
    *,
    speed_limit: float = math.inf,
) -> bool:
    """Simplified lane-change rule: change only with incentive and safety.

    Incentive: the current leader constrains the safe speed below
    LANE_CHANGE_INCENTIVE of the desired speed. Safety: the target lane offers
    a front gap of at least min_gap + v*dt, and the prospective new follower
    is neither forced beyond comfortable deceleration nor able to reach the
    changer within the step.
    """
    if same_lane_leader is None:
        return False
    cls = vehicle.vclass
    desired = min(cls.max_speed, speed_limit)
    v_here = _safe_speed(cls, vehicle.speed, same_lane_leader.speed,
                         same_lane_leader.gap, dt)
    if v_here >= LANE_CHANGE_INCENTIVE * desired:
        return False

    front = adjacent.front
    if front is not None and front.gap < cls.min_gap + vehicle.speed * dt:
        return False

    rear = adjacent.rear
    if rear is not None:
        v_safe_rear = _safe_speed(rear.vclass, rear.speed, vehicle.speed,
                                  rear.gap, dt)
        if v_safe_rear < rear.speed - rear.vclass.max_decel * dt:
            return False
        # no-overlap guard: the new follower cannot reach the changer this
        # step even at full acceleration against a standing target
        if rear.gap < (rear.speed + rear.vclass.max_accel * dt) * dt:
            return False
    return True


# --- occupancy helpers -------------------------------------------------------


def build_occupancy(world) -> dict[tuple[str, int], list[tuple[float, int]]]:
    """Per-(edge, lane) ascending (pos, id) lists from current vehicle states."""
    occ: dict[tuple[str, int], list[tuple[float, int]]] = {}
    for vid in sorted(world.vehicles):
        veh = world.vehicles[vid]
        occ.setdefault((veh.current_edge_id, veh.lane), []).append((veh.pos, vid))
    for lst in occ.values():
        lst.sort()
    return occ


def _ahead_on_lane(occ, edge_id, lane, pos, vid):
    """Nearest (pos, id) strictly ahead of (pos, vid) on the given lane."""
    lst = occ.get((edge_id, lane))
    if not lst:
        return None
    key = (pos, vid)
    for entry in lst:
        if entry > key:
            return entry
    return None


def _first_on_lane(occ, edge_id, lane):
    lst = occ.get((edge_id, lane))
    return lst[0] if lst else None


def _last_on_lane(occ, edge_id, lane):
    lst = occ.get((edge_id, lane))
    return lst[-1] if lst else None


def resolve_leader(world, veh: VehicleState, occ, dt: float,
                   lane: Optional[int] = None) -> Optional[LaneNeighbour]:
    """Nearest constraint ahead on the given lane, looking across route edges.

    The search follows the vehicle's own route, mapping the lane index down
    where downstream edges have fewer lanes, and stops beyond
    LEADER_LOOKAHEAD_M. Cross-node gaps are clamped at zero: a downstream
    vehicle's rear may poke back through the node from another feeder, which
    blocks entry but is not a same-lane overlap.

    Approaching a merge node, a conflicting entrant from another feeder (or
    another lane, where lanes drop) that has priority appears as a virtual
    stopped leader just before the node, so only one stream enters per step.
    """
    net = world.network
    lane = veh.lane if lane is None else lane
    edge = net.edges[veh.current_edge_id]

    found = _ahead_on_lane(occ, edge.id, lane, veh.pos, veh.id)
    if found is not None:
        lead = world.vehicles[found[1]]
        return LaneNeighbour(lead.speed, found[0] - lead.vclass.length - veh.pos,
                             lead.vclass)

    best: Optional[LaneNeighbour] = None
    dist = edge.length - veh.pos
    idx = veh.route_index + 1
    route = veh.route.edge_ids
    if idx < len(route):
        rival_gap = _merge_rival_gap(world, veh, occ, route[idx], lane, dist, dt)
        if rival_gap is not None:
            best = LaneNeighbour(0.0, rival_gap, veh.vclass)
    while idx < len(route) and dist <= LEADER_LOOKAHEAD_M:
        nxt = net.edges[route[idx]]
        lane = min(lane, nxt.lane_count - 1)
        found = _first_on_lane(occ, nxt.id, lane)
        if found is not None:
            lead = world.vehicles[found[1]]
            gap = max(0.0, dist + found[0] - lead.vclass.length)
            if best is None or gap < best.gap:
                best = LaneNeighbour(lead.speed, gap, lead.vclass)
            break
        dist += nxt.length
        idx += 1
    return best


def _merge_rival_gap(world, veh, occ, next_edge_id: str, lane: int,
                     dist_to_node: float, dt: float) -> Optional[float]:
    """Yield distance when another entrant with priority converges on next_edge.

    Priority is (distance to node, vehicle id) ascending; a lower-priority
    vehicle holds back its own min_gap short of the node. Only the nearest
    vehicle per feeder lane can enter within one step, so only those are
    scanned.
    """
    net = world.network
    next_edge = net.edges[next_edge_id]
    entry_lane = min(lane, next_edge.lane_count - 1)
    my_key = (dist_to_node, veh.id)
    for feeder in net.edges.values():
        if feeder.to_node != next_edge.from_node:
            continue
        for feeder_lane in range(feeder.lane_count):
            if feeder.id == veh.current_edge_id and feeder_lane == lane:
                continue
            top = _last_on_lane(occ, feeder.id, feeder_lane)
            if top is None:
                continue
            rival = world.vehicles[top[1]]
            nxt_idx = rival.route_index + 1
            if nxt_idx >= len(rival.route.edge_ids):
                continue  # arrives at the node, never enters next_edge
            if rival.route.edge_ids[nxt_idx] != next_edge_id:
                continue
            if min(rival.lane, next_edge.lane_count - 1) != entry_lane:
                continue
            rival_dist = feeder.length - rival.pos
            reach = (rival.speed + rival.vclass.max_accel * dt) * dt
            if rival_dist <= reach and (rival_dist, rival.id) < my_key:
                return max(0.0, dist_to_node - veh.vclass.min_gap)
    return None


def _adjacent_context(world, veh: VehicleState, occ, lane: int, dt: float) -> AdjacentLane:
    front = resolve_leader(world, veh, occ, dt, lane=lane)
    rear_entry = None
    lst = occ.get((veh.current_edge_id, lane))
    if lst:
        key = (veh.pos, veh.id)
        for entry in reversed(lst):
            if entry < key:
                rear_entry = entry
                break
    rear = None
    if rear_entry is not None:
        rv = world.vehicles[rear_entry[1]]
        rear = LaneNeighbour(rv.speed, veh.pos - veh.vclass.length - rv.pos,
                             rv.vclass)
    return AdjacentLane(front, rear)


# --- per-step operations ------------------------------------------------------


def spawn_step(world, t: float) -> list[int]:
    """Insert every due demand entry whose entry lane offers a safe gap.

    Entries are placed at pos 0 of their route's first edge with initial speed
    min(edge limit, class max); lanes are tried in ascending index order.
    Blocked insertions are deferred to a later step, never dropped.
    """
    inserted = []
    occ = build_occupancy(world)
    still_pending = []
    for entry in world.pending:
        if entry.depart > t:
            still_pending.append(entry)
            continue
        route = world.route_for(entry.origin, entry.destination)
        cls = VEHICLE_CLASSES[entry.class_name]
        first_edge = world.network.edges[route.edge_ids[0]]
        lane_found = None
        for lane in range(first_edge.lane_count):
            ahead = _first_on_lane(occ, first_edge.id, lane)
            if ahead is not None:
                lead = world.vehicles[ahead[1]]
                if ahead[0] < cls.min_gap + lead.vclass.length:
                    continue
            if not _entry_rear_clear(world, occ, first_edge, lane, cls):
                continue
            lane_found = lane
            break
        if lane_found is None:
            still_pending.append(entry)
            continue
        veh = VehicleState(
            id=entry.id,
            vclass=cls,
            route=route,
            lane=lane_found,
            pos=0.0,
            speed=min(first_edge.speed_limit, cls.max_speed),
            depart_time=t,
        )
        world.vehicles[veh.id] = veh
        world.inserted_count += 1
        occ.setdefault((first_edge.id, lane_found), []).insert(0, (0.0, veh.id))
        inserted.append(veh.id)
    world.pending = still_pending
    return inserted


def _entry_rear_clear(world, occ, first_edge, lane, cls) -> bool:
    """A vehicle inserted at pos 0 must not overlap traffic on feeding edges."""
    for edge in world.network.edges.values():
        if edge.to_node != first_edge.from_node:
            continue
        for feeder_lane in range(edge.lane_count):
            tail = _last_on_lane(occ, edge.id, feeder_lane)
            if tail is not None and edge.length - tail[0] < cls.length + cls.min_gap:
                return False
    return True


def advance_world(world, dt: float) -> None:
    """Advance all vehicles by one synchronous step of dt seconds.

    Per vehicle in ascending id order: lane-change decision, safe-speed
    update, position integration with edge transitions and arrival handling.
    Kinematic inputs come from the pre-step snapshot; lane changes are applied
    sequentially to honour mutual exclusion on the target lane.
    """
    net = world.network
    vehicles = world.vehicles
    order = sorted(vehicles)
    occ = build_occupancy(world)

    # lane changes first, in id order, applied immediately to the occupancy
    for vid in order:
        veh = vehicles[vid]
        if veh.mode is Mode.BROKEN_DOWN:
            continue
        edge = net.edges[veh.current_edge_id]
        if edge.lane_count < 2:
            continue
        leader = resolve_leader(world, veh, occ, dt)
        if leader is None:
            continue
        for target in (veh.lane - 1, veh.lane + 1):
            if not 0 <= target < edge.lane_count:
                continue
            ctx = _adjacent_context(world, veh, occ, target, dt)
            if lane_change_decide(veh, leader, ctx, dt,
                                  speed_limit=edge.speed_limit):
                occ[(edge.id, veh.lane)].remove((veh.pos, vid))
                veh.lane = target
                lst = occ.setdefault((edge.id, target), [])
                lst.append((veh.pos, vid))
                lst.sort()
                break

    # synchronous speed update from the (post-lane-change) snapshot
    new_speeds: dict[int, float] = {}
    for vid in order:
        veh = vehicles[vid]
        if veh.mode is Mode.BROKEN_DOWN:
            new_speeds[vid] = 0.0
            continue
        leader = resolve_leader(world, veh, occ, dt)
        edge = net.edges[veh.current_edge_id]
        if leader is None:
            new_speeds[vid] = krauss_step(
                veh, None, None, dt, world.rng_krauss,
                speed_limit=edge.speed_limit,
                caution_factor=world.caution_factor,
            )
        else:
            new_speeds[vid] = krauss_step(
                veh, leader.speed, leader.gap, dt, world.rng_krauss,
                speed_limit=edge.speed_limit,
                caution_factor=world.caution_factor,
            )

    # position integration and transitions
    arrived_now = []
    world.last_moves = {}
    for vid in order:
        veh = vehicles[vid]
        v_new = new_speeds[vid]
        base = world.step_base_speed.get(vid, veh.speed)
        veh.accel = (v_new - base) / dt
        veh.speed = v_new

        dist = v_new * dt
        segments = []
        pos = veh.pos
        while True:
            edge = net.edges[veh.current_edge_id]
            new_pos = pos + dist
            if new_pos < edge.length:
                segments.append((edge.id, pos, new_pos))
                veh.pos = new_pos
                break
            segments.append((edge.id, pos, edge.length))
            dist = new_pos - edge.length
            if veh.route_index == len(veh.route.edge_ids) - 1:
                veh.arrive_time = world.time + dt
                arrived_now.append(vid)
                veh.pos = edge.length
                break
            veh.route_index += 1
            nxt = net.edges[veh.current_edge_id]
            veh.lane = min(veh.lane, nxt.lane_count - 1)
            pos = 0.0
            if dist == 0.0:
                veh.pos = 0.0
                break
        world.last_moves[vid] = segments

    world.last_arrivals = arrived_now
    for vid in arrived_now:
        world.arrived[vid] = vehicles.pop(vid)
