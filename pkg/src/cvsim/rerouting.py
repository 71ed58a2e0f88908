"""Proactive rerouting on breakdown warnings.

A warned vehicle applies a travel-time override for the breakdown edge to its
private network view and recomputes the cheapest route from the downstream
node of its current edge to its original destination. With no usable
alternative it continues under a reduced speed cap (caution) until it passes
the breakdown site or the breakdown is resolved.
"""

from __future__ import annotations

from dataclasses import dataclass

from .network import BLOCKED, RoadNetwork, Route, shortest_path
from .traffic import Mode, VehicleState

ROUTE_CHANGED = "route_changed"
ROUTE_KEPT = "route_kept"
CAUTION_ENGAGED = "caution_engaged"


@dataclass(frozen=True)
class ReroutingConfig:
    enabled: bool = False
    #: travel time (s) assigned to the breakdown edge, or BLOCKED
    override: float = BLOCKED
    caution_factor: float = 0.5

    def __post_init__(self):
        if self.override < 0:
            raise ValueError("rerouting override must be >= 0 (or blocked)")
        if not 0 < self.caution_factor <= 1:
            raise ValueError("caution factor must be in (0, 1]")


def handle_warning(vehicle: VehicleState, warning, network: RoadNetwork,
                   config: ReroutingConfig) -> str:
    """React to one (deduplicated) breakdown warning.

    Returns ROUTE_KEPT when the breakdown cannot affect the vehicle,
    ROUTE_CHANGED when a finite-cost detour avoiding the breakdown edge was
    adopted, and CAUTION_ENGAGED when the vehicle stays committed to passing
    the breakdown site.
    """
    bd_edge = warning.payload["edge"]
    bd_pos = warning.payload["pos"]
    remaining = vehicle.remaining_edges()
    if bd_edge not in remaining:
        return ROUTE_KEPT
    if bd_edge == vehicle.current_edge_id:
        if vehicle.pos >= bd_pos:
            return ROUTE_KEPT  # already past the site, nothing to detour
        caution_mode(vehicle, (bd_edge, bd_pos), config)
        return CAUTION_ENGAGED

    vehicle.view_overrides[bd_edge] = config.override
    current = network.edges[vehicle.current_edge_id]
    replacement = shortest_path(network, current.to_node,
                                vehicle.route.destination,
                                overrides=vehicle.view_overrides)
    if (replacement is None or bd_edge in replacement.edge_ids
            or replacement.edge_ids == remaining[1:]):
        caution_mode(vehicle, (bd_edge, bd_pos), config)
        return CAUTION_ENGAGED

    vehicle.route = Route(
        vehicle.route.edge_ids[: vehicle.route_index + 1] + replacement.edge_ids,
        vehicle.route.origin,
        vehicle.route.destination,
    )
    vehicle.rerouted = True
    if vehicle.mode is Mode.CAUTION:
        vehicle.mode = Mode.NORMAL
        vehicle.caution_site = None
    return ROUTE_CHANGED


def caution_mode(vehicle: VehicleState, site: tuple[str, float],
                 config: ReroutingConfig) -> None:
    """Reduce the desired-speed cap until the vehicle clears the breakdown site."""
    if vehicle.mode is Mode.NORMAL:
        vehicle.mode = Mode.CAUTION
    vehicle.caution_site = site


def handle_resolved(vehicle: VehicleState, message, network: RoadNetwork) -> None:
    """Clearance notice: drop the override; a cautious vehicle resumes normally.

    Vehicles keep whatever route they are on - no automatic switch back.
    """
    edge = message.payload["edge"]
    vehicle.view_overrides.pop(edge, None)
    if vehicle.mode is Mode.CAUTION and vehicle.caution_site is not None \
            and vehicle.caution_site[0] == edge:
        vehicle.mode = Mode.NORMAL
        vehicle.caution_site = None


def release_passed_caution(vehicle: VehicleState) -> None:
    """Spatial caution release: past the breakdown position, or past its edge."""
    if vehicle.mode is not Mode.CAUTION or vehicle.caution_site is None:
        return
    edge, pos = vehicle.caution_site
    if vehicle.current_edge_id == edge:
        if vehicle.pos > pos:
            vehicle.mode = Mode.NORMAL
            vehicle.caution_site = None
    elif edge not in vehicle.remaining_edges():
        vehicle.mode = Mode.NORMAL
        vehicle.caution_site = None
