import math

import pytest

from cvsim.comms import BREAKDOWN_RESOLVED, BREAKDOWN_WARNING, V2xMessage
from cvsim.network import BLOCKED, Route, build_network, shortest_path
from cvsim.rerouting import (
    CAUTION_ENGAGED,
    ROUTE_CHANGED,
    ROUTE_KEPT,
    ReroutingConfig,
    handle_resolved,
    handle_warning,
    release_passed_caution,
)
from cvsim.traffic import PASSENGER, Mode, VehicleState

CFG = ReroutingConfig(enabled=True)


def warning(edge, pos, seq=0, origin=99):
    return V2xMessage(BREAKDOWN_WARNING, origin, seq, 0.0, (0.0, 0.0), 1,
                      payload={"edge": edge, "pos": pos, "breakdown_vehicle": origin})


def resolved(edge, seq=0, origin=99):
    return V2xMessage(BREAKDOWN_RESOLVED, origin, seq, 0.0, (0.0, 0.0), 1,
                      payload={"edge": edge, "pos": 0.0, "breakdown_vehicle": origin})


def vehicle_on(route_edges, net, index=0, pos=10.0):
    origin = net.edges[route_edges[0]].from_node
    dest = net.edges[route_edges[-1]].to_node
    return VehicleState(id=1, vclass=PASSENGER,
                        route=Route(tuple(route_edges), origin, dest),
                        route_index=index, pos=pos, speed=20.0)


@pytest.fixture
def diamond_with_bc():
    """Diamond plus a B->C link that opens an escape from B."""
    return build_network(
        [("A", 0, 0), ("B", 250, 100), ("C", 250, -100), ("D", 500, 0)],
        [
            ("AB", "A", "B", 250.0, 25.0, 1),
            ("AC", "A", "C", 375.0, 25.0, 1),
            ("BC", "B", "C", 125.0, 25.0, 1),  # 5 s
            ("BD", "B", "D", 250.0, 25.0, 1),
            ("CD", "C", "D", 250.0, 25.0, 1),
        ],
    )


class TestHandleWarning:
    def test_irrelevant_breakdown_keeps_route(self, diamond_net):
        veh = vehicle_on(["AB", "BD"], diamond_net)
        before = veh.route
        assert handle_warning(veh, warning("CD", 50.0), diamond_net, CFG) == ROUTE_KEPT
        assert veh.route == before
        assert not veh.rerouted and veh.mode is Mode.NORMAL

    def test_no_alternative_engages_caution(self, diamond_net):
        veh = vehicle_on(["AB", "BD"], diamond_net)
        result = handle_warning(veh, warning("BD", 50.0), diamond_net, CFG)
        assert result == CAUTION_ENGAGED
        assert veh.mode is Mode.CAUTION
        assert veh.route.edge_ids == ("AB", "BD")

    def test_escape_edge_reroutes(self, diamond_with_bc):
        veh = vehicle_on(["AB", "BD"], diamond_with_bc)
        result = handle_warning(veh, warning("BD", 50.0), diamond_with_bc, CFG)
        assert result == ROUTE_CHANGED
        assert veh.route.edge_ids == ("AB", "BC", "CD")
        assert veh.rerouted
        assert veh.route.destination == "D"  # destination never changes
        assert "BD" not in veh.route.edge_ids[veh.route_index:]

    def test_replacement_is_cheapest_under_override(self, diamond_with_bc):
        veh = vehicle_on(["AB", "BD"], diamond_with_bc)
        handle_warning(veh, warning("BD", 50.0), diamond_with_bc, CFG)
        # brute force over the two remaining B->D alternatives under the override
        best = shortest_path(diamond_with_bc, "B", "D",
                             overrides={"BD": BLOCKED})
        assert veh.route.edge_ids[1:] == best.edge_ids

    def test_already_past_breakdown_position(self, diamond_net):
        veh = vehicle_on(["BD"], diamond_net, index=0, pos=100.0)
        assert handle_warning(veh, warning("BD", 50.0), diamond_net, CFG) == ROUTE_KEPT
        assert veh.mode is Mode.NORMAL

    def test_behind_breakdown_on_same_edge_cautions(self, diamond_net):
        veh = vehicle_on(["BD"], diamond_net, index=0, pos=10.0)
        assert handle_warning(veh, warning("BD", 50.0), diamond_net, CFG) == CAUTION_ENGAGED

    def test_idempotent_per_key(self, diamond_with_bc):
        veh = vehicle_on(["AB", "BD"], diamond_with_bc)
        msg = warning("BD", 50.0)
        handle_warning(veh, msg, diamond_with_bc, CFG)
        snapshot = (veh.route, veh.rerouted, veh.mode, dict(veh.view_overrides))
        handle_warning(veh, msg, diamond_with_bc, CFG)
        assert snapshot == (veh.route, veh.rerouted, veh.mode,
                            dict(veh.view_overrides))

    def test_route_continuity_preserved(self, diamond_with_bc):
        veh = vehicle_on(["AB", "BD"], diamond_with_bc, index=0, pos=200.0)
        handle_warning(veh, warning("BD", 50.0), diamond_with_bc, CFG)
        edges = [diamond_with_bc.edges[e] for e in veh.route.edge_ids]
        assert all(a.to_node == b.from_node for a, b in zip(edges, edges[1:]))
        # replacement begins at the node the vehicle is driving toward
        assert edges[veh.route_index].id == "AB"
        assert edges[veh.route_index + 1].from_node == "B"

    def test_finite_override_can_keep_breakdown_edge(self, diamond_with_bc):
        cfg = ReroutingConfig(enabled=True, override=1.0)  # cheap repair
        veh = vehicle_on(["AB", "BD"], diamond_with_bc)
        # with a 1 s override the breakdown edge stays cheapest -> caution
        assert handle_warning(veh, warning("BD", 50.0), diamond_with_bc, cfg) \
            == CAUTION_ENGAGED
        assert veh.route.edge_ids == ("AB", "BD")


class TestCaution:
    def test_cap_multiplication(self):
        assert 26.8224 * 0.5 == pytest.approx(13.4112)

    def test_resolved_releases_caution(self, diamond_net):
        veh = vehicle_on(["AB", "BD"], diamond_net)
        handle_warning(veh, warning("BD", 50.0), diamond_net, CFG)
        assert veh.mode is Mode.CAUTION
        handle_resolved(veh, resolved("BD"), diamond_net)
        assert veh.mode is Mode.NORMAL
        assert veh.caution_site is None

    def test_spatial_release_after_passing(self, diamond_net):
        veh = vehicle_on(["AB", "BD"], diamond_net)
        handle_warning(veh, warning("BD", 50.0), diamond_net, CFG)
        veh.route_index = 1
        veh.pos = 51.0  # just past the site
        release_passed_caution(veh)
        assert veh.mode is Mode.NORMAL

    def test_not_released_before_site(self, diamond_net):
        veh = vehicle_on(["AB", "BD"], diamond_net)
        handle_warning(veh, warning("BD", 50.0), diamond_net, CFG)
        veh.route_index = 1
        veh.pos = 10.0
        release_passed_caution(veh)
        assert veh.mode is Mode.CAUTION


class TestResolved:
    def test_override_removed(self, diamond_net):
        veh = vehicle_on(["AB", "BD"], diamond_net)
        handle_warning(veh, warning("BD", 50.0), diamond_net, CFG)
        assert veh.view_overrides == {"BD": BLOCKED}
        handle_resolved(veh, resolved("BD"), diamond_net)
        assert veh.view_overrides == {}

    def test_noop_when_override_absent(self, diamond_net):
        veh = vehicle_on(["AB", "BD"], diamond_net)
        handle_resolved(veh, resolved("CD"), diamond_net)
        assert veh.view_overrides == {}
        assert veh.mode is Mode.NORMAL

    def test_rerouted_vehicle_keeps_new_route(self, diamond_with_bc):
        veh = vehicle_on(["AB", "BD"], diamond_with_bc)
        handle_warning(veh, warning("BD", 50.0), diamond_with_bc, CFG)
        new_route = veh.route
        handle_resolved(veh, resolved("BD"), diamond_with_bc)
        assert veh.route == new_route  # no automatic switch back


def test_config_validation():
    with pytest.raises(ValueError, match="override"):
        ReroutingConfig(enabled=True, override=-5.0)
    with pytest.raises(ValueError, match="caution"):
        ReroutingConfig(enabled=True, caution_factor=0.0)
    assert math.isinf(ReroutingConfig().override)
