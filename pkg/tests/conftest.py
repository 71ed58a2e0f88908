import pytest

from cvsim.comms import CommConfig
from cvsim.engine import World
from cvsim.network import Route, build_network
from cvsim.rerouting import ReroutingConfig
from cvsim.scenario import DemandConfig, OutputConfig, ScenarioConfig
from cvsim.traffic import VEHICLE_CLASSES, VehicleState


def make_config(network="junction", *, dt=1.0, end_time=1000.0, seed=0,
                demand=None, breakdown=None, rerouting=None, comm=None,
                detectors=(), output=None, stall_threshold=300.0):
    return ScenarioConfig(
        network=network,
        dt=dt,
        end_time=end_time,
        seed=seed,
        stall_threshold=stall_threshold,
        demand=demand or DemandConfig(),
        comm=comm or CommConfig(),
        breakdown=breakdown,
        rerouting=rerouting or ReroutingConfig(),
        detectors=tuple(detectors),
        output=output or OutputConfig(),
    )


def make_world(network, *, v2x=False, seed=0, dt=1.0, end_time=1000.0,
               breakdown=None, rerouting=None, comm=None, detectors=()):
    rerouting = rerouting or ReroutingConfig(enabled=v2x)
    config = make_config(dt=dt, end_time=end_time, seed=seed,
                         breakdown=breakdown, rerouting=rerouting, comm=comm,
                         detectors=detectors)
    return World(config, network=network)


def add_vehicle(world, vid, edge_ids, *, pos=0.0, lane=0, speed=0.0,
                cls="PASSENGER", route_index=0, depart=0.0):
    net = world.network
    origin = net.edges[edge_ids[0]].from_node
    destination = net.edges[edge_ids[-1]].to_node
    veh = VehicleState(
        id=vid,
        vclass=VEHICLE_CLASSES[cls],
        route=Route(tuple(edge_ids), origin, destination),
        route_index=route_index,
        lane=lane,
        pos=pos,
        speed=speed,
        depart_time=depart,
    )
    world.register_vehicle(veh)
    world.inserted_count += 1
    return veh


@pytest.fixture
def straight_net():
    """One long straight edge, handy for placing vehicles directly."""
    return build_network(
        [("A", 0.0, 0.0), ("B", 5000.0, 0.0)],
        [("AB", "A", "B", 5000.0, 26.8224, 1)],
    )


@pytest.fixture
def two_lane_net():
    return build_network(
        [("A", 0.0, 0.0), ("B", 3000.0, 0.0)],
        [("AB", "A", "B", 3000.0, 26.8224, 2)],
    )


@pytest.fixture
def diamond_net():
    """A->B->D and A->C->D with weights 10+10 vs 15+10 seconds."""
    return build_network(
        [("A", 0.0, 0.0), ("B", 250.0, 100.0), ("C", 250.0, -100.0),
         ("D", 500.0, 0.0)],
        [
            ("AB", "A", "B", 250.0, 25.0, 1),  # 10 s
            ("AC", "A", "C", 375.0, 25.0, 1),  # 15 s
            ("BD", "B", "D", 250.0, 25.0, 1),  # 10 s
            ("CD", "C", "D", 250.0, 25.0, 1),  # 10 s
        ],
    )
