"""Built-in synthetic test networks.

Both are single-lane corridors at the 60 mph cap with one alternative path:

* ``junction``: the diversion node sits directly upstream of the breakdown
  edge, so warned vehicles can peel off onto a bypass around it.
* ``midlink``: the only diversion node lies far upstream of the breakdown
  edge, so vehicles already committed to the long approach cannot detour and
  the benefit of early warnings is structurally smaller.
"""

from __future__ import annotations

from .network import RoadNetwork, build_network
from .traffic import MAX_SPEED_MPS

V = MAX_SPEED_MPS


def build_junction() -> RoadNetwork:
    """Mainline with an off/on-ramp bypass around the junction edge.

    S -in- A -approach- B =jct= C -exit- D -out- E, with a longer bypass
    B -ramp_on- R -ramp_off- C available as the alternative route.
    """
    nodes = [
        ("S", 0.0, 0.0),
        ("A", 600.0, 0.0),
        ("B", 1200.0, 0.0),
        ("R", 1500.0, 350.0),
        ("C", 1800.0, 0.0),
        ("D", 2400.0, 0.0),
        ("E", 3000.0, 0.0),
    ]
    edges = [
        ("in", "S", "A", 600.0, V, 1),
        ("approach", "A", "B", 600.0, V, 1),
        ("jct", "B", "C", 600.0, V, 1),
        ("ramp_on", "B", "R", 700.0, V, 1),
        ("ramp_off", "R", "C", 700.0, V, 1),
        ("exit", "C", "D", 600.0, V, 1),
        ("out", "D", "E", 600.0, V, 1),
    ]
    return build_network(nodes, edges)


def build_midlink() -> RoadNetwork:
    """Long approach to a mid-corridor link; the only bypass leaves at A.

    S -in- A -approach- B -mid- C -out- D, with the alternative
    A -alt_out- Q -alt_in- C. Vehicles between A and B when a warning
    arrives have no way around a breakdown on ``mid``.
    """
    nodes = [
        ("S", 0.0, 0.0),
        ("A", 600.0, 0.0),
        ("B", 2400.0, 0.0),
        ("C", 2900.0, 0.0),
        ("Q", 1750.0, 500.0),
        ("D", 3500.0, 0.0),
    ]
    edges = [
        ("in", "S", "A", 600.0, V, 1),
        ("approach", "A", "B", 1800.0, V, 1),
        ("mid", "B", "C", 500.0, V, 1),
        ("alt_out", "A", "Q", 1300.0, V, 1),
        ("alt_in", "Q", "C", 1300.0, V, 1),
        ("out", "C", "D", 600.0, V, 1),
    ]
    return build_network(nodes, edges)


BUILTIN_NETWORKS = {
    "junction": build_junction,
    "midlink": build_midlink,
}
