"""Directed road graph with travel-time weights, overrides and deterministic routing.

Edge weights are free-flow traversal times (length / speed limit) unless an
override is present. Overrides model incident-updated travel times; the
sentinel ``BLOCKED`` (+inf) removes an edge from routing consideration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Iterable, Mapping, Optional

#: Override value that makes an edge unusable for routing.
BLOCKED = math.inf


class NetworkError(ValueError):
    """Malformed network definition (bad record, dangling reference, ...)."""


class UnknownNodeError(KeyError):
    """Routing query references a node id that is not in the network."""


class UnknownEdgeError(KeyError):
    """Operation references an edge id that is not in the network."""


@dataclass(frozen=True)
class Node:
    id: str
    x: float
    y: float


@dataclass(frozen=True)
class Edge:
    id: str
    from_node: str
    to_node: str
    length: float  # m
    speed_limit: float  # m/s
    lane_count: int = 1


@dataclass(frozen=True)
class Route:
    """Connected sequence of edge ids from origin node to destination node."""

    edge_ids: tuple[str, ...]
    origin: str
    destination: str

    def __len__(self) -> int:
        return len(self.edge_ids)


class RoadNetwork:
    """Validated directed graph of nodes and edges plus runtime overrides.

    Immutable after construction except for ``overrides``, which maps edge id
    to an updated travel time in seconds (or ``BLOCKED``). The simulation
    engine only mutates overrides between steps; rerouting works on private
    per-vehicle override maps passed explicitly to the query functions.
    """

    def __init__(self, nodes: dict[str, Node], edges: dict[str, Edge]):
        self.nodes = nodes
        self.edges = edges
        self.adjacency: dict[str, list[str]] = {nid: [] for nid in nodes}
        for edge in edges.values():
            self.adjacency[edge.from_node].append(edge.id)
        for out in self.adjacency.values():
            out.sort()
        self.overrides: dict[str, float] = {}

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(node_id) from None

    def edge(self, edge_id: str) -> Edge:
        try:
            return self.edges[edge_id]
        except KeyError:
            raise UnknownEdgeError(edge_id) from None

    def out_edges(self, node_id: str) -> list[str]:
        if node_id not in self.adjacency:
            raise UnknownNodeError(node_id)
        return self.adjacency[node_id]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RoadNetwork)
            and self.nodes == other.nodes
            and self.edges == other.edges
        )


def build_network(node_records: Iterable, edge_records: Iterable) -> RoadNetwork:
    """Build and validate a network from (id, x, y) and (id, from, to, length, limit, lanes) records."""
    nodes: dict[str, Node] = {}
    for rec in node_records:
        nid, x, y = rec
        nid = str(nid)
        if nid in nodes:
            raise NetworkError(f"duplicate node id {nid!r}")
        x, y = float(x), float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise NetworkError(f"non-finite coordinates for node {nid!r}")
        nodes[nid] = Node(nid, x, y)

    edges: dict[str, Edge] = {}
    for rec in edge_records:
        eid, frm, to, length, limit, lanes = rec
        eid, frm, to = str(eid), str(frm), str(to)
        if eid in edges:
            raise NetworkError(f"duplicate edge id {eid!r}")
        for endpoint in (frm, to):
            if endpoint not in nodes:
                raise NetworkError(f"edge {eid!r}: dangling endpoint {endpoint}")
        if frm == to:
            raise NetworkError(f"edge {eid!r}: self loop at {frm}")
        length, limit, lanes = float(length), float(limit), int(lanes)
        if length <= 0:
            raise NetworkError(f"edge {eid!r}: nonpositive length {length}")
        if limit <= 0:
            raise NetworkError(f"edge {eid!r}: nonpositive speed limit {limit}")
        if lanes < 1:
            raise NetworkError(f"edge {eid!r}: lane count must be >= 1")
        edges[eid] = Edge(eid, frm, to, length, limit, lanes)

    return RoadNetwork(nodes, edges)


def effective_travel_time(
    network: RoadNetwork,
    edge_id: str,
    overrides: Optional[Mapping[str, float]] = None,
) -> float:
    """Current routing weight of an edge: override if set (>= 0), else free-flow time.

    ``BLOCKED`` (+inf) overrides are returned as-is and keep the edge out of
    any shortest path. Negative override values are ignored (treated as unset).
    """
    edge = network.edge(edge_id)
    ov = network.overrides if overrides is None else overrides
    value = ov.get(edge_id)
    if value is not None and value >= 0:
        return value
    return edge.length / edge.speed_limit


def route_is_connected(network: RoadNetwork, route: Route) -> bool:
    """Check the route invariant: nonempty, consecutive edges chained, endpoints match."""
    if not route.edge_ids:
        return False
    edges = [network.edge(eid) for eid in route.edge_ids]
    if edges[0].from_node != route.origin or edges[-1].to_node != route.destination:
        return False
    return all(a.to_node == b.from_node for a, b in zip(edges, edges[1:]))


def shortest_path(
    network: RoadNetwork,
    from_node: str,
    to_node: str,
    overrides: Optional[Mapping[str, float]] = None,
) -> Optional[Route]:
    """Minimum effective-travel-time route between two nodes, or None when unreachable.

    Ties on cost are broken by the lexicographically smallest edge-id sequence,
    which makes the result a pure function of (network, overrides, query).
    Edges with infinite weight are never expanded, so a returned route cannot
    traverse a blocked edge. Unknown nodes raise (distinct from no-path).
    """
    network.node(from_node)
    network.node(to_node)
    if from_node == to_node:
        return None

    # Heap keys (cost, edge-id sequence) are extended monotonically along
    # edges, so the first settlement of a node carries its optimal key.
    heap: list[tuple[float, tuple[str, ...], str]] = [(0.0, (), from_node)]
    settled: set[str] = set()
    while heap:
        cost, path, node = heappop(heap)
        if node in settled:
            continue
        settled.add(node)
        if node == to_node:
            return Route(path, from_node, to_node)
        for eid in network.adjacency[node]:
            edge = network.edges[eid]
            if edge.to_node in settled:
                continue
            weight = effective_travel_time(network, eid, overrides)
            if math.isinf(weight):
                continue
            heappush(heap, (cost + weight, path + (eid,), edge.to_node))
    return None


def route_cost(
    network: RoadNetwork,
    route: Route,
    overrides: Optional[Mapping[str, float]] = None,
) -> float:
    return sum(effective_travel_time(network, eid, overrides) for eid in route.edge_ids)


# --- plain-text network file format -----------------------------------------
#
#   NODE <id> <x> <y>
#   EDGE <id> <from> <to> <length_m> <speed_limit_mps> <lanes>
#
# '#' starts a comment; blank lines are ignored.


def parse_network(text: str) -> RoadNetwork:
    node_records = []
    edge_records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        kind = fields[0].upper()
        try:
            if kind == "NODE":
                if len(fields) != 4:
                    raise NetworkError("expected NODE <id> <x> <y>")
                node_records.append((fields[1], float(fields[2]), float(fields[3])))
            elif kind == "EDGE":
                if len(fields) != 7:
                    raise NetworkError(
                        "expected EDGE <id> <from> <to> <length_m> <speed_limit_mps> <lanes>"
                    )
                edge_records.append(
                    (
                        fields[1],
                        fields[2],
                        fields[3],
                        float(fields[4]),
                        float(fields[5]),
                        int(fields[6]),
                    )
                )
            else:
                raise NetworkError(f"unknown record type {fields[0]!r}")
        except ValueError as exc:
            raise NetworkError(f"line {lineno}: {exc}") from None
    return build_network(node_records, edge_records)


def serialize_network(network: RoadNetwork) -> str:
    """Render a network back to the plain-text format (exact float round-trip)."""
    lines = []
    for node in network.nodes.values():
        lines.append(f"NODE {node.id} {node.x!r} {node.y!r}")
    for edge in network.edges.values():
        lines.append(
            f"EDGE {edge.id} {edge.from_node} {edge.to_node} "
            f"{edge.length!r} {edge.speed_limit!r} {edge.lane_count}"
        )
    return "\n".join(lines) + "\n"


def load_network(path) -> RoadNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_network(fh.read())


def save_network(network: RoadNetwork, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_network(network))
