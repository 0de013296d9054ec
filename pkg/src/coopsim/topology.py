"""Typed device/link graph used by the planner and the simulator."""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field


class DeviceKind(enum.Enum):
    PHONE = "phone"
    BASE_STATION = "base_station"
    WIFI_AP = "wifi_ap"


class LinkKind(enum.Enum):
    WIFI = "wifi"
    CELL = "cell"


class TopologyError(Exception):
    pass


class UnknownVertex(TopologyError, KeyError):
    def __init__(self, vertex_id):
        super().__init__(vertex_id)
        self.vertex_id = vertex_id

    def __str__(self):
        return f"unknown vertex {self.vertex_id!r}"


class UnknownLink(TopologyError, KeyError):
    def __init__(self, link_id):
        super().__init__(link_id)
        self.link_id = link_id

    def __str__(self):
        return f"unknown link {self.link_id!r}"


class DuplicateId(TopologyError):
    pass


class SelfLoop(TopologyError):
    pass


class ParameterOutOfRange(TopologyError, ValueError):
    def __init__(self, field_name: str, value, allowed: str):
        super().__init__(f"{field_name}={value!r} outside {allowed}")
        self.field = field_name
        self.value = value
        self.allowed = allowed


@dataclass
class Vertex:
    id: str
    kind: DeviceKind
    alive: bool = True


@dataclass(frozen=True)
class Link:
    id: str
    endpoints: tuple[str, str]
    kind: LinkKind
    rho_capacity: float
    rho_delay: float

    def other(self, vertex_id: str) -> str:
        a, b = self.endpoints
        if vertex_id == a:
            return b
        if vertex_id == b:
            return a
        raise UnknownVertex(vertex_id)


def check_rho(rho_capacity: float, rho_delay: float) -> None:
    """Raise ParameterOutOfRange unless 0 < rho_capacity <= 1 and 0 <= rho_delay <= 1."""
    # written as negated membership so NaN is rejected too
    if not (0.0 < rho_capacity <= 1.0):
        raise ParameterOutOfRange("rho_capacity", rho_capacity, "(0, 1]")
    if not (0.0 <= rho_delay <= 1.0):
        raise ParameterOutOfRange("rho_delay", rho_delay, "[0, 1]")


@dataclass
class DeviceGraph:
    """Undirected multigraph of devices.

    Vertices are never removed; churn flips ``Vertex.alive`` instead so
    ids stay stable across a simulation trace. Parallel links between the
    same pair are allowed.
    """

    vertices: dict[str, Vertex] = field(default_factory=dict)
    links: dict[str, Link] = field(default_factory=dict)
    _adjacency: dict[str, list[str]] = field(default_factory=dict, repr=False)

    def _fresh(self, prefix: str, taken) -> str:
        k = len(taken)
        while f"{prefix}{k}" in taken:
            k += 1
        return f"{prefix}{k}"

    def add_device(self, kind: DeviceKind, vertex_id: str | None = None) -> str:
        kind = DeviceKind(kind)
        if vertex_id is None:
            vertex_id = self._fresh("v", self.vertices)
        elif vertex_id in self.vertices:
            raise DuplicateId(f"vertex id {vertex_id!r} already in use")
        self.vertices[vertex_id] = Vertex(vertex_id, kind)
        self._adjacency[vertex_id] = []
        return vertex_id

    def add_link(
        self,
        a: str,
        b: str,
        kind: LinkKind,
        rho_capacity: float,
        rho_delay: float,
        link_id: str | None = None,
    ) -> str:
        for v in (a, b):
            if v not in self.vertices:
                raise UnknownVertex(v)
        if a == b:
            raise SelfLoop(f"link endpoints must differ, got {a!r} twice")
        check_rho(rho_capacity, rho_delay)
        if link_id is None:
            link_id = self._fresh("e", self.links)
        elif link_id in self.links:
            raise DuplicateId(f"link id {link_id!r} already in use")
        link = Link(link_id, (a, b), LinkKind(kind), float(rho_capacity), float(rho_delay))
        self.links[link_id] = link
        self._adjacency[a].append(link_id)
        self._adjacency[b].append(link_id)
        return link_id

    def vertex(self, vertex_id: str) -> Vertex:
        try:
            return self.vertices[vertex_id]
        except KeyError:
            raise UnknownVertex(vertex_id) from None

    def link(self, link_id: str) -> Link:
        try:
            return self.links[link_id]
        except KeyError:
            raise UnknownLink(link_id) from None

    def set_alive(self, vertex_id: str, alive: bool) -> None:
        self.vertex(vertex_id).alive = bool(alive)

    def degree(self, vertex_id: str) -> int:
        self.vertex(vertex_id)
        return len(self._adjacency[vertex_id])

    def incident_links(self, vertex_id: str) -> list[Link]:
        self.vertex(vertex_id)
        return [self.links[lid] for lid in self._adjacency[vertex_id]]

    def neighbors(self, vertex_id: str) -> list[tuple[str, str]]:
        """Alive vertices adjacent to ``vertex_id``, as ``(vertex_id, link_id)`` pairs.

        One entry per link, so a peer reachable over two parallel links
        appears twice.
        """
        out = []
        for link in self.incident_links(vertex_id):
            other = link.other(vertex_id)
            if self.vertices[other].alive:
                out.append((other, link.id))
        return out

    def link_alive(self, link: Link) -> bool:
        return all(self.vertices[v].alive for v in link.endpoints)

    def copy(self) -> "DeviceGraph":
        return copy.deepcopy(self)


def add_device(graph: DeviceGraph, kind: DeviceKind, vertex_id: str | None = None) -> str:
    return graph.add_device(kind, vertex_id)


def add_link(graph: DeviceGraph, a: str, b: str, kind: LinkKind,
             rho_capacity: float, rho_delay: float, link_id: str | None = None) -> str:
    return graph.add_link(a, b, kind, rho_capacity, rho_delay, link_id)


def neighbors(graph: DeviceGraph, vertex_id: str) -> list[tuple[str, str]]:
    return graph.neighbors(vertex_id)
