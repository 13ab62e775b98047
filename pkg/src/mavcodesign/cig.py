"""Cyber-physical interaction graph and impact-path enumeration."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable


class NodeKind(str, Enum):
    SUBSYSTEM = "Subsystem"
    CYBER = "CyberQuantity"
    PHYSICAL = "PhysicalQuantity"
    METRIC = "MissionMetric"


class Cluster(str, Enum):
    PERFORMANCE = "Performance"
    MASS = "Mass"
    POWER = "Power"


PERFORMANCE_NODES = frozenset({"SA_Latency", "SA_Throughput"})


class GraphError(ValueError):
    pass


class CycleError(GraphError):
    def __init__(self, cycle: list[str]):
        self.cycle = cycle
        super().__init__("graph has a cycle: " + " -> ".join(cycle))


@dataclass(frozen=True)
class InteractionGraph:
    nodes: tuple[tuple[str, NodeKind], ...]
    edges: tuple[tuple[str, str], ...]
    _succ: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kinds: dict[str, NodeKind] = {}
        for node_id, kind in self.nodes:
            if node_id in kinds:
                raise GraphError(f"duplicate node id {node_id!r}")
            kinds[node_id] = NodeKind(kind)
        succ: dict[str, list[str]] = {n: [] for n in kinds}
        for src, dst in self.edges:
            for end in (src, dst):
                if end not in kinds:
                    raise GraphError(f"edge ({src!r}, {dst!r}) references unknown node {end!r}")
            if kinds[dst] is NodeKind.SUBSYSTEM:
                raise GraphError(f"edge ({src!r}, {dst!r}) terminates at a subsystem")
            succ[src].append(dst)
        object.__setattr__(self, "_succ", {n: tuple(sorted(v)) for n, v in succ.items()})

    @classmethod
    def from_lists(cls, nodes: Iterable, edges: Iterable) -> "InteractionGraph":
        return cls(
            nodes=tuple((n, NodeKind(k)) for n, k in nodes),
            edges=tuple((a, b) for a, b in edges),
        )

    def kind(self, node_id: str) -> NodeKind:
        for n, k in self.nodes:
            if n == node_id:
                return k
        raise GraphError(f"unknown node id {node_id!r}")

    def successors(self, node_id: str) -> tuple[str, ...]:
        return self._succ[node_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._succ

    def without_edge(self, src: str, dst: str) -> "InteractionGraph":
        return InteractionGraph(self.nodes, tuple(e for e in self.edges if e != (src, dst)))

    def with_edge(self, src: str, dst: str) -> "InteractionGraph":
        return InteractionGraph(self.nodes, self.edges + ((src, dst),))

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n, "kind": k.value} for n, k in self.nodes],
            "edges": [[a, b] for a, b in self.edges],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "InteractionGraph":
        try:
            nodes = [(n["id"], n["kind"]) for n in doc["nodes"]]
            edges = [tuple(e) for e in doc["edges"]]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph document: {exc}") from exc
        if any(len(e) != 2 for e in edges):
            raise GraphError("every edge must be a [from, to] pair")
        try:
            return cls.from_lists(nodes, edges)
        except ValueError as exc:
            raise GraphError(str(exc)) from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def load(cls, path: str | Path) -> "InteractionGraph":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class ImpactPath:
    nodes: tuple[str, ...]
    cluster: Cluster

    def __str__(self):
        return f"[{self.cluster.value}] " + " -> ".join(self.nodes)


def build_default_mav_graph() -> InteractionGraph:
    S, C, P, M = NodeKind.SUBSYSTEM, NodeKind.CYBER, NodeKind.PHYSICAL, NodeKind.METRIC
    nodes = [
        ("Compute", S),
        ("SA_Latency", C),
        ("SA_Throughput", C),
        ("ResponseTime", C),
        ("Mass", P),
        ("Power", P),
        ("Acceleration", P),
        ("Velocity", P),
        ("MissionTime", M),
        ("MissionEnergy", M),
    ]
    # Velocity->Power deliberately absent; see README.
    edges = [
        ("Compute", "SA_Latency"),
        ("Compute", "SA_Throughput"),
        ("Compute", "Mass"),
        ("Compute", "Power"),
        ("SA_Latency", "ResponseTime"),
        ("SA_Throughput", "ResponseTime"),
        ("ResponseTime", "Velocity"),
        ("Mass", "Acceleration"),
        ("Acceleration", "Velocity"),
        ("Mass", "Power"),
        ("Acceleration", "Power"),
        ("Velocity", "MissionTime"),
        ("MissionTime", "MissionEnergy"),
        ("Power", "MissionEnergy"),
    ]
    return InteractionGraph.from_lists(nodes, edges)


def find_cycle(g: InteractionGraph) -> list[str] | None:
    """Return one directed cycle as a closed node list, or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n, _ in g.nodes}
    for root, _ in g.nodes:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(g.successors(root)))]
        trail = [root]
        color[root] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = BLACK
                stack.pop()
                trail.pop()
            elif color[nxt] == GREY:
                return trail[trail.index(nxt):] + [nxt]
            elif color[nxt] == WHITE:
                color[nxt] = GREY
                stack.append((nxt, iter(g.successors(nxt))))
                trail.append(nxt)
    return None


def validate_acyclic(g: InteractionGraph) -> bool:
    # Kahn's algorithm
    indeg = {n: 0 for n, _ in g.nodes}
    for _, dst in g.edges:
        indeg[dst] += 1
    ready = [n for n, d in indeg.items() if d == 0]
    seen = 0
    while ready:
        n = ready.pop()
        seen += 1
        for m in g.successors(n):
            indeg[m] -= 1
            if indeg[m] == 0:
                ready.append(m)
    return seen == len(indeg)


def classify_cluster(path) -> Cluster:
    """Bin a path by its first quantity after the source subsystem.

    Accepts an ImpactPath or a bare node-id sequence.
    """
    nodes = tuple(path.nodes if isinstance(path, ImpactPath) else path)
    if len(nodes) < 2:
        raise GraphError("path needs at least two nodes")
    second = nodes[1]
    if second in PERFORMANCE_NODES:
        return Cluster.PERFORMANCE
    if second == "Mass":
        return Cluster.MASS
    if second == "Power":
        return Cluster.POWER
    raise GraphError(f"unclassifiable path: second node {second!r}")


def simple_paths(g: InteractionGraph, source: str, sinks: Iterable[str]) -> list[tuple[str, ...]]:
    """All simple paths from ``source`` to any of ``sinks``, sorted by node-id sequence."""
    sinks = frozenset(sinks)
    for n in (source, *sinks):
        if not g.has_node(n):
            raise GraphError(f"unknown node id {n!r}")
    cycle = find_cycle(g)
    if cycle is not None:
        raise CycleError(cycle)

    found: list[tuple[str, ...]] = []
    trail = [source]

    def walk():
        node = trail[-1]
        if node in sinks and len(trail) > 1:
            found.append(tuple(trail))
        for nxt in g.successors(node):
            trail.append(nxt)
            walk()
            trail.pop()

    walk()
    found.sort()
    return found


def enumerate_impact_paths(
    g: InteractionGraph, source: str, sinks: Iterable[str]
) -> list[ImpactPath]:
    return [ImpactPath(p, classify_cluster(p)) for p in simple_paths(g, source, sinks)]


def cluster_histogram(paths: Iterable[ImpactPath]) -> dict[Cluster, int]:
    hist = {c: 0 for c in Cluster}
    for p in paths:
        hist[p.cluster] += 1
    return hist
