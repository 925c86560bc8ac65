"""Free double covers given by Z/2 voltages on a base graph."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

from .graph_core import Edge, GraphError, MetricGraph, ValidationError, iter_isomorphisms, spanning_tree
from .morphisms import GraphMorphism, make_involution


class DifferentBase(GraphError):
    pass


class DisconnectedCover(GraphError):
    pass


SIGNS = ("+", "-")


def lift_vertex(v: str, sheet: int) -> str:
    return f"{v}{SIGNS[sheet]}"


def lift_edge(e: str, sheet: int) -> str:
    return f"{e}{SIGNS[sheet]}"


@dataclass(frozen=True)
class Voltage:
    base: MetricGraph
    assignment: Mapping[str, int]

    def __post_init__(self):
        missing = [e for e in self.base.edge_ids if e not in self.assignment]
        if missing:
            raise ValidationError(f"voltage missing edges: {missing}")
        extra = [e for e in self.assignment if not self.base.has_edge(e)]
        if extra:
            raise ValidationError(f"voltage on unknown edges: {extra}")
        for e, s in self.assignment.items():
            if s not in (0, 1):
                raise ValidationError(f"voltage of {e} must be 0 or 1")
        object.__setattr__(self, "assignment", dict(sorted(self.assignment.items())))

    def __getitem__(self, e: str) -> int:
        return self.assignment[e]

    def support(self) -> list[str]:
        return [e for e, s in self.assignment.items() if s]

    @classmethod
    def on_edges(cls, base: MetricGraph, crossing) -> Voltage:
        crossing = set(crossing)
        return cls(base, {e: int(e in crossing) for e in base.edge_ids})


@dataclass(frozen=True)
class DoubleCover:
    base: MetricGraph
    total: MetricGraph
    pi: GraphMorphism
    iota: GraphMorphism
    voltage: Voltage

    def is_connected(self) -> bool:
        return self.total.is_connected()

    def lifts(self, e: str) -> tuple[str, str]:
        return lift_edge(e, 0), lift_edge(e, 1)

    def to_dict(self) -> dict:
        d = self.base.to_dict()
        d["voltage"] = dict(self.voltage.assignment)
        return d


def derive_cover(G: MetricGraph, w: Voltage | Mapping[str, int]) -> DoubleCover:
    """Total graph with vertices v+, v- and edges e+ (from u+) and e- (from u-)."""
    if not isinstance(w, Voltage):
        w = Voltage(G, w)
    if w.base != G:
        raise DifferentBase("voltage is defined on another graph")
    verts = [lift_vertex(v, s) for v in G.vertices for s in (0, 1)]
    edges = []
    for e in G.edges:
        s = w[e.id]
        for sheet in (0, 1):
            edges.append(Edge(lift_edge(e.id, sheet), lift_vertex(e.src, sheet), lift_vertex(e.dst, sheet ^ s), e.length))
    total = MetricGraph(verts, edges)
    pi = GraphMorphism(
        total, G,
        {lift_vertex(v, s): v for v in G.vertices for s in (0, 1)},
        {lift_edge(e.id, s): e.id for e in G.edges for s in (0, 1)},
        {lift_edge(e.id, s): 1 for e in G.edges for s in (0, 1)},
        {lift_edge(e.id, s): 1 for e in G.edges for s in (0, 1)},
    )
    iota = make_involution(
        total,
        {lift_vertex(v, s): lift_vertex(v, 1 - s) for v in G.vertices for s in (0, 1)},
        {lift_edge(e.id, s): lift_edge(e.id, 1 - s) for e in G.edges for s in (0, 1)},
        {lift_edge(e.id, s): 1 for e in G.edges for s in (0, 1)},
    )
    return DoubleCover(G, total, pi, iota, w)


def gauge_flips(G: MetricGraph, assignment: Mapping[str, int], tree: list[str]) -> dict[str, int]:
    """Per-vertex sheet flips that make the voltage vanish on ``tree``."""
    root = G.vertices[0]
    flip = {root: 0}
    adj = {}
    for eid in tree:
        e = G.edge(eid)
        adj.setdefault(e.src, []).append((e.dst, eid))
        adj.setdefault(e.dst, []).append((e.src, eid))
    todo = [root]
    while todo:
        v = todo.pop()
        for x, eid in adj.get(v, []):
            if x not in flip:
                flip[x] = flip[v] ^ assignment[eid]
                todo.append(x)
    return flip


def gauge_normalize(G: MetricGraph, w: Voltage | Mapping[str, int], tree: list[str] | None = None) -> Voltage:
    """Gauge-equivalent voltage vanishing on the spanning tree."""
    assignment = w.assignment if isinstance(w, Voltage) else w
    tree = spanning_tree(G) if tree is None else tree
    flip = gauge_flips(G, assignment, tree)
    return Voltage(G, {e.id: assignment[e.id] ^ flip[e.src] ^ flip[e.dst] for e in G.edges})


def enumerate_covers(G: MetricGraph) -> list[tuple[Voltage, bool]]:
    """All 2^g tree-gauged voltage classes with their connectivity."""
    tree = set(spanning_tree(G))
    free = [e for e in G.edge_ids if e not in tree]
    out = []
    for bits in itertools.product((0, 1), repeat=len(free)):
        assignment = {e: 0 for e in G.edge_ids}
        assignment.update(zip(free, bits))
        w = Voltage(G, assignment)
        out.append((w, derive_cover(G, w).is_connected()))
    return out


def connected_covers(G: MetricGraph) -> list[DoubleCover]:
    return [derive_cover(G, w) for w, ok in enumerate_covers(G) if ok]


def covers_isomorphic(c1: DoubleCover, c2: DoubleCover) -> bool:
    if c1.base != c2.base:
        raise DifferentBase("covers over different base graphs")
    tree = spanning_tree(c1.base)
    return gauge_normalize(c1.base, c1.voltage, tree) == gauge_normalize(c2.base, c2.voltage, tree)


def cover_isomorphism_witness(c1: DoubleCover, c2: DoubleCover):
    """Search for an isomorphism of totals commuting with the projections."""
    if c1.base != c2.base:
        raise DifferentBase("covers over different base graphs")
    p1, p2 = c1.pi, c2.pi
    return next(
        iter_isomorphisms(
            c1.total, c2.total,
            vertex_ok=lambda v, w: p1.vertex_map[v] == p2.vertex_map[w],
            edge_ok=lambda e, f: p1.edge_map[e] == p2.edge_map[f],
        ),
        None,
    )


def cover_from_dict(data: Mapping) -> DoubleCover:
    if "base" in data:
        base = MetricGraph.from_dict(data["base"])
    else:
        base = MetricGraph.from_dict(data)
    if "voltage" not in data:
        raise ValidationError("cover is missing the 'voltage' field")
    raw = data["voltage"]
    if not isinstance(raw, Mapping):
        raise ValidationError("voltage must be an object")
    return derive_cover(base, Voltage(base, {str(k): int(v) for k, v in raw.items()}))
