"""Morphisms of loopless models, harmonicity and quotients by involutions."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph_core import Edge, GraphError, MetricGraph, UnionFind, fraction_str, subdivide


class NotAMorphism(GraphError):
    pass


class NotInvolution(GraphError):
    pass


@dataclass(frozen=True)
class GraphMorphism:
    """Vertex and edge maps with integer slopes.

    ``edge_map[e]`` is a target edge id, or None when ``e`` is contracted
    (its image vertex is then ``vertex_map[src]``).  ``orientation[e]`` is
    +1 when the reference orientations agree and -1 otherwise.
    """

    source: MetricGraph
    target: MetricGraph
    vertex_map: Mapping[str, str]
    edge_map: Mapping[str, str | None]
    slope: Mapping[str, int]
    orientation: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.orientation:
            object.__setattr__(self, "orientation", self._derive_orientation())
        self.validate()

    def _derive_orientation(self) -> dict[str, int]:
        out = {}
        for e in self.source.edges:
            f = self.edge_map.get(e.id)
            if f is None:
                continue
            t = self.target.edge(f)
            out[e.id] = 1 if self.vertex_map[e.src] == t.src else -1
        return out

    def validate(self) -> None:
        S, T = self.source, self.target
        tv = set(T.vertices)
        for v in S.vertices:
            if self.vertex_map.get(v) not in tv:
                raise NotAMorphism(f"vertex {v} not mapped into the target")
        for e in S.edges:
            if e.id not in self.edge_map:
                raise NotAMorphism(f"edge {e.id} not mapped")
            f = self.edge_map[e.id]
            mu = self.slope.get(e.id)
            a, b = self.vertex_map[e.src], self.vertex_map[e.dst]
            if f is None:
                if mu != 0 or a != b:
                    raise NotAMorphism(f"contracted edge {e.id} must have slope 0 and a single image vertex")
                continue
            t = T.edge(f)
            if not isinstance(mu, int) or mu < 1 or t.length != mu * e.length:
                raise NotAMorphism(f"edge {e.id}: length {t.length} != {mu} * {e.length}")
            sign = self.orientation.get(e.id)
            ends = (t.src, t.dst) if sign == 1 else (t.dst, t.src)
            if (a, b) != ends:
                raise NotAMorphism(f"edge {e.id}: endpoints do not match {f}")

    def contracted(self) -> frozenset[str]:
        return frozenset(e for e, f in self.edge_map.items() if f is None)

    def to_dict(self) -> dict:
        return {
            "vertex_map": dict(sorted(self.vertex_map.items())),
            "edge_map": {
                e: ({"contract": self.vertex_map[self.source.edge(e).src]} if f is None else f)
                for e, f in sorted(self.edge_map.items())
            },
            "slopes": dict(sorted(self.slope.items())),
        }


def identity_morphism(G: MetricGraph) -> GraphMorphism:
    return GraphMorphism(
        G, G, {v: v for v in G.vertices}, {e.id: e.id for e in G.edges},
        {e.id: 1 for e in G.edges}, {e.id: 1 for e in G.edges},
    )


def compose(outer: GraphMorphism, inner: GraphMorphism) -> GraphMorphism:
    """outer after inner."""
    if inner.target != outer.source:
        raise NotAMorphism("morphisms are not composable")
    vmap = {v: outer.vertex_map[w] for v, w in inner.vertex_map.items()}
    emap, slope, orient = {}, {}, {}
    for e, f in inner.edge_map.items():
        g = None if f is None else outer.edge_map[f]
        emap[e] = g
        if g is None:
            slope[e] = 0
        else:
            slope[e] = inner.slope[e] * outer.slope[f]
            orient[e] = inner.orientation[e] * outer.orientation[f]
    return GraphMorphism(inner.source, outer.target, vmap, emap, slope, orient)


def harmonic_degree(phi: GraphMorphism) -> int | None:
    """Degree of ``phi`` if it is harmonic, else None.

    Local multiplicities are summed per target half-edge so loops in the
    target are handled correctly.
    """
    S, T = phi.source, phi.target
    local: dict[str, dict[tuple[str, int], int]] = {v: defaultdict(int) for v in S.vertices}
    per_edge: dict[str, int] = {f.id: 0 for f in T.edges}
    for e in S.edges:
        f = phi.edge_map[e.id]
        if f is None:
            continue
        mu = phi.slope[e.id]
        per_edge[f] += mu
        sign = phi.orientation[e.id]
        local[e.src][(f, 0 if sign == 1 else 1)] += mu
        local[e.dst][(f, 1 if sign == 1 else 0)] += mu
    degrees = set(per_edge.values())
    if len(degrees) != 1:
        return None
    degree = degrees.pop()
    if degree <= 0:
        return None
    for x in S.vertices:
        y = phi.vertex_map[x]
        values = {local[x].get(h, 0) for h in T.half_edges(y)}
        if len(values) > 1:
            return None
    return degree


# ---------------------------------------------------------------------------
# involutions


def make_involution(G: MetricGraph, vertex_map: Mapping[str, str], edge_map: Mapping[str, str],
                    orientation: Mapping[str, int] | None = None) -> GraphMorphism:
    sigma = GraphMorphism(
        G, G, dict(vertex_map), dict(edge_map), {e.id: 1 for e in G.edges},
        dict(orientation) if orientation else {},
    )
    check_involution(sigma)
    return sigma


def check_involution(sigma: GraphMorphism) -> None:
    if sigma.source != sigma.target:
        raise NotInvolution("source and target differ")
    for v, w in sigma.vertex_map.items():
        if sigma.vertex_map[w] != v:
            raise NotInvolution(f"vertex {v} is not mapped back")
    for e, f in sigma.edge_map.items():
        if f is None or sigma.edge_map[f] != e:
            raise NotInvolution(f"edge {e} is not mapped back")
        if sigma.slope[e] != 1:
            raise NotInvolution("an involution preserves lengths")
        if sigma.orientation[e] != sigma.orientation[f]:
            raise NotInvolution(f"orientation of {e} inconsistent")


def is_identity(sigma: GraphMorphism) -> bool:
    return all(v == w for v, w in sigma.vertex_map.items()) and all(
        e == f and sigma.orientation[e] == 1 for e, f in sigma.edge_map.items()
    )


def reversed_edges(sigma: GraphMorphism) -> list[str]:
    return [e for e, f in sigma.edge_map.items() if f == e and sigma.orientation[e] == -1]


def split_reversed(G: MetricGraph, sigma: GraphMorphism, skip: Iterable[str] = ()) -> tuple[MetricGraph, GraphMorphism, dict[str, tuple[str, str]]]:
    """Subdivide every reversed edge (outside ``skip``) at its midpoint.

    Returns the refined graph, the induced involution (which reverses no
    refined edge) and a map from each split edge to its two halves.
    """
    skip = set(skip)
    todo = [e for e in reversed_edges(sigma) if e not in skip]
    H = G
    halves = {}
    for e in todo:
        H, _ = subdivide(H, e, [G.edge(e).length / 2])
        halves[e] = (f"{e}#0", f"{e}#1")
    if not todo:
        return G, sigma, halves
    vmap = dict(sigma.vertex_map)
    emap, orient = {}, {}
    for e in G.edges:
        if e.id in halves:
            h0, h1 = halves[e.id]
            vmap[H.edge(h0).dst] = H.edge(h0).dst
            emap[h0], emap[h1] = h1, h0
            orient[h0] = orient[h1] = -1
        else:
            f = sigma.edge_map[e.id]
            emap[e.id] = f
            orient[e.id] = sigma.orientation[e.id]
    return H, make_involution(H, vmap, emap, orient), halves


def quotient_by_involution(G: MetricGraph, sigma: GraphMorphism, contract: Iterable[str] = ()) -> tuple[MetricGraph, GraphMorphism]:
    """Quotient of ``G`` by ``sigma`` and its projection.

    Reversed edges are first split at their midpoints, unless they are
    listed in ``contract``; listed edges (a sigma-invariant set) are
    contracted in the quotient.  A fixed edge maps with slope 2 onto an
    edge of doubled length; an orbit pair maps onto one edge of equal
    length.  The projection's source is the refined graph.
    """
    check_involution(sigma)
    contract = frozenset(contract)
    for e in contract:
        if sigma.edge_map[e] not in contract:
            raise NotInvolution("contracted set is not invariant")
    H, s, _ = split_reversed(G, sigma, skip=contract)

    uf = UnionFind(H.vertices)
    for e in contract:
        x = H.edge(e)
        uf.union(x.src, x.dst)
    members = defaultdict(set)
    for v in H.vertices:
        members[uf.find(v)].add(v)
    orbit_of = {}
    for root, vs in members.items():
        image_root = uf.find(s.vertex_map[min(vs)])
        orbit = frozenset(members[root] | members[image_root])
        for v in orbit:
            orbit_of[v] = orbit

    def vname(orbit: frozenset[str]) -> str:
        return "|".join(sorted(orbit))

    qverts = {vname(o) for o in orbit_of.values()}
    vmap = {v: vname(orbit_of[v]) for v in H.vertices}

    qedges, emap, slope, orient = [], {}, {}, {}
    done = set()
    for e in H.edges:
        if e.id in contract:
            emap[e.id] = None
            slope[e.id] = 0
            continue
        if e.id in done:
            continue
        f = s.edge_map[e.id]
        if f == e.id:
            name = e.id
            qedges.append(Edge(name, vmap[e.src], vmap[e.dst], 2 * e.length))
            emap[e.id], slope[e.id], orient[e.id] = name, 2, 1
            done.add(e.id)
            continue
        name = "|".join(sorted((e.id, f)))
        qedges.append(Edge(name, vmap[e.src], vmap[e.dst], e.length))
        emap[e.id], slope[e.id], orient[e.id] = name, 1, 1
        emap[f], slope[f], orient[f] = name, 1, s.orientation[e.id]
        done.update((e.id, f))
    Q = MetricGraph(qverts, qedges)
    return Q, GraphMorphism(H, Q, vmap, emap, slope, orient)


def morphism_summary(phi: GraphMorphism) -> str:
    parts = []
    for e in phi.source.edges:
        f = phi.edge_map[e.id]
        if f is None:
            parts.append(f"{e.id}->*")
        else:
            parts.append(f"{e.id}->{f}x{phi.slope[e.id]}")
    return ", ".join(parts)


def lengths_str(G: MetricGraph) -> str:
    return " ".join(f"{e.id}:{fraction_str(e.length)}" for e in G.edges)
