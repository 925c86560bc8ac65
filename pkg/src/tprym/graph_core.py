"""Metric multigraphs with exact rational edge lengths.

A :class:`MetricGraph` is an immutable multigraph whose edges carry a
reference orientation ``src -> dst`` and a positive :class:`Fraction`
length.  Loops and parallel edges are allowed.  Everything downstream
(covers, involutions, lattices) is computed on such models.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping


class GraphError(Exception):
    """Base class for graph-level failures."""


class DisconnectedInput(GraphError):
    pass


class UnknownEdge(GraphError, KeyError):
    pass


class DegenerateGraph(GraphError):
    pass


class ValidationError(GraphError, ValueError):
    pass


def as_fraction(value) -> Fraction:
    """Parse an int, Fraction or a ``"p/q"`` string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"length must be rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"malformed rational {value!r}") from exc
    raise ValidationError(f"length must be an integer or 'p/q' string, got {value!r}")


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True, order=True)
class Edge:
    id: str
    src: str
    dst: str
    length: Fraction

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst

    def other(self, v: str) -> str:
        if v == self.src:
            return self.dst
        if v == self.dst:
            return self.src
        raise ValueError(f"{v} is not an endpoint of {self.id}")


class MetricGraph:
    """Immutable finite multigraph with positive rational lengths."""

    __slots__ = ("_vertices", "_edges", "_by_id", "_incident", "_hash")

    def __init__(self, vertices: Iterable[str], edges: Iterable[Edge | tuple]):
        verts = []
        seen = set()
        for v in vertices:
            if not isinstance(v, str):
                raise ValidationError(f"vertex ids must be strings, got {v!r}")
            if v not in seen:
                seen.add(v)
                verts.append(v)
        edge_list = []
        by_id = {}
        for item in edges:
            e = item if isinstance(item, Edge) else Edge(item[0], item[1], item[2], as_fraction(item[3]))
            if not isinstance(e.length, Fraction):
                e = Edge(e.id, e.src, e.dst, as_fraction(e.length))
            if e.length <= 0:
                raise ValidationError(f"edge {e.id} has nonpositive length {e.length}")
            if e.src not in seen or e.dst not in seen:
                raise ValidationError(f"edge {e.id} has a dangling endpoint")
            if e.id in by_id:
                raise ValidationError(f"duplicate edge id {e.id}")
            by_id[e.id] = e
            edge_list.append(e)
        incident = {v: [] for v in verts}
        for e in edge_list:
            incident[e.src].append(e)
            if not e.is_loop:
                incident[e.dst].append(e)
        self._vertices = tuple(sorted(verts))
        self._edges = tuple(sorted(edge_list, key=lambda e: e.id))
        self._by_id = by_id
        self._incident = {v: tuple(es) for v, es in incident.items()}
        self._hash = None

    # basic access

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self._edges)

    def edge(self, eid: str) -> Edge:
        try:
            return self._by_id[eid]
        except KeyError:
            raise UnknownEdge(eid) from None

    def has_edge(self, eid: str) -> bool:
        return eid in self._by_id

    def incident(self, v: str) -> tuple[Edge, ...]:
        """Edges touching ``v``; a loop is listed once."""
        return self._incident[v]

    def valency(self, v: str) -> int:
        return sum(2 if e.is_loop else 1 for e in self._incident[v])

    def half_edges(self, v: str) -> list[tuple[str, int]]:
        """Half-edges at ``v`` as (edge id, end) with end 0 = src, 1 = dst."""
        out = []
        for e in self._incident[v]:
            if e.src == v:
                out.append((e.id, 0))
            if e.dst == v:
                out.append((e.id, 1))
        return out

    def total_length(self) -> Fraction:
        return sum((e.length for e in self._edges), Fraction(0))

    # connectivity

    def components(self, removed: Iterable[str] = ()) -> list[frozenset[str]]:
        skip = set(removed)
        uf = UnionFind(self._vertices)
        for e in self._edges:
            if e.id not in skip:
                uf.union(e.src, e.dst)
        return uf.groups()

    def is_connected(self) -> bool:
        return len(self._vertices) > 0 and len(self.components()) == 1

    def subgraph(self, vertices: Iterable[str]) -> MetricGraph:
        keep = set(vertices)
        return MetricGraph(keep, [e for e in self._edges if e.src in keep and e.dst in keep])

    def component_graphs(self) -> list[MetricGraph]:
        return [self.subgraph(c) for c in sorted(self.components(), key=min)]

    def without_edges(self, removed: Iterable[str]) -> MetricGraph:
        skip = set(removed)
        return MetricGraph(self._vertices, [e for e in self._edges if e.id not in skip])

    def with_lengths(self, scale: Fraction) -> MetricGraph:
        return MetricGraph(self._vertices, [Edge(e.id, e.src, e.dst, e.length * scale) for e in self._edges])

    # identity

    def _key(self):
        return (self._vertices, self._edges)

    def __eq__(self, other):
        return isinstance(other, MetricGraph) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"MetricGraph(|V|={len(self._vertices)}, |E|={len(self._edges)})"

    # serialization

    def to_dict(self) -> dict:
        return {
            "vertices": list(self._vertices),
            "edges": [
                {"id": e.id, "src": e.src, "dst": e.dst, "length": fraction_str(e.length)}
                for e in self._edges
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> MetricGraph:
        if not isinstance(data, Mapping):
            raise ValidationError("graph must be a JSON object")
        for key in ("vertices", "edges"):
            if key not in data:
                raise ValidationError(f"missing field '{key}'")
        edges = []
        for i, rec in enumerate(data["edges"]):
            if not isinstance(rec, Mapping):
                raise ValidationError(f"edges[{i}] must be an object")
            for key in ("id", "src", "dst", "length"):
                if key not in rec:
                    raise ValidationError(f"edges[{i}] missing field '{key}'")
            try:
                length = as_fraction(rec["length"])
            except ValidationError as exc:
                raise ValidationError(f"edges[{i}].length: {exc}") from None
            edges.append(Edge(str(rec["id"]), str(rec["src"]), str(rec["dst"]), length))
        return cls([str(v) for v in data["vertices"]], edges)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def to_dot(self, edge_style: Mapping[str, str] | None = None) -> str:
        lines = ["graph G {"]
        for v in self._vertices:
            lines.append(f'  "{v}";')
        for e in self._edges:
            style = (edge_style or {}).get(e.id, "")
            attrs = f'label="{e.id}: {fraction_str(e.length)}"' + (f", {style}" if style else "")
            lines.append(f'  "{e.src}" -- "{e.dst}" [{attrs}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class UnionFind:
    def __init__(self, items: Iterable = ()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True

    def groups(self) -> list[frozenset]:
        out = defaultdict(set)
        for x in self.parent:
            out[self.find(x)].add(x)
        return [frozenset(g) for g in out.values()]


# ---------------------------------------------------------------------------
# invariants and connectivity


def genus(G: MetricGraph) -> int:
    if not G.is_connected():
        raise DisconnectedInput("genus is defined for connected graphs; split components first")
    return len(G.edges) - len(G.vertices) + 1


def bridges(G: MetricGraph) -> frozenset[str]:
    """Edges whose removal increases the number of components (lowlink DFS)."""
    index = {}
    low = {}
    found = set()
    counter = 0
    for root in G.vertices:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack = [(root, None, iter(G.incident(root)))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for e in it:
                if e.id == via or e.is_loop:
                    continue
                w = e.other(v)
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append((w, e.id, iter(G.incident(w))))
                    advanced = True
                    break
                low[v] = min(low[v], index[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[v])
                if low[v] > index[parent]:
                    found.add(via)
    return frozenset(found)


def is_two_edge_connected(G: MetricGraph) -> bool:
    return G.is_connected() and not bridges(G)


class EdgePairClass(Enum):
    BRIDGE = "Bridge"
    PROPERLY_DISCONNECTING = "ProperlyDisconnectingPair"
    NON_DISCONNECTING = "NonDisconnecting"


def pair_class(G: MetricGraph, e1: str, e2: str) -> EdgePairClass:
    G.edge(e1)
    G.edge(e2)
    if e1 == e2:
        raise ValueError("pair_class needs two distinct edges")
    base = len(G.components())
    if len(G.components([e1])) > base or len(G.components([e2])) > base:
        return EdgePairClass.BRIDGE
    if len(G.components([e1, e2])) > base:
        return EdgePairClass.PROPERLY_DISCONNECTING
    return EdgePairClass.NON_DISCONNECTING


def blocks(G: MetricGraph) -> list[frozenset[str]]:
    """Biconnected components as edge-id sets (a bridge is its own block).

    Loops form singleton blocks.
    """
    index = {}
    low = {}
    counter = 0
    out = []
    edge_stack = []
    for e in G.edges:
        if e.is_loop:
            out.append(frozenset([e.id]))
    for root in G.vertices:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack = [(root, None, iter(G.incident(root)))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for e in it:
                if e.id == via or e.is_loop:
                    continue
                w = e.other(v)
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    edge_stack.append(e.id)
                    stack.append((w, e.id, iter(G.incident(w))))
                    advanced = True
                    break
                if index[w] < index[v]:
                    edge_stack.append(e.id)
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[v])
                if low[v] >= index[parent]:
                    comp = []
                    while True:
                        eid = edge_stack.pop()
                        comp.append(eid)
                        if eid == via:
                            break
                    out.append(frozenset(comp))
    return sorted(out, key=min)


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True, order=True)
class PointOnGraph:
    edge: str
    offset: Fraction

    def __post_init__(self):
        if not isinstance(self.offset, Fraction):
            object.__setattr__(self, "offset", as_fraction(self.offset))


def check_point(G: MetricGraph, p: PointOnGraph) -> None:
    e = G.edge(p.edge)
    if not 0 <= p.offset <= e.length:
        raise ValueError(f"offset {p.offset} outside edge {p.edge}")


def point_vertex(G: MetricGraph, p: PointOnGraph) -> str | None:
    """The vertex at ``p`` if ``p`` is an endpoint, else None."""
    e = G.edge(p.edge)
    if p.offset == 0:
        return e.src
    if p.offset == e.length:
        return e.dst
    return None


def vertex_point(G: MetricGraph, v: str) -> PointOnGraph:
    """Canonical representative of a vertex: least incident (edge, end offset)."""
    best = None
    for e in G.incident(v):
        for off, end in ((Fraction(0), e.src), (e.length, e.dst)):
            if end == v:
                cand = PointOnGraph(e.id, off)
                if best is None or cand < best:
                    best = cand
    if best is None:
        raise DegenerateGraph(f"isolated vertex {v} has no point representative")
    return best


def canonical_point(G: MetricGraph, p: PointOnGraph) -> PointOnGraph:
    v = point_vertex(G, p)
    return p if v is None else vertex_point(G, v)


def midpoint(G: MetricGraph, eid: str) -> PointOnGraph:
    return PointOnGraph(eid, G.edge(eid).length / 2)


# ---------------------------------------------------------------------------
# model changes


def subdivide(G: MetricGraph, eid: str, offsets: Iterable[Fraction]) -> tuple[MetricGraph, Callable[[PointOnGraph], PointOnGraph]]:
    """Insert vertices on ``eid`` at the given interior offsets.

    Returns the refined graph and a map carrying points of ``G`` to points of
    the refined graph.  Pieces are named ``eid#0, eid#1, ...`` and new
    vertices ``eid@offset``.
    """
    e = G.edge(eid)
    cuts = sorted(set(as_fraction(t) for t in offsets))
    if any(not 0 < t < e.length for t in cuts):
        raise ValueError("subdivision offsets must be interior")
    if not cuts:
        return G, lambda p: p
    names = [f"{eid}@{fraction_str(t)}" for t in cuts]
    clash = set(names) & set(G.vertices)
    if clash:
        raise ValidationError(f"subdivision vertex name clash: {sorted(clash)}")
    stops = [e.src] + names + [e.dst]
    bounds = [Fraction(0)] + cuts + [e.length]
    pieces = [
        Edge(f"{eid}#{i}", stops[i], stops[i + 1], bounds[i + 1] - bounds[i])
        for i in range(len(cuts) + 1)
    ]
    H = MetricGraph(list(G.vertices) + names, [x for x in G.edges if x.id != eid] + pieces)

    def carry(p: PointOnGraph) -> PointOnGraph:
        if p.edge != eid:
            return p
        for i in range(len(pieces)):
            if p.offset <= bounds[i + 1]:
                return PointOnGraph(pieces[i].id, p.offset - bounds[i])
        raise ValueError("offset outside edge")

    return H, carry


def contract_edges(G: MetricGraph, eids: Iterable[str]) -> tuple[MetricGraph, dict[str, str]]:
    """Contract the given edges; merged vertices are named by their least member."""
    drop = set(eids)
    uf = UnionFind(G.vertices)
    for x in drop:
        e = G.edge(x)
        uf.union(e.src, e.dst)
    cls = {v: uf.find(v) for v in G.vertices}
    edges = [Edge(e.id, cls[e.src], cls[e.dst], e.length) for e in G.edges if e.id not in drop]
    return MetricGraph(set(cls.values()), edges), cls


def canonical_loopless_model(G: MetricGraph) -> MetricGraph:
    """Suppress 2-valent vertices, then split every loop at its midpoint.

    A 2-valent vertex whose two edges go to one other vertex with equal
    lengths is already a loop midpoint and is kept, which makes the
    operation idempotent.  A circle comes out as a 2-cycle.
    """
    if not G.is_connected():
        raise DisconnectedInput("canonical model is defined for connected graphs")
    verts = set(G.vertices)
    edges = {e.id: e for e in G.edges}
    inc = defaultdict(set)
    for e in edges.values():
        inc[e.src].add(e.id)
        inc[e.dst].add(e.id)

    def suppressible(v: str) -> bool:
        ids = inc[v]
        if len(ids) != 2:
            return False
        a, b = (edges[x] for x in sorted(ids))
        if a.is_loop or b.is_loop:
            return False
        wa, wb = a.other(v), b.other(v)
        if wa == wb and a.length == b.length:
            return False
        return True

    changed = True
    while changed:
        changed = False
        for v in sorted(verts):
            if not suppressible(v):
                continue
            a, b = (edges[x] for x in sorted(inc[v]))
            wa, wb = a.other(v), b.other(v)
            merged = Edge(a.id, wa, wb, a.length + b.length)
            for x in (a, b):
                del edges[x.id]
                inc[x.src].discard(x.id)
                inc[x.dst].discard(x.id)
            verts.discard(v)
            del inc[v]
            edges[merged.id] = merged
            inc[wa].add(merged.id)
            inc[wb].add(merged.id)
            changed = True
            break

    out_edges = []
    for e in sorted(edges.values(), key=lambda x: x.id):
        if not e.is_loop:
            out_edges.append(e)
            continue
        mid = f"{e.id}/m"
        if mid in verts:
            raise ValidationError(f"loop midpoint name clash: {mid}")
        verts.add(mid)
        half = e.length / 2
        out_edges.append(Edge(f"{e.id}/0", e.src, mid, half))
        out_edges.append(Edge(f"{e.id}/1", mid, e.src, half))
    return MetricGraph(verts, out_edges)


def spanning_tree(G: MetricGraph, root: str | None = None) -> list[str]:
    """Deterministic BFS spanning tree (edge ids) of a connected graph."""
    if not G.vertices:
        return []
    root = root if root is not None else G.vertices[0]
    seen = {root}
    order = [root]
    tree = []
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for e in sorted(G.incident(v), key=lambda x: x.id):
            w = e.other(v)
            if w not in seen:
                seen.add(w)
                order.append(w)
                tree.append(e.id)
    if len(seen) != len(G.vertices):
        raise DisconnectedInput("spanning tree needs a connected graph")
    return tree


def tree_paths(G: MetricGraph, tree: Iterable[str], root: str) -> dict[str, dict[str, int]]:
    """For each vertex, the signed edge chain of the tree path from ``root``."""
    adj = defaultdict(list)
    for eid in tree:
        e = G.edge(eid)
        adj[e.src].append((e.dst, eid, 1))
        adj[e.dst].append((e.src, eid, -1))
    paths = {root: {}}
    todo = [root]
    while todo:
        v = todo.pop()
        for w, eid, sign in adj[v]:
            if w not in paths:
                chain = dict(paths[v])
                chain[eid] = chain.get(eid, 0) + sign
                paths[w] = chain
                todo.append(w)
    return paths


# ---------------------------------------------------------------------------
# isomorphism


@dataclass(frozen=True)
class Isomorphism:
    vertex_map: Mapping[str, str]
    edge_map: Mapping[str, str]
    edge_sign: Mapping[str, int]


def _pair_key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


def _pair_lengths(G: MetricGraph) -> dict[tuple[str, str], list[Edge]]:
    out = defaultdict(list)
    for e in G.edges:
        out[_pair_key(e.src, e.dst)].append(e)
    return out


def _vertex_signature(G: MetricGraph, v: str):
    loops = sorted(e.length for e in G.incident(v) if e.is_loop)
    other = sorted(e.length for e in G.incident(v) if not e.is_loop)
    return (G.valency(v), tuple(loops), tuple(other))


def iter_isomorphisms(
    G1: MetricGraph,
    G2: MetricGraph,
    vertex_ok: Callable[[str, str], bool] | None = None,
    edge_ok: Callable[[str, str], bool] | None = None,
    all_edge_maps: bool = False,
) -> Iterator[Isomorphism]:
    """Length-preserving multigraph isomorphisms G1 -> G2.

    Vertices of G1 are assigned in sorted order and candidates tried in
    sorted order, so the first witness is lexicographically least.  With
    ``all_edge_maps`` every compatible edge bijection is produced, otherwise
    one per vertex bijection.
    """
    if len(G1.vertices) != len(G2.vertices) or len(G1.edges) != len(G2.edges):
        return
    if sorted(e.length for e in G1.edges) != sorted(e.length for e in G2.edges):
        return
    sig1 = {v: _vertex_signature(G1, v) for v in G1.vertices}
    sig2 = {v: _vertex_signature(G2, v) for v in G2.vertices}
    if sorted(sig1.values()) != sorted(sig2.values()):
        return
    pairs1 = _pair_lengths(G1)
    pairs2 = _pair_lengths(G2)
    lens1 = {k: sorted(e.length for e in es) for k, es in pairs1.items()}
    lens2 = {k: sorted(e.length for e in es) for k, es in pairs2.items()}
    order = list(G1.vertices)
    cands = {
        v: [w for w in G2.vertices if sig2[w] == sig1[v] and (vertex_ok is None or vertex_ok(v, w))]
        for v in order
    }
    phi: dict[str, str] = {}
    used: set[str] = set()

    def consistent(v: str, w: str) -> bool:
        if lens1.get((v, v), []) != lens2.get((w, w), []):
            return False
        for u, x in phi.items():
            if lens1.get(_pair_key(v, u), []) != lens2.get(_pair_key(w, x), []):
                return False
        return True

    def edge_maps() -> Iterator[tuple[dict, dict]]:
        groups = []
        for key, es in sorted(pairs1.items()):
            u, v = key
            target = pairs2[_pair_key(phi[u], phi[v])]
            groups.append((es, target))

        def sign(e: Edge, f: Edge) -> int:
            if e.is_loop:
                return 1
            return 1 if phi[e.src] == f.src else -1

        def rec(gi: int, emap: dict, esign: dict) -> Iterator[tuple[dict, dict]]:
            if gi == len(groups):
                yield dict(emap), dict(esign)
                return
            es, target = groups[gi]

            def match(i: int, taken: set) -> Iterator[tuple[dict, dict]]:
                if i == len(es):
                    yield from rec(gi + 1, emap, esign)
                    return
                e = es[i]
                for f in target:
                    if f.id in taken or f.length != e.length:
                        continue
                    if edge_ok is not None and not edge_ok(e.id, f.id):
                        continue
                    emap[e.id] = f.id
                    esign[e.id] = sign(e, f)
                    taken.add(f.id)
                    yield from match(i + 1, taken)
                    taken.discard(f.id)
                    del emap[e.id]
                    del esign[e.id]

            yield from match(0, set())

        yield from rec(0, {}, {})

    def assign(i: int) -> Iterator[Isomorphism]:
        if i == len(order):
            for emap, esign in edge_maps():
                yield Isomorphism(dict(phi), emap, esign)
                if not all_edge_maps:
                    return
            return
        v = order[i]
        for w in cands[v]:
            if w in used or not consistent(v, w):
                continue
            phi[v] = w
            used.add(w)
            yield from assign(i + 1)
            del phi[v]
            used.discard(w)

    yield from assign(0)


def graphs_isomorphic(G1: MetricGraph, G2: MetricGraph) -> Isomorphism | None:
    return next(iter_isomorphisms(G1, G2), None)


def isomorphic_up_to_model(G1: MetricGraph, G2: MetricGraph) -> Isomorphism | None:
    """Compare two connected graphs through their canonical loopless models."""
    return graphs_isomorphic(canonical_loopless_model(G1), canonical_loopless_model(G2))
