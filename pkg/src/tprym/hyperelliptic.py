"""Hyperelliptic involutions, fixed loci, and the star construction of covers.

An involution whose quotient is a tree is found by backtracking over
vertex involutions.  Once the vertex part is fixed, the edge part is
forced if the quotient is to be a tree:

* edges joining a swapped pair of vertices must all be reversed
  (otherwise two of them would close a loop downstairs);
* between two fixed vertices there is one fixed edge or two swapped
  edges of equal length;
* any other pair of vertices carries at most one edge.

These rules are also used to prune the vertex search.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .double_cover import DoubleCover, Voltage, derive_cover, enumerate_covers, gauge_normalize, covers_isomorphic
from .graph_core import (
    GraphError,
    MetricGraph,
    PointOnGraph,
    UnionFind,
    blocks,
    bridges,
    genus,
    midpoint,
    vertex_point,
)
from .morphisms import GraphMorphism, make_involution, quotient_by_involution


class GenusTooSmall(GraphError):
    pass


class LeafEdgePresent(GraphError):
    pass


class InvalidS(GraphError):
    pass


class NotHyperellipticBase(GraphError):
    pass


class FixedLocusError(GraphError):
    """The fixed-locus structure contradicts the expected theory."""


@dataclass(frozen=True)
class FixedComponent:
    """A connected component of the fixed locus of an involution.

    Either a tree of pointwise-fixed vertices and edges, or the midpoint
    of a single reversed edge (``midpoint_of``).
    """

    vertices: frozenset[str]
    edges: frozenset[str]
    midpoint_of: str | None
    point: PointOnGraph

    @property
    def is_midpoint(self) -> bool:
        return self.midpoint_of is not None

    def label(self) -> str:
        if self.midpoint_of is not None:
            return f"mid({self.midpoint_of})"
        return "{" + ",".join(sorted(self.vertices)) + "}"


@dataclass(frozen=True)
class HyperellipticCertificate:
    involution: GraphMorphism
    quotient_tree: MetricGraph
    projection: GraphMorphism
    fixed_points: tuple[PointOnGraph, ...]
    fixed_locus: tuple[FixedComponent, ...]


@dataclass(frozen=True)
class CoverHyperellipticData:
    j: GraphMorphism
    jtilde: GraphMorphism
    weakly_fixed_tree: FixedComponent
    base_certificate: HyperellipticCertificate
    total_certificate: HyperellipticCertificate


# ---------------------------------------------------------------------------
# involution search


def _pair_edges(G: MetricGraph) -> dict[tuple[str, str], list]:
    out = defaultdict(list)
    for e in G.edges:
        key = (e.src, e.dst) if e.src <= e.dst else (e.dst, e.src)
        out[key].append(e)
    return out


def _key(u: str, v: str) -> tuple[str, str]:
    return (u, v) if u <= v else (v, u)


def _signature(G: MetricGraph, v: str):
    return (G.valency(v), tuple(sorted(e.length for e in G.incident(v))))


def tree_involutions(G: MetricGraph):
    """Yield every involution of ``G`` whose quotient is a tree.

    Deterministic order: vertices in sorted order, each either fixed or
    paired with the least compatible partner first.
    """
    pairs = _pair_edges(G)
    lens = {k: sorted(e.length for e in es) for k, es in pairs.items()}
    verts = list(G.vertices)
    sig = {v: _signature(G, v) for v in verts}
    sigma: dict[str, str] = {}

    def pair_ok(u: str, v: str) -> bool:
        # u, v both assigned; check length multisets and the tree rules
        a, b = _key(u, v), _key(sigma[u], sigma[v])
        if lens.get(a, []) != lens.get(b, []):
            return False
        n = len(lens.get(a, []))
        if n == 0 or u == v:
            return True
        if sigma[u] == v:
            return True
        if sigma[u] == u and sigma[v] == v:
            return n == 1 or (n == 2 and lens[a][0] == lens[a][1])
        return n == 1

    def consistent(new: list[str]) -> bool:
        for x in new:
            for u in list(sigma):
                if not pair_ok(x, u):
                    return False
        return True

    def rec(i: int):
        while i < len(verts) and verts[i] in sigma:
            i += 1
        if i == len(verts):
            yield dict(sigma)
            return
        v = verts[i]
        options = [v] + [w for w in verts[i + 1:] if w not in sigma and sig[w] == sig[v]]
        for w in options:
            sigma[v] = w
            sigma[w] = v
            if consistent([v, w]):
                yield from rec(i + 1)
            del sigma[v]
            if w != v:
                del sigma[w]

    for vmap in rec(0):
        inv = _forced_edge_involution(G, vmap, pairs)
        if inv is None:
            continue
        emap, orient = inv
        n_rev = sum(1 for e, f in emap.items() if e == f and orient[e] == -1)
        n_fixed = sum(1 for e, f in emap.items() if e == f and orient[e] == 1)
        n_pairs = sum(1 for e, f in emap.items() if e != f) // 2
        n_vorbits = len({frozenset((v, w)) for v, w in vmap.items()})
        if n_rev + n_fixed + n_pairs == n_vorbits + n_rev - 1:
            yield make_involution(G, vmap, emap, orient)


def _forced_edge_involution(G: MetricGraph, vmap: dict[str, str], pairs):
    emap: dict[str, str] = {}
    orient: dict[str, int] = {}
    for (u, v), es in pairs.items():
        if any(e.id in emap for e in es):
            continue
        su, sv = vmap[u], vmap[v]
        if u == v:
            return None
        if su == v and sv == u:
            for e in es:
                emap[e.id], orient[e.id] = e.id, -1
        elif su == u and sv == v:
            if len(es) == 1:
                emap[es[0].id], orient[es[0].id] = es[0].id, 1
            elif len(es) == 2 and es[0].length == es[1].length:
                a, b = es
                emap[a.id], emap[b.id] = b.id, a.id
                s = 1 if a.src == b.src else -1
                orient[a.id] = orient[b.id] = s
            else:
                return None
        else:
            target = pairs.get(_key(su, sv), [])
            if len(es) != 1 or len(target) != 1:
                return None
            a, b = es[0], target[0]
            emap[a.id], emap[b.id] = b.id, a.id
            s = 1 if vmap[a.src] == b.src else -1
            orient[a.id] = orient[b.id] = s
    return emap, orient


def find_tree_involution(G: MetricGraph) -> GraphMorphism | None:
    return next(tree_involutions(G), None)


def fixed_locus(G: MetricGraph, sigma: GraphMorphism) -> tuple[FixedComponent, ...]:
    """Connected components of the fixed point set, in a deterministic order."""
    fixed_v = [v for v in G.vertices if sigma.vertex_map[v] == v]
    uf = UnionFind(fixed_v)
    fixed_e = []
    out = []
    for e in G.edges:
        f = sigma.edge_map[e.id]
        if f != e.id:
            continue
        if sigma.orientation[e.id] == 1:
            fixed_e.append(e)
            uf.union(e.src, e.dst)
        else:
            out.append(FixedComponent(frozenset(), frozenset(), e.id, midpoint(G, e.id)))
    for group in uf.groups():
        es = frozenset(e.id for e in fixed_e if e.src in group)
        rep = min(group)
        point = vertex_point(G, rep)
        out.append(FixedComponent(frozenset(group), es, None, point))
    return tuple(sorted(out, key=lambda c: (c.point.edge, c.point.offset)))


def _check_input(G: MetricGraph) -> None:
    if genus(G) < 2:
        raise GenusTooSmall(f"genus {genus(G)} < 2")
    leaves = [v for v in G.vertices if G.valency(v) == 1]
    if leaves:
        raise LeafEdgePresent(f"leaf vertices {leaves}")


def certificate_for(G: MetricGraph, sigma: GraphMorphism) -> HyperellipticCertificate:
    Q, proj = quotient_by_involution(G, sigma)
    locus = fixed_locus(G, sigma)
    return HyperellipticCertificate(sigma, Q, proj, tuple(c.point for c in locus), locus)


def hyperelliptic_certificate(G: MetricGraph) -> HyperellipticCertificate | None:
    """First involution (deterministic order) with a tree quotient, if any.

    ``fixed_points`` holds one point per connected component of the fixed
    locus; on a graph without bridges these are exactly the fixed vertices
    and reversed-edge midpoints.
    """
    _check_input(G)
    sigma = find_tree_involution(G)
    if sigma is None:
        return None
    return certificate_for(G, sigma)


def is_hyperelliptic(G: MetricGraph) -> bool:
    return find_tree_involution(G) is not None


# ---------------------------------------------------------------------------
# covers


def _commutes(a: GraphMorphism, b: GraphMorphism) -> bool:
    for v in a.source.vertices:
        if a.vertex_map[b.vertex_map[v]] != b.vertex_map[a.vertex_map[v]]:
            return False
    for e in a.source.edge_ids:
        ab, ba = a.edge_map[b.edge_map[e]], b.edge_map[a.edge_map[e]]
        if ab != ba:
            return False
        if a.orientation[b.edge_map[e]] * b.orientation[e] != b.orientation[a.edge_map[e]] * a.orientation[e]:
            return False
    return True


def induced_base_involution(c: DoubleCover, jtilde: GraphMorphism) -> GraphMorphism:
    """The involution of the base covered by ``jtilde`` (requires pi-compatibility)."""
    pi = c.pi
    vmap, emap, orient = {}, {}, {}
    for x in c.total.vertices:
        v, w = pi.vertex_map[x], pi.vertex_map[jtilde.vertex_map[x]]
        if vmap.setdefault(v, w) != w:
            raise FixedLocusError("lifted involution does not descend to the base")
    for x in c.total.edge_ids:
        e, f = pi.edge_map[x], pi.edge_map[jtilde.edge_map[x]]
        o = jtilde.orientation[x]
        if emap.setdefault(e, f) != f or orient.setdefault(e, o) != o:
            raise FixedLocusError("lifted involution does not descend to the base")
    return make_involution(c.base, vmap, emap, orient)


def cover_hyperelliptic_data(c: DoubleCover) -> CoverHyperellipticData | None:
    if not c.is_connected():
        raise GraphError("cover must be connected")
    _check_input(c.base)
    total_sigma = find_tree_involution(c.total)
    if total_sigma is None:
        return None
    if not _commutes(total_sigma, c.iota):
        raise FixedLocusError("the hyperelliptic involution of the total does not commute with the deck involution")
    j = induced_base_involution(c, total_sigma)
    base_cert = certificate_for(c.base, j)
    if genus(base_cert.quotient_tree) != 0:
        raise FixedLocusError("induced base involution is not hyperelliptic")
    swapped = [comp for comp in base_cert.fixed_locus if _preimage_swapped(c, total_sigma, comp)]
    if len(swapped) != 1:
        raise FixedLocusError(f"expected one weakly fixed component, found {len(swapped)}")
    return CoverHyperellipticData(j, total_sigma, swapped[0], base_cert, certificate_for(c.total, total_sigma))


def _preimage_swapped(c: DoubleCover, jtilde: GraphMorphism, comp: FixedComponent) -> bool:
    iota = c.iota
    if comp.is_midpoint:
        lift = c.lifts(comp.midpoint_of)[0]
        image = jtilde.edge_map[lift]
        if image == lift:
            return False
        if image == iota.edge_map[lift]:
            return True
        raise FixedLocusError("midpoint lift is neither fixed nor swapped")
    results = set()
    for v in comp.vertices:
        lift = v + "+"
        image = jtilde.vertex_map[lift]
        if image == lift:
            results.add(False)
        elif image == iota.vertex_map[lift]:
            results.add(True)
        else:
            raise FixedLocusError("vertex lift is neither fixed nor swapped")
    if len(results) != 1:
        raise FixedLocusError("fixed component with mixed lift behaviour")
    return results.pop()


# ---------------------------------------------------------------------------
# star construction


class Attachment(NamedTuple):
    """A fixed point of a 2-connected block where the two halves meet."""

    block: int
    kind: str  # "vertex" or "midpoint"
    name: str

    def __str__(self):
        return f"B{self.block}:{self.name}" if self.kind == "vertex" else f"B{self.block}:mid({self.name})"


@dataclass(frozen=True)
class StarBlock:
    index: int
    edges: frozenset[str]
    vertices: frozenset[str]
    attachments: tuple[Attachment, ...]
    side: dict  # edge id / vertex id -> 0 or 1 (reversed edges omitted)
    crossing_edge: dict  # Attachment -> edge carrying the crossing voltage


@dataclass(frozen=True)
class StarData:
    graph: MetricGraph
    certificate: HyperellipticCertificate
    blocks: tuple[StarBlock, ...]

    @property
    def attachments(self) -> tuple[Attachment, ...]:
        return tuple(a for b in self.blocks for a in b.attachments)


def star_decomposition(G: MetricGraph, cert: HyperellipticCertificate) -> StarData:
    """Split each non-bridge block into its two halves and attachment points."""
    sigma = cert.involution
    bridge_set = bridges(G)
    out = []
    for idx, block in enumerate(b for b in blocks(G) if not (len(b) == 1 and next(iter(b)) in bridge_set)):
        if any(sigma.edge_map[e] not in block for e in block):
            raise FixedLocusError("involution does not preserve a block")
        verts = set()
        for e in block:
            verts.update((G.edge(e).src, G.edge(e).dst))
        fixed_v = {v for v in verts if sigma.vertex_map[v] == v}
        rev = {e for e in block if sigma.edge_map[e] == e and sigma.orientation[e] == -1}
        uf = UnionFind([("v", v) for v in verts - fixed_v] + [("e", e) for e in block - rev])
        for e in block - rev:
            x = G.edge(e)
            for end in (x.src, x.dst):
                if end not in fixed_v:
                    uf.union(("e", e), ("v", end))
        groups = sorted(uf.groups(), key=min)
        if len(groups) != 2:
            raise FixedLocusError(f"block {idx} does not split into two halves")
        side = {}
        for s, group in enumerate(groups):
            for kind, name in group:
                side[name] = s
        attachments = []
        crossing = {}
        for v in sorted(fixed_v):
            at = [e for e in block if v in (G.edge(e).src, G.edge(e).dst)]
            if len(at) != 2 or {side[e] for e in at} != {0, 1}:
                raise FixedLocusError(f"fixed vertex {v} does not join the two halves")
            a = Attachment(idx, "vertex", v)
            attachments.append(a)
            crossing[a] = next(e for e in at if side[e] == 1)
        for e in sorted(rev):
            a = Attachment(idx, "midpoint", e)
            attachments.append(a)
            crossing[a] = e
        out.append(StarBlock(idx, frozenset(block), frozenset(verts), tuple(attachments), side, crossing))
    return StarData(G, cert, tuple(out))


def construction_star(G: MetricGraph, cert: HyperellipticCertificate, S: Iterable[Attachment], data: StarData | None = None) -> DoubleCover:
    """Cover obtained by cross-gluing the doubled halves at the points of S.

    Bridges lift untwisted.  The voltage is 1 on the half-1 edge at each
    crossing vertex (the whole edge for a crossing midpoint), then
    gauge-normalized.
    """
    data = data or star_decomposition(G, cert)
    valid = {a: b for b in data.blocks for a in b.attachments}
    w = {e: 0 for e in G.edge_ids}
    for a in S:
        if a not in valid:
            raise InvalidS(f"{a} is not an attachment point")
        e = valid[a].crossing_edge[a]
        w[e] ^= 1
    return derive_cover(G, gauge_normalize(G, Voltage(G, w)))


def star_classes_equal(data: StarData, S1: Iterable[Attachment], S2: Iterable[Attachment]) -> bool:
    """Equal up to complementing inside any subset of blocks."""
    S1, S2 = set(S1), set(S2)
    for b in data.blocks:
        F = set(b.attachments)
        a1, a2 = S1 & F, S2 & F
        if a1 != a2 and a1 != F - a2:
            return False
    return True


def attachments_on(data: StarData, comp: FixedComponent) -> frozenset[Attachment]:
    out = set()
    for a in data.attachments:
        if a.kind == "vertex" and a.name in comp.vertices:
            out.add(a)
        elif a.kind == "midpoint" and a.name == comp.midpoint_of:
            out.add(a)
    return frozenset(out)


@dataclass(frozen=True)
class CoverVerdict:
    voltage: Voltage
    hyperelliptic: bool
    weakly_fixed: FixedComponent | None
    star_set: frozenset[Attachment] | None


def count_hyperelliptic_covers(G: MetricGraph) -> tuple[int, int, list[CoverVerdict]]:
    """Connected cover classes, how many have hyperelliptic totals, and witnesses.

    Each hyperelliptic witness records the attachment points lying on its
    weakly fixed tree; the star construction with that set is checked to
    reproduce the cover.
    """
    cert = hyperelliptic_certificate(G)
    if cert is None:
        raise NotHyperellipticBase("base graph is not hyperelliptic")
    data = star_decomposition(G, cert)
    verdicts = []
    for w, ok in enumerate_covers(G):
        if not ok:
            continue
        c = derive_cover(G, w)
        hd = cover_hyperelliptic_data(c)
        if hd is None:
            verdicts.append(CoverVerdict(w, False, None, None))
            continue
        S = attachments_on(data, hd.weakly_fixed_tree)
        if not covers_isomorphic(construction_star(G, cert, S, data), c):
            raise FixedLocusError("star construction on the weakly fixed tree does not reproduce the cover")
        verdicts.append(CoverVerdict(w, True, hd.weakly_fixed_tree, S))
    n_hyp = sum(1 for v in verdicts if v.hyperelliptic)
    return len(verdicts), n_hyp, verdicts
