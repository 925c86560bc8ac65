"""Bigonal construction for a tower of double covers over a tree.

Given a double cover Gamma~ -> Gamma and the hyperelliptic quotient
Gamma -> K, the output graph Pi~ has one point for every effective degree-2
divisor on Gamma~ lying over a fibre of Gamma -> K.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .abel_prym import abel_prym_graph, collapsible_locus
from .double_cover import DisconnectedCover, DoubleCover, Voltage, derive_cover, gauge_normalize
from .graph_core import (
    Edge,
    GraphError,
    MetricGraph,
    bridges,
    contract_edges,
    genus,
    is_two_edge_connected,
    isomorphic_up_to_model,
    iter_isomorphisms,
)
from .hyperelliptic import (
    HyperellipticCertificate,
    NotHyperellipticBase,
    cover_hyperelliptic_data,
    hyperelliptic_certificate,
)
from .morphisms import (
    GraphMorphism,
    compose,
    harmonic_degree,
    make_involution,
    quotient_by_involution,
    split_reversed,
)
from .prym_lattice import jacobian, prym, pptav_isomorphic


class NotQuotientTower(GraphError):
    pass


@dataclass
class BigonalOutput:
    pi_tilde_graph: MetricGraph
    p_tilde: GraphMorphism
    iota_pi: GraphMorphism
    pi_quotient: MetricGraph
    quotient_map: GraphMorphism
    components: list[MetricGraph]
    tree: MetricGraph
    refined_cover: DoubleCover

    def to_dict(self) -> dict:
        return {
            "pi_tilde": self.pi_tilde_graph.to_dict(),
            "pi": self.pi_quotient.to_dict(),
            "K": self.tree.to_dict(),
            "components": [
                {"graph": comp.to_dict(), "genus": genus(comp)} for comp in self.components
            ],
            "edge_types": {e: self.p_tilde.slope[e] for e in self.pi_tilde_graph.edge_ids},
        }


def _label(items) -> str:
    items = sorted(items)
    return "{" + ",".join(items) + "}"


def _multisets(options: list[str], size: int):
    return itertools.combinations_with_replacement(sorted(options), size)


def _multinomial(counts: Counter) -> int:
    n = sum(counts.values())
    out = factorial(n)
    for k in counts.values():
        out //= factorial(k)
    return out


def _local_degree(f: GraphMorphism, v: str) -> int:
    """Local degree of ``f`` at vertex ``v`` (zero if all edges at v are contracted)."""
    S, T = f.source, f.target
    w = f.vertex_map[v]
    halves = T.half_edges(w)
    if not halves:
        return 0
    target = halves[0]
    d = 0
    for e in S.incident(v):
        img = f.edge_map[e.id]
        if img is None:
            continue
        for end, x in ((0, e.src), (1, e.dst)):
            if x != v:
                continue
            side = end if f.orientation[e.id] == 1 else 1 - end
            if (img, side) == target:
                d += f.slope[e.id]
    return d


def _generic_bigonal(pi: GraphMorphism, iota: GraphMorphism, f: GraphMorphism):
    """Divisor graph of the tower total -(pi)-> base -(f)-> K.

    ``pi`` may be dilated; its deck involution is ``iota``.  Returns the
    divisor graph, its map to K and the involution induced by ``iota``.
    """
    total, base, K = pi.source, pi.target, f.target
    lifts_of_edge: dict[str, list[str]] = {e: [] for e in base.edge_ids}
    for x in total.edge_ids:
        lifts_of_edge[pi.edge_map[x]].append(x)
    lifts_of_vertex: dict[str, list[str]] = {v: [] for v in base.vertices}
    for x in total.vertices:
        lifts_of_vertex[pi.vertex_map[x]].append(x)

    members: dict[str, list[str]] = {}
    vertex_names = []
    for kv in K.vertices:
        over = [v for v in base.vertices if f.vertex_map[v] == kv]
        choices = [list(_multisets(lifts_of_vertex[v], _local_degree(f, v))) for v in over]
        for pick in itertools.product(*choices):
            chosen = [x for part in pick for x in part]
            members[_label(chosen)] = chosen
            vertex_names.append(_label(chosen))

    def end_over(x: str, k_end: int) -> str:
        """Endpoint of total edge x lying over end ``k_end`` (0=src, 1=dst) of its K edge."""
        a = pi.edge_map[x]
        a_end = k_end if f.orientation[a] == 1 else 1 - k_end
        x_end = a_end if pi.orientation[x] == 1 else 1 - a_end
        e = total.edge(x)
        return e.src if x_end == 0 else e.dst

    edges, emap, slope = [], {}, {}
    for k in K.edges:
        over = [a for a in base.edge_ids if f.edge_map[a] == k.id]
        choices = [list(_multisets(lifts_of_edge[a], f.slope[a])) for a in over]
        for pick in itertools.product(*choices):
            mu = 1
            for part in pick:
                mu *= _multinomial(Counter(part))
                for x in part:
                    mu *= pi.slope[x]
            chosen = [x for part in pick for x in part]
            name = _label(chosen)
            members[name] = chosen
            src = _label(end_over(x, 0) for x in chosen)
            dst = _label(end_over(x, 1) for x in chosen)
            length = k.length / mu
            edges.append(Edge(name, src, dst, length))
            emap[name], slope[name] = k.id, mu
    P = MetricGraph(vertex_names, edges)

    def vertex_of(label: str) -> str:
        return f.vertex_map[pi.vertex_map[members[label][0]]]

    p_tilde = GraphMorphism(P, K, {v: vertex_of(v) for v in P.vertices}, emap, slope, {e: 1 for e in emap})

    def flip(label: str, m) -> str:
        return _label(m[x] for x in members[label])

    iota_pi = make_involution(
        P,
        {v: flip(v, iota.vertex_map) for v in P.vertices},
        {e: flip(e, iota.edge_map) for e in P.edge_ids},
        {e: 1 for e in P.edge_ids},
    )
    return P, p_tilde, iota_pi


def refine_for_tower(c: DoubleCover, cert: HyperellipticCertificate) -> tuple[DoubleCover, GraphMorphism, MetricGraph, GraphMorphism]:
    """Split the edges reversed by the base involution; return the refined
    cover, the refined involution, the tree K and the quotient map."""
    j = cert.involution
    B, jB, halves = split_reversed(c.base, j)
    w = {}
    for e in c.base.edge_ids:
        if e in halves:
            h0, h1 = halves[e]
            w[h0], w[h1] = c.voltage[e], 0
        else:
            w[e] = c.voltage[e]
    refined = derive_cover(B, Voltage(B, w))
    K, f = quotient_by_involution(B, jB)
    return refined, jB, K, f


def _check_certificate(c: DoubleCover, cert: HyperellipticCertificate | None) -> HyperellipticCertificate:
    if cert is None:
        cert = hyperelliptic_certificate(c.base)
        if cert is None:
            raise NotHyperellipticBase("the base graph is not hyperelliptic")
        return cert
    j = cert.involution
    if j.source != c.base:
        raise NotQuotientTower("certificate belongs to another graph")
    if genus(cert.quotient_tree) != 0 or cert.quotient_tree != quotient_by_involution(c.base, j)[0]:
        raise NotQuotientTower("the tower map is not the hyperelliptic quotient")
    return cert


def bigonal(c: DoubleCover, cert: HyperellipticCertificate | None = None) -> BigonalOutput:
    if not c.is_connected():
        raise DisconnectedCover("the bigonal construction needs a connected cover")
    cert = _check_certificate(c, cert)
    refined, _, K, f = refine_for_tower(c, cert)
    P, p_tilde, iota_pi = _generic_bigonal(refined.pi, refined.iota, f)
    if harmonic_degree(p_tilde) != 4:
        raise GraphError("bigonal output is not harmonic of degree 4")
    Q, q = quotient_by_involution(P, iota_pi)
    if any(genus(comp) != 0 for comp in Q.component_graphs()):
        raise GraphError("quotient of the bigonal output is not a forest")
    return BigonalOutput(P, p_tilde, iota_pi, Q, q, P.component_graphs(), K, refined)


# ---------------------------------------------------------------------------
# comparisons


def _core(G: MetricGraph) -> MetricGraph:
    """Remove leaf edges repeatedly and contract the remaining bridges."""
    while True:
        leaves = [v for v in G.vertices if G.valency(v) == 1]
        if not leaves:
            break
        drop = {e.id for v in leaves for e in G.incident(v)}
        keep = [v for v in G.vertices if v not in leaves]
        G = MetricGraph(keep, [e for e in G.edges if e.id not in drop])
    return contract_edges(G, bridges(G))[0]


@dataclass
class BigonalComparison:
    matches: bool
    abel_prym_genus: int
    component_genera: list[int]
    mode: str


def compare_with_abel_prym(c: DoubleCover, out: BigonalOutput | None = None) -> BigonalComparison:
    out = bigonal(c) if out is None else out
    data = cover_hyperelliptic_data(c)
    ap = abel_prym_graph(c, data=data) if data is not None else abel_prym_graph(c, route="general")
    comps = out.components
    genera = [genus(x) for x in comps]
    coll = collapsible_locus(c)
    finite = not coll.edges and is_two_edge_connected(c.total)
    mode = "abel-prym" if finite else "topological-quotient"
    if len(comps) != 2 or data is None:
        ok = any(isomorphic_up_to_model(x, ap.image) for x in comps) and 0 in genera and len(comps) == 2
        return BigonalComparison(bool(ok), genus(ap.image), genera, mode)
    sigma = compose(c.iota, data.jtilde)
    tree_part = quotient_by_involution(c.total, data.jtilde)[0]
    if finite:
        targets = [ap.image]
    else:
        targets = [quotient_by_involution(c.total, sigma)[0]]
    ok = False
    for first, second in ((comps[0], comps[1]), (comps[1], comps[0])):
        if genus(second) != 0 or isomorphic_up_to_model(second, tree_part) is None:
            continue
        if all(isomorphic_up_to_model(first, t) is not None for t in targets):
            if finite or isomorphic_up_to_model(_core(first), ap.image) is not None:
                ok = True
    return BigonalComparison(ok, genus(ap.image), genera, mode)


def bigonal_matches_abel_prym(c: DoubleCover) -> bool:
    return compare_with_abel_prym(c).matches


def _cover_voltage_from_involution(O: MetricGraph, sigma: GraphMorphism) -> tuple[MetricGraph, dict[str, int]]:
    """Base graph and voltage of the free double cover O -> O/sigma."""
    if any(sigma.vertex_map[v] == v for v in O.vertices) or any(sigma.edge_map[e] == e for e in O.edge_ids):
        raise GraphError("involution is not free")
    Q, q = quotient_by_involution(O, sigma)
    rep = {}
    for v in O.vertices:
        rep[q.vertex_map[v]] = min(v, sigma.vertex_map[v])
    w = {}
    for x in O.edges:
        F = q.edge_map[x.id]
        if F in w:
            continue
        qF = Q.edge(F)
        # the lift of F leaving the representative of its source
        start = x.src if q.orientation[x.id] == 1 else x.dst
        end = x.dst if q.orientation[x.id] == 1 else x.src
        if start != rep[qF.src]:
            start, end = sigma.vertex_map[start], sigma.vertex_map[end]
        w[F] = int(end != rep[qF.dst])
    return Q, w


def bigonal_round_trip(c: DoubleCover, out: BigonalOutput | None = None) -> bool:
    """Apply the construction to Pi~ -> Pi -> K and compare with the input cover."""
    out = bigonal(c) if out is None else out
    P, iota_pi, q = out.pi_tilde_graph, out.iota_pi, out.quotient_map
    Pi = out.pi_quotient
    emap, slope, orient = {}, {}, {}
    vmap = {}
    for x in P.vertices:
        vmap[q.vertex_map[x]] = out.p_tilde.vertex_map[x]
    for x in P.edge_ids:
        F = q.edge_map[x]
        mu = Fraction(out.p_tilde.slope[x], q.slope[x])
        if mu.denominator != 1:
            raise GraphError("quotient of the bigonal output does not map harmonically to K")
        emap[F] = out.p_tilde.edge_map[x]
        slope[F] = int(mu)
        orient[F] = out.p_tilde.orientation[x] * q.orientation[x]
    f = GraphMorphism(Pi, out.tree, vmap, emap, slope, orient)
    O, _, iota_O = _generic_bigonal(q, iota_pi, f)
    if not O.is_connected():
        return False
    base, w = _cover_voltage_from_involution(O, iota_O)
    target = out.refined_cover
    reference = gauge_normalize(target.base, target.voltage)
    for iso in iter_isomorphisms(base, target.base, all_edge_maps=True):
        moved = {iso.edge_map[e]: s for e, s in w.items()}
        if gauge_normalize(target.base, moved) == reference:
            return True
    return False


def bigonal_involutive(c: DoubleCover) -> bool:
    return bigonal_round_trip(c)


SCALARS = (Fraction(1, 2), Fraction(1), Fraction(2))


def prym_scalar(c: DoubleCover, out: BigonalOutput | None = None, bound: int = 3) -> Fraction | None:
    """Scalar s with Prym(cover) isometric to s times Jac of the genus-positive component."""
    out = bigonal(c) if out is None else out
    positive = [x for x in out.components if genus(x) > 0]
    if len(positive) != 1:
        return None
    J = jacobian(positive[0])
    P = prym(c)
    if J.rank != P.rank:
        return None
    for s in SCALARS:
        if pptav_isomorphic(J.scaled(s), P, bound) is not None:
            return s
    return None
