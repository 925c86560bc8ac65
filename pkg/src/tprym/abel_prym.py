"""The Abel-Prym map p -> [p - iota(p)] of a free double cover.

Two independent constructions of the image graph are provided.  The
hyperelliptic route quotients the total graph by iota composed with the
lifted hyperelliptic involution.  The general route places every point of
the total graph in exact torus coordinates and glues edges whose images
coincide.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple

from . import linalg
from .double_cover import DisconnectedCover, DoubleCover
from .graph_core import (
    Edge,
    GraphError,
    MetricGraph,
    PointOnGraph,
    UnionFind,
    bridges,
    canonical_point,
    contract_edges,
    genus,
    isomorphic_up_to_model,
    subdivide,
)
from .hyperelliptic import (
    CoverHyperellipticData,
    FixedLocusError,
    cover_hyperelliptic_data,
    hyperelliptic_certificate,
)
from .morphisms import GraphMorphism, compose, harmonic_degree, quotient_by_involution, reversed_edges, split_reversed
from .prym_lattice import AbelJacobi, CycleVector, Divisor, antisym_basis, linear_equivalent


class RuleDisagreement(GraphError):
    pass


class InfiniteFibres(GraphError):
    pass


class RouteMismatch(GraphError):
    pass


class EdgeClass(Enum):
    CONTRACTED = "Contracted"
    DILATED2 = "Dilated2"
    ISOMETRIC = "Isometric"

    @property
    def slope(self) -> int:
        return {"Contracted": 0, "Dilated2": 2, "Isometric": 1}[self.value]


class Collapsible(NamedTuple):
    bridge_part: frozenset[str]
    cyclic_part: frozenset[str]

    @property
    def edges(self) -> frozenset[str]:
        return self.bridge_part | self.cyclic_part


def _require_connected(c: DoubleCover) -> None:
    if not c.is_connected():
        raise DisconnectedCover("the Abel-Prym map needs a connected cover")


def collapsible_locus(c: DoubleCover) -> Collapsible:
    _require_connected(c)
    T = c.total
    total_bridges = bridges(T)
    base_bridges = bridges(c.base)
    cyclic = set()
    for e in c.base.edge_ids:
        a, b = c.lifts(e)
        if e in base_bridges or a in total_bridges:
            continue
        if not T.without_edges([a, b]).is_connected():
            cyclic.update((a, b))
    return Collapsible(frozenset(total_bridges), frozenset(cyclic))


def segment_of(G: MetricGraph) -> dict[str, str]:
    """Group edges into the maximal paths through 2-valent vertices."""
    uf = UnionFind(G.edge_ids)
    for v in G.vertices:
        inc = G.incident(v)
        if len(inc) == 2 and not inc[0].is_loop and inc[0].id != inc[1].id:
            uf.union(inc[0].id, inc[1].id)
    out = {}
    for group in uf.groups():
        name = min(group)
        for e in group:
            out[e] = name
    return out


def segment_count(G: MetricGraph, edges: Iterable[str]) -> int:
    seg = segment_of(G)
    return len({seg[e] for e in edges})


def cyclic_pair_count(c: DoubleCover, cyc: Iterable[str] | None = None) -> int:
    """Number of iota-pairs of segments of the total graph in the cyclic part."""
    cyc = collapsible_locus(c).cyclic_part if cyc is None else cyc
    n = segment_count(c.total, cyc)
    if n % 2:
        raise RuleDisagreement("cyclic part is not iota-invariant")
    return n // 2


# ---------------------------------------------------------------------------
# edge classification


def classify_by_connectivity(c: DoubleCover) -> dict[str, EdgeClass]:
    _require_connected(c)
    T = c.total
    total_bridges = bridges(T)
    base_bridges = bridges(c.base)
    out = {}
    for e in c.base.edge_ids:
        a, b = c.lifts(e)
        if a in total_bridges:
            cls = EdgeClass.CONTRACTED
        elif e in base_bridges:
            cls = EdgeClass.DILATED2
        elif not T.without_edges([a, b]).is_connected():
            cls = EdgeClass.CONTRACTED
        else:
            cls = EdgeClass.ISOMETRIC
        out[a] = out[b] = cls
    return dict(sorted(out.items()))


def classify_by_basis(c: DoubleCover, basis: list[CycleVector] | None = None) -> dict[str, EdgeClass]:
    """Classes read off the multiplicities of anti-invariant cycles.

    The gcd of the coefficients on an edge over a basis is a property of
    the lattice: zero means contracted, even means dilated by two.
    """
    basis = antisym_basis(c) if basis is None else basis
    out = {}
    for x in c.total.edge_ids:
        g = 0
        for v in basis:
            g = math.gcd(g, v[x])
        if g == 0:
            out[x] = EdgeClass.CONTRACTED
        elif g % 2 == 0:
            out[x] = EdgeClass.DILATED2
        else:
            out[x] = EdgeClass.ISOMETRIC
    return out


def classify_edges(c: DoubleCover) -> dict[str, EdgeClass]:
    a = classify_by_connectivity(c)
    b = classify_by_basis(c)
    diff = {e: (a[e].value, b[e].value) for e in a if a[e] != b[e]}
    if diff:
        raise RuleDisagreement(f"edge rules disagree: {diff}")
    return a


# ---------------------------------------------------------------------------
# torus coordinates


def _frac(x: Fraction) -> Fraction:
    return x - math.floor(x)


def torus_key(x: Iterable[Fraction]) -> tuple[Fraction, ...]:
    return tuple(_frac(v) for v in x)


def _add(x, y):
    return [a + b for a, b in zip(x, y)]


def _sub(x, y):
    return [a - b for a, b in zip(x, y)]


def _scale(t, x):
    return [t * a for a in x]


class PrymCoordinates:
    """Exact coordinates of Abel-Prym images modulo the integer lattice.

    ``vertex[v]`` is the image of a vertex and ``direction[e]`` the total
    displacement along an edge, so the image of the point at fraction t
    of e is ``vertex[src] + t * direction[e]``.
    """

    def __init__(self, c: DoubleCover):
        _require_connected(c)
        self.cover = c
        T = c.total
        self.aj = aj = AbelJacobi(T)
        iota = c.iota
        self.vertex = {}
        for v in T.vertices:
            chain = defaultdict(Fraction)
            for e, k in aj.paths[v].items():
                chain[e] += k
            for e, k in aj.paths[iota.vertex_map[v]].items():
                chain[e] -= k
            self.vertex[v] = aj.coords_of_chain(chain)
        self.direction = {}
        for e in T.edges:
            f = iota.edge_map[e.id]
            self.direction[e.id] = aj.coords_of_chain({e.id: Fraction(1), f: Fraction(-iota.orientation[e.id])})
        self.dim = len(aj.basis)

    def point(self, p: PointOnGraph) -> list[Fraction]:
        e = self.cover.total.edge(p.edge)
        return _add(self.vertex[e.src], _scale(p.offset / e.length, self.direction[e.id]))

    def same_image(self, p: PointOnGraph, q: PointOnGraph) -> bool:
        return linalg.is_integral(_sub(self.point(p), self.point(q)))


def psi_equal(c: DoubleCover, p: PointOnGraph, q: PointOnGraph) -> bool:
    """Whether p - iota(p) and q - iota(q) are linearly equivalent."""
    iota = c.iota

    def flip(x: PointOnGraph) -> PointOnGraph:
        e = iota.edge_map[x.edge]
        if iota.orientation[x.edge] == 1:
            return PointOnGraph(e, x.offset)
        return PointOnGraph(e, c.total.edge(e).length - x.offset)

    return linear_equivalent(c.total, Divisor.of(p, flip(q)), Divisor.of(q, flip(p)))


def _is_int(x: Fraction) -> bool:
    return x.denominator == 1


def solve_on_line(x0, d, k, lo: Fraction, hi: Fraction, closed: bool = False) -> list[Fraction]:
    """Parameters t in (lo, hi) with x0 + t d = k modulo integers."""
    i = next((i for i, v in enumerate(d) if v), None)
    if i is None:
        return []
    a = lo * d[i] - k[i] + x0[i]
    b = hi * d[i] - k[i] + x0[i]
    a, b = min(a, b), max(a, b)
    out = []
    for n in range(math.floor(a), math.ceil(b) + 1):
        t = (k[i] - x0[i] + n) / d[i]
        inside = lo <= t <= hi if closed else lo < t < hi
        if inside and all(_is_int(x0[j] + t * d[j] - k[j]) for j in range(len(d))):
            out.append(t)
    return out


def _crossings(x0, d, s_range, y0, e, t_range) -> list[tuple[Fraction, Fraction]]:
    """Interior (s, t) with x0 + s d = y0 + t e modulo integers, for independent d, e."""
    n = len(d)
    pair = next(((i, j) for i in range(n) for j in range(i + 1, n) if d[i] * e[j] - d[j] * e[i] != 0), None)
    if pair is None:
        return []
    i, j = pair
    r = _sub(y0, x0)
    (s0, s1), (t0, t1) = s_range, t_range
    corners = [(s, t) for s in (s0, s1) for t in (t0, t1)]

    def span(k):
        vals = [s * d[k] - t * e[k] - r[k] for s, t in corners]
        return range(math.floor(min(vals)), math.ceil(max(vals)) + 1)

    det = d[i] * (-e[j]) - (-e[i]) * d[j]
    out = []
    for ni in span(i):
        for nj in span(j):
            bi, bj = r[i] + ni, r[j] + nj
            s = (bi * (-e[j]) - (-e[i]) * bj) / det
            t = (d[i] * bj - d[j] * bi) / det
            if not (s0 < s < s1 and t0 < t < t1):
                continue
            if all(_is_int(x0[k] + s * d[k] - y0[k] - t * e[k]) for k in range(n)):
                out.append((s, t))
    return out


def fibre(coords: PrymCoordinates, p: PointOnGraph) -> list[PointOnGraph] | None:
    """All points with the same image as ``p``; None if the fibre is infinite."""
    T = coords.cover.total
    x = coords.point(p)
    found = set()
    for e in T.edges:
        d = coords.direction[e.id]
        x0 = coords.vertex[e.src]
        if not any(d):
            if linalg.is_integral(_sub(x0, x)):
                return None
            continue
        for t in solve_on_line(x0, d, x, Fraction(0), Fraction(1), closed=True):
            found.add(canonical_point(T, PointOnGraph(e.id, t * e.length)))
    return sorted(found)


# ---------------------------------------------------------------------------
# image graph


@dataclass
class AbelPrymResult:
    image: MetricGraph
    psi: GraphMorphism
    classes: dict[str, EdgeClass]
    collapsible: Collapsible
    route: str
    pieces: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "route": self.route,
            "image": self.image.to_dict(),
            "image_genus": genus(self.image),
            "classes": {e: c.value for e, c in sorted(self.classes.items())},
            "collapsible": {
                "bridge_part": sorted(self.collapsible.bridge_part),
                "cyclic_part": sorted(self.collapsible.cyclic_part),
            },
            "psi": self.psi.to_dict(),
        }


def _general_image(c: DoubleCover, classes: dict[str, EdgeClass], coll: Collapsible) -> AbelPrymResult:
    T = c.total
    coords = PrymCoordinates(c)
    moving = []
    for e in T.edge_ids:
        zero = not any(coords.direction[e])
        if classes[e] is EdgeClass.CONTRACTED:
            if not zero:
                raise RuleDisagreement(f"{e} is classified contracted but moves in the torus")
        elif zero:
            raise InfiniteFibres(f"{e} is not contracted but has constant image")
        else:
            moving.append(e)

    cuts: dict[str, set[Fraction]] = {e: set() for e in moving}

    def segments():
        out = []
        for e in moving:
            ts = [Fraction(0)] + sorted(cuts[e]) + [Fraction(1)]
            for a, b in zip(ts, ts[1:]):
                out.append((e, a, b))
        return out

    def at(e: str, t: Fraction):
        return _add(coords.vertex[T.edge(e).src], _scale(t, coords.direction[e]))

    while True:
        segs = segments()
        keys = {torus_key(coords.vertex[v]) for v in T.vertices}
        for e, a, b in segs:
            keys.add(torus_key(at(e, a)))
            keys.add(torus_key(at(e, b)))
        added = False
        for e, a, b in segs:
            x0, d = coords.vertex[T.edge(e).src], coords.direction[e]
            for k in keys:
                for t in solve_on_line(x0, d, list(k), a, b):
                    cuts[e].add(t)
                    added = True
        if added:
            continue
        for i, (e, a, b) in enumerate(segs):
            for f, c0, c1 in segs[i + 1:]:
                for s, t in _crossings(coords.vertex[T.edge(e).src], coords.direction[e], (a, b),
                                       coords.vertex[T.edge(f).src], coords.direction[f], (c0, c1)):
                    cuts[e].add(s)
                    cuts[f].add(t)
                    added = True
        if added:
            continue
        for e, a, b in segs:
            if torus_key(at(e, a)) == torus_key(at(e, b)):
                cuts[e].add((a + b) / 2)
                added = True
        if not added:
            break

    # refined total graph
    R = T
    pieces: dict[str, tuple[str, ...]] = {e: (e,) for e in T.edge_ids}
    params: dict[str, tuple[str, Fraction, Fraction]] = {}
    vertex_key: dict[str, tuple] = {v: torus_key(coords.vertex[v]) for v in T.vertices}
    for e in moving:
        length = T.edge(e).length
        ts = sorted(cuts[e])
        if ts:
            R, _ = subdivide(R, e, [t * length for t in ts])
            pieces[e] = tuple(f"{e}#{i}" for i in range(len(ts) + 1))
            for t, p in zip(ts, pieces[e]):
                name = R.edge(p).dst
                vertex_key[name] = torus_key(at(e, t))
        bounds = [Fraction(0)] + ts + [Fraction(1)]
        for piece, a, b in zip(pieces[e], bounds, bounds[1:]):
            params[piece] = (e, a, b)

    members: dict[tuple, list[str]] = defaultdict(list)
    for v in R.vertices:
        members[vertex_key[v]].append(v)
    vname = {k: "|".join(sorted(vs)) for k, vs in members.items()}

    edge_class: dict[tuple, list[tuple[str, int]]] = defaultdict(list)
    for p, (e, a, b) in params.items():
        start, end = torus_key(at(e, a)), torus_key(at(e, b))
        d = tuple(_scale(b - a, coords.direction[e]))
        fwd = (start, d)
        bwd = (end, tuple(-x for x in d))
        if fwd <= bwd:
            edge_class[fwd].append((p, 1))
        else:
            edge_class[bwd].append((p, -1))

    qedges, emap, slope, orient = [], {}, {}, {}
    for (start, d), group in sorted(edge_class.items(), key=lambda kv: min(p for p, _ in kv[1])):
        name = "|".join(sorted(p for p, _ in group))
        end = torus_key(_add(list(start), list(d)))
        lengths = set()
        for p, sign in group:
            e = params[p][0]
            mu = classes[e].slope
            lengths.add(mu * R.edge(p).length)
            emap[p], slope[p], orient[p] = name, mu, sign
        if len(lengths) != 1:
            raise RuleDisagreement(f"identified segments {name} have different image lengths")
        qedges.append(Edge(name, vname[start], vname[end], lengths.pop()))
    for e in T.edge_ids:
        if classes[e] is EdgeClass.CONTRACTED:
            emap[e], slope[e] = None, 0
    vmap = {v: vname[vertex_key[v]] for v in R.vertices}
    image = MetricGraph(set(vmap.values()), qedges)
    psi = GraphMorphism(R, image, vmap, emap, slope, orient)
    return AbelPrymResult(image, psi, classes, coll, "general", pieces)


def _hyperelliptic_image(c: DoubleCover, data: CoverHyperellipticData, classes: dict[str, EdgeClass],
                         coll: Collapsible) -> AbelPrymResult:
    T = c.total
    sigma = compose(c.iota, data.jtilde)
    contract = coll.edges
    bad = [e for e in reversed_edges(sigma) if e not in contract]
    if bad:
        raise RouteMismatch(f"edges reversed by iota*j~ outside the collapsible locus: {bad}")
    Q, proj = quotient_by_involution(T, sigma, contract=contract)
    for e in T.edge_ids:
        if e in contract:
            expected = EdgeClass.CONTRACTED
        elif sigma.edge_map[e] == e:
            expected = EdgeClass.DILATED2
        else:
            expected = EdgeClass.ISOMETRIC
        if classes[e] is not expected:
            raise RouteMismatch(f"{e}: quotient gives {expected.value}, edge rules give {classes[e].value}")
    dagger = gamma_dagger(c.base, data)
    if isomorphic_up_to_model(Q, dagger) is None:
        raise RouteMismatch("quotient image and Gamma-dagger are not isomorphic")
    return AbelPrymResult(Q, proj, classes, coll, "hyperelliptic", {e: (e,) for e in T.edge_ids})


def abel_prym_graph(c: DoubleCover, route: str = "auto", data: CoverHyperellipticData | None = None) -> AbelPrymResult:
    """Image graph of the Abel-Prym map together with the map onto it.

    ``route`` is "hyperelliptic", "general" or "auto" (hyperelliptic when
    the total graph admits a hyperelliptic involution).
    """
    _require_connected(c)
    classes = classify_edges(c)
    coll = collapsible_locus(c)
    if route not in ("auto", "general", "hyperelliptic"):
        raise ValueError(f"unknown route {route!r}")
    if route != "general" and data is None:
        data = cover_hyperelliptic_data(c)
        if data is None and route == "hyperelliptic":
            raise FixedLocusError("the total graph is not hyperelliptic")
    if route == "general" or data is None:
        return _general_image(c, classes, coll)
    return _hyperelliptic_image(c, data, classes, coll)


def _weakly_fixed_in_model(G: MetricGraph, data: CoverHyperellipticData):
    """Model in which the base involution flips no edge, with the weakly fixed tree in it."""
    tf = data.weakly_fixed_tree
    H, jH, halves = split_reversed(G, data.j)
    if tf.is_midpoint:
        return H, jH, {H.edge(halves[tf.midpoint_of][0]).dst}, set()
    return H, jH, set(tf.vertices), set(tf.edges)


def weakly_fixed_disconnects(G: MetricGraph, data: CoverHyperellipticData) -> bool:
    """False exactly when the weakly fixed tree is one point whose removal leaves G connected."""
    H, _, tverts, tedges = _weakly_fixed_in_model(G, data)
    if len(tverts) != 1 or tedges:
        return True
    (x,) = tverts
    return not H.subgraph(v for v in H.vertices if v != x).is_connected()


def gamma_dagger(G: MetricGraph, data: CoverHyperellipticData) -> MetricGraph:
    """Graph built from the base by cutting along the weakly fixed tree.

    If the tree is a single point whose removal keeps the graph connected,
    its adjacent edges are deleted.  Otherwise it is replaced by two copies
    stretched by 2, each pair of swapped edges at the tree sending one edge
    to each copy.  All bridges are contracted at the end.
    """
    H, jH, tverts, tedges = _weakly_fixed_in_model(G, data)
    if not weakly_fixed_disconnects(G, data):
        (x,) = tverts
        rest = H.subgraph(v for v in H.vertices if v != x)
        return contract_edges(rest, bridges(rest))[0]

    def copy(v: str, k: int) -> str:
        return f"{v}^{k}"

    verts = [v for v in H.vertices if v not in tverts] + [copy(v, k) for v in tverts for k in (1, 2)]
    edges = []
    for f in sorted(tedges):
        e = H.edge(f)
        for k in (1, 2):
            edges.append(Edge(f"{f}^{k}", copy(e.src, k), copy(e.dst, k), 2 * e.length))
    for e in H.edges:
        if e.id in tedges:
            continue
        partner = jH.edge_map[e.id]
        ends = []
        for w in (e.src, e.dst):
            if w in tverts:
                if partner == e.id:
                    raise FixedLocusError(f"edge {e.id} at the weakly fixed tree is not swapped")
                ends.append(copy(w, 1 if e.id < partner else 2))
            else:
                ends.append(w)
        edges.append(Edge(e.id, ends[0], ends[1], e.length))
    D = MetricGraph(verts, edges)
    if not D.is_connected():
        raise FixedLocusError("cutting along the weakly fixed tree disconnected the graph")
    return contract_edges(D, bridges(D))[0]


def psi_harmonic_degree(c: DoubleCover, check: bool = True) -> int | None:
    """Degree of the Abel-Prym map onto its image if harmonic, else None.

    The image is built by the general route.  With ``check`` the answer
    is compared against a direct hyperellipticity search on the total
    graph, and a disagreement raises.
    """
    r = abel_prym_graph(c, route="general")
    d = harmonic_degree(r.psi)
    if check:
        hyp = hyperelliptic_certificate(c.total) is not None
        if (d == 2) != hyp:
            raise RouteMismatch(f"harmonic degree {d} but total hyperelliptic = {hyp}")
    return d


def pushforward_cycle(r: AbelPrymResult, v: CycleVector) -> CycleVector:
    out: dict[str, int] = defaultdict(int)
    psi = r.psi
    for e, k in v.items():
        for p in r.pieces.get(e, (e,)):
            f = psi.edge_map[p]
            if f is not None:
                out[f] += k * psi.orientation[p]
    return CycleVector(out)
