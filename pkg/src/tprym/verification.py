"""The catalogue verification suite: one exact check per acceptance criterion."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import catalogue
from .abel_prym import (
    PrymCoordinates,
    abel_prym_graph,
    classify_by_basis,
    classify_by_connectivity,
    collapsible_locus,
    cyclic_pair_count,
    fibre,
    gamma_dagger,
    psi_harmonic_degree,
    pushforward_cycle,
    segment_count,
    weakly_fixed_disconnects,
)
from .bigonal import bigonal, bigonal_round_trip, compare_with_abel_prym, prym_scalar
from .double_cover import DoubleCover, Voltage, connected_covers, cover_isomorphism_witness, covers_isomorphic, derive_cover, enumerate_covers
from .graph_core import MetricGraph, PointOnGraph, UnionFind, genus, isomorphic_up_to_model, subdivide, vertex_point
from .hyperelliptic import count_hyperelliptic_covers, cover_hyperelliptic_data, hyperelliptic_certificate
from .prym_lattice import (
    AbelJacobi,
    CycleVector,
    Divisor,
    antisym_basis,
    cycle_basis,
    gram,
    jacobian,
    pptav_isomorphic,
    upper_lift_cycles,
)

SEED = 20240607


@dataclass
class CriterionResult:
    number: int
    title: str
    ok: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.ok else 'FAIL'}] {self.number:>2}. {self.title}"


def hyperelliptic_catalogue_covers():
    """(base name, cover, hyperelliptic data) for every hyperelliptic connected cover."""
    out = []
    for name in catalogue.hyperelliptic_bases():
        for c in connected_covers(catalogue.base(name)):
            data = cover_hyperelliptic_data(c)
            if data is not None:
                out.append((name, c, data))
    return out


def check_fixed_points() -> CriterionResult:
    names = ["theta", "dumbbell", "figure-eight", "chain-2", "chain-3", "chain-4", "chain-5"]
    detail, ok = {}, True
    for n in names:
        G = catalogue.base(n)
        cert = hyperelliptic_certificate(G)
        count = None if cert is None else len(cert.fixed_points)
        detail[n] = {"genus": genus(G), "fixed_points": count}
        ok &= count == genus(G) + 1
    return CriterionResult(1, "fixed points of the hyperelliptic involution number g+1", ok, detail)


def check_census() -> CriterionResult:
    expected = {"theta": (3, 3), "dumbbell": (3, 3), "chain-3": (7, 4), "chain-4": (15, 5)}
    detail, ok = {}, True
    for n, want in expected.items():
        G = catalogue.base(n)
        conn, hyp, _ = count_hyperelliptic_covers(G)
        g = genus(G)
        detail[n] = [conn, hyp]
        ok &= (conn, hyp) == want == (2 ** g - 1, g + 1)
    return CriterionResult(2, "hyperelliptic cover census (2^g-1 connected, g+1 hyperelliptic)", ok, detail)


def check_harmonic_iff_hyperelliptic() -> CriterionResult:
    mismatches, total = [], 0
    for n in catalogue.two_edge_connected_bases():
        G = catalogue.base(n)
        if genus(G) < 2:
            continue
        for c in connected_covers(G):
            total += 1
            harmonic = psi_harmonic_degree(c, check=False) == 2
            hyp = hyperelliptic_certificate(c.total) is not None
            if harmonic != hyp:
                mismatches.append((n, c.voltage.support()))
    return CriterionResult(3, "Abel-Prym map harmonic of degree 2 iff total graph hyperelliptic",
                           not mismatches, {"covers": total, "mismatches": mismatches})


def check_image_genus(covers=None) -> CriterionResult:
    covers = hyperelliptic_catalogue_covers() if covers is None else covers
    bad = []
    for n, c, data in covers:
        r = abel_prym_graph(c, data=data)
        dagger = gamma_dagger(c.base, data)
        if genus(r.image) != genus(c.base) - 1 or isomorphic_up_to_model(r.image, dagger) is None:
            bad.append((n, c.voltage.support()))
    return CriterionResult(4, "image genus g-1 and Gamma-dagger isomorphic to the quotient image",
                           not bad, {"covers": len(covers), "failures": bad})


def check_pptav(covers=None, bound: int = 3) -> CriterionResult:
    covers = hyperelliptic_catalogue_covers() if covers is None else covers
    bad = []
    for n, c, data in covers:
        r = abel_prym_graph(c, data=data)
        ups = upper_lift_cycles(c)
        vs = [g - CycleVector({c.iota.edge_map[x]: k for x, k in g.items()}) for g in ups]
        prym_form = gram(c.total, vs, half=True)
        image_form = gram(r.image, [pushforward_cycle(r, g) for g in ups])
        iso = pptav_isomorphic(prym_form, jacobian(r.image), bound)
        if prym_form != image_form or iso is None:
            bad.append((n, c.voltage.support()))
    return CriterionResult(5, "Prym Gram equals Jacobian Gram of the image; lattice isometry found",
                           not bad, {"covers": len(covers), "failures": bad})


def check_edge_rules() -> CriterionResult:
    edges, bad = 0, []
    for n in sorted(catalogue.BASES):
        for c in connected_covers(catalogue.base(n)):
            a, b = classify_by_connectivity(c), classify_by_basis(c)
            edges += len(a)
            bad.extend((n, e) for e in a if a[e] != b[e])
    return CriterionResult(6, "connectivity and lattice edge rules agree", not bad, {"edges": edges, "disagreements": bad})


def check_collapsible(covers=None) -> CriterionResult:
    covers = hyperelliptic_catalogue_covers() if covers is None else covers
    c = catalogue.figure_cover("fig-bridges")
    coll = collapsible_locus(c)
    bridge_segments = segment_count(c.total, coll.bridge_part)
    pairs = cyclic_pair_count(c, coll.cyclic_part)
    ok = bridge_segments == 6 and len(coll.bridge_part) == 6 and pairs == 1
    bad = []
    for n, cov, data in covers:
        k = cyclic_pair_count(cov)
        # one pair exactly when the weakly fixed tree is a non-separating point
        if k not in (0, 1) or (k == 1) == weakly_fixed_disconnects(cov.base, data):
            bad.append((n, cov.voltage.support(), k))
    return CriterionResult(7, "collapsible locus: six bridges and one pair; at most one pair when hyperelliptic",
                           ok and not bad, {"bridges": bridge_segments, "pairs": pairs, "failures": bad})


def sample_points(c: DoubleCover, n: int, rng: random.Random) -> list[PointOnGraph]:
    coll = collapsible_locus(c).edges
    edges = [e for e in c.total.edges if e.id not in coll]
    out = []
    for _ in range(n):
        e = rng.choice(edges)
        out.append(PointOnGraph(e.id, e.length * Fraction(rng.randint(1, 996), 997)))
    return out


def check_fibres(points_per_cover: int = 1000) -> CriterionResult:
    rng = random.Random(SEED)
    detail, ok = {}, True
    for name in sorted(catalogue.FIGURE_COVERS):
        c = catalogue.figure_cover(name)
        coords = PrymCoordinates(c)
        largest, infinite = 0, 0
        for p in sample_points(c, points_per_cover, rng):
            f = fibre(coords, p)
            if f is None:
                infinite += 1
                continue
            largest = max(largest, len(f))
        detail[name] = {"largest": largest, "infinite": infinite}
        ok &= largest <= 2 and infinite == 0
    return CriterionResult(8, "Abel-Prym fibres have at most two points", ok, detail)


def check_bigonal(covers=None) -> CriterionResult:
    covers = hyperelliptic_catalogue_covers() if covers is None else covers
    detail, ok = {"finite": 0, "scalars": set(), "failures": []}, True
    for n, c, data in covers:
        out = bigonal(c)
        cmp = compare_with_abel_prym(c, out)
        trip = bigonal_round_trip(c, out)
        s = prym_scalar(c, out)
        if cmp.mode == "abel-prym":
            detail["finite"] += 1
        detail["scalars"].add(s)
        if len(out.components) != 2 or not cmp.matches or not trip or s is None:
            detail["failures"].append((n, c.voltage.support()))
            ok = False
    scalars = detail["scalars"]
    ok &= len(scalars) == 1
    detail["scalars"] = sorted(str(s) for s in scalars)
    return CriterionResult(9, "bigonal output: two components, round trip, Prym scalar", ok, detail)


def _random_tree(G: MetricGraph, rng: random.Random) -> list[str]:
    order = list(G.edge_ids)
    rng.shuffle(order)
    uf = UnionFind(G.vertices)
    return [e for e in order if uf.union(G.edge(e).src, G.edge(e).dst)]


def _random_point(G: MetricGraph, rng: random.Random) -> PointOnGraph:
    e = rng.choice(G.edges)
    return PointOnGraph(e.id, e.length * Fraction(rng.randint(0, 12), 12))


def _fired_pair(G: MetricGraph, rng: random.Random) -> tuple[Divisor, Divisor]:
    """val(v) chips at v against one chip a short distance along each edge at v."""
    v = rng.choice(G.vertices)
    inc = [e for e in G.incident(v) if not e.is_loop]
    eps = min(e.length for e in inc) * Fraction(rng.randint(1, 9), 10)
    moved = [PointOnGraph(e.id, eps if e.src == v else e.length - eps) for e in inc]
    rest = [(_random_point(G, rng), 1) for _ in range(rng.randint(0, 2))]
    return Divisor(((vertex_point(G, v), len(inc)),) + tuple(rest)), Divisor(tuple((p, 1) for p in moved) + tuple(rest))


def _random_pair(G: MetricGraph, rng: random.Random) -> tuple[Divisor, Divisor]:
    if rng.random() < 0.5:
        return _fired_pair(G, rng)
    d = rng.randint(1, 3)
    return (Divisor(tuple((_random_point(G, rng), 1) for _ in range(d))),
            Divisor(tuple((_random_point(G, rng), 1) for _ in range(d))))


def check_oracles(trials: int = 100) -> CriterionResult:
    rng = random.Random(SEED)
    detail, ok = {}, True

    # cover isomorphism against a commuting-isomorphism search
    compared, bad = 0, []
    for n in sorted(catalogue.BASES):
        G = catalogue.base(n)
        if len(G.edges) > 10:
            continue
        reps = [derive_cover(G, w) for w, _ in enumerate_covers(G)]
        for bits in range(2 ** len(G.edges)):
            w = {e: (bits >> i) & 1 for i, e in enumerate(G.edge_ids)}
            c = derive_cover(G, Voltage(G, w))
            for r in reps:
                compared += 1
                if covers_isomorphic(c, r) != (cover_isomorphism_witness(c, r) is not None):
                    bad.append((n, bits))
    detail["cover_pairs"] = compared
    ok &= not bad

    # Gram matrices against a direct double sum
    gram_bad = 0
    for n in sorted(catalogue.BASES):
        G = catalogue.base(n)
        pairs = [(G, cycle_basis(G), False)]
        for c in connected_covers(G)[:3]:
            pairs.append((c.total, antisym_basis(c), True))
        for H, basis, half in pairs:
            M = gram(H, basis, half).gram
            for i, a in enumerate(basis):
                for j, b in enumerate(basis):
                    s = Fraction(0)
                    for e in H.edges:
                        s += a[e.id] * b[e.id] * e.length
                    if half:
                        s /= 2
                    gram_bad += M[i][j] != s
    detail["gram_mismatches"] = gram_bad
    ok &= gram_bad == 0

    # linear equivalence under subdivision and under tree / root changes
    names = sorted(catalogue.BASES)
    sub_bad = path_bad = 0
    verdicts = {True: 0, False: 0}
    for _ in range(trials):
        G = catalogue.base(rng.choice(names))
        D1, D2 = _random_pair(G, rng)
        ref = AbelJacobi(G).equivalent(D1, D2)
        verdicts[ref] += 1
        e = rng.choice(G.edges)
        H, carry = subdivide(G, e.id, [e.length * Fraction(k, 5) for k in sorted(rng.sample(range(1, 5), rng.randint(1, 3)))])
        moved = [Divisor(tuple((carry(p), k) for p, k in D.support)) for D in (D1, D2)]
        sub_bad += AbelJacobi(H).equivalent(*moved) != ref
        other = AbelJacobi(G, tree=_random_tree(G, rng), root=rng.choice(G.vertices))
        path_bad += other.equivalent(D1, D2) != ref
    detail.update(subdivision_mismatches=sub_bad, path_mismatches=path_bad,
                  equivalent=verdicts[True], inequivalent=verdicts[False])
    ok &= sub_bad == 0 and path_bad == 0 and verdicts[True] > 0 and verdicts[False] > 0
    return CriterionResult(10, "oracle equivalences: cover isomorphism, Gram sums, linear equivalence", ok, detail)


CRITERIA: list[Callable[[], CriterionResult]] = [
    check_fixed_points,
    check_census,
    check_harmonic_iff_hyperelliptic,
    check_image_genus,
    check_pptav,
    check_edge_rules,
    check_collapsible,
    check_fibres,
    check_bigonal,
    check_oracles,
]


def run_all() -> list[CriterionResult]:
    covers = hyperelliptic_catalogue_covers()
    out = []
    for check in CRITERIA:
        if check in (check_image_genus, check_pptav, check_collapsible, check_bigonal):
            out.append(check(covers))
        else:
            out.append(check())
    return out
