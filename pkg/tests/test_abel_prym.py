from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

import oracles
from conftest import graphs_with_voltage
from tprym import catalogue
from tprym.abel_prym import (
    EdgeClass,
    PrymCoordinates,
    abel_prym_graph,
    classify_by_basis,
    classify_by_connectivity,
    collapsible_locus,
    cyclic_pair_count,
    fibre,
    gamma_dagger,
    psi_equal,
    psi_harmonic_degree,
    pushforward_cycle,
    weakly_fixed_disconnects,
)
from tprym.double_cover import Voltage, derive_cover
from tprym.graph_core import MetricGraph, PointOnGraph, canonical_loopless_model, genus, graphs_isomorphic, is_two_edge_connected
from tprym.hyperelliptic import cover_hyperelliptic_data, is_hyperelliptic
from tprym.morphisms import harmonic_degree
from tprym.prym_lattice import CycleVector, cycle_basis, upper_lift_cycles

ISO, DIL, CON = EdgeClass.ISOMETRIC, EdgeClass.DILATED2, EdgeClass.CONTRACTED


def cover(base: str, *crossing: str):
    G = catalogue.base(base)
    return derive_cover(G, Voltage.on_edges(G, crossing))


def two_cycle(length=2) -> MetricGraph:
    return MetricGraph(["u", "v"], [("a", "u", "v", length), ("b", "u", "v", length)])


# collapsible locus

def test_bridges_figure_locus():
    c = catalogue.figure_cover("fig-bridges")
    coll = collapsible_locus(c)
    assert len(coll.bridge_part) == 6
    assert cyclic_pair_count(c) == 1


def test_theta_cover_locus():
    coll = collapsible_locus(catalogue.figure_cover("theta-e1"))
    assert coll.bridge_part == frozenset()
    assert coll.cyclic_part == {"e1+", "e1-"}


def test_k4_single_crossing_pair_disconnects():
    # removing both lifts of the only crossing edge leaves the two sheets apart
    G = catalogue.k4()
    c = cover("K4", "e01")
    tv, te = oracles.total_graph(G, c.voltage.assignment)
    assert oracles.components(tv, te, {("e01", 0), ("e01", 1)}) == 2
    assert collapsible_locus(c).cyclic_part == {"e01+", "e01-"}


def test_k4_triangle_voltage_has_empty_locus():
    coll = collapsible_locus(cover("K4", "e12", "e13", "e23"))
    assert not coll.bridge_part and not coll.cyclic_part


@pytest.mark.parametrize("name", ["K4", "theta", "banana", "triangle"])
def test_cyclic_part_matches_brute_force(name):
    from tprym.double_cover import connected_covers

    G = catalogue.base(name)
    for c in connected_covers(G):
        tv, te = oracles.total_graph(G, c.voltage.assignment)
        expected = {f"{e}{s}" for e in G.edge_ids if oracles.components(tv, te, {(e, 0), (e, 1)}) > 1 for s in "+-"}
        assert collapsible_locus(c).cyclic_part == expected


@pytest.mark.parametrize("name", catalogue.hyperelliptic_bases())
def test_hyperelliptic_covers_have_at_most_one_cyclic_pair(name):
    from tprym.double_cover import connected_covers

    for c in connected_covers(catalogue.base(name)):
        if cover_hyperelliptic_data(c) is not None:
            assert cyclic_pair_count(c) in (0, 1)


# edge classes

def test_dumbbell_bridge_lifts_dilated_when_both_loops_cross():
    c = cover("dumbbell", "la/0", "lb/0")
    assert classify_by_connectivity(c)["br+"] is DIL
    assert classify_by_basis(c)["br-"] is DIL


def test_dumbbell_bridge_lifts_contracted_when_one_loop_crosses():
    c = cover("dumbbell", "la/0")
    assert classify_by_connectivity(c)["br+"] is CON
    assert classify_by_basis(c)["br-"] is CON


def test_theta_cover_classes():
    c = catalogue.figure_cover("theta-e1")
    expected = {"e1+": CON, "e1-": CON, "e2+": ISO, "e2-": ISO, "e3+": ISO, "e3-": ISO}
    assert classify_by_connectivity(c) == expected
    assert classify_by_basis(c) == expected


@given(graphs_with_voltage(max_vertices=4, max_extra=4))
def test_classification_rules_agree(data):
    G, w = data
    c = derive_cover(G, w)
    assume(c.is_connected() and genus(G) >= 2)
    assert classify_by_connectivity(c) == classify_by_basis(c)


# Ψ equality and fibres

def test_psi_equal_examples():
    c = catalogue.figure_cover("theta-e1")
    p = PointOnGraph("e2+", Fraction(1, 3))
    assert psi_equal(c, p, p)
    assert not psi_equal(c, p, PointOnGraph("e2-", Fraction(1, 2)))
    # q = ι j̃ p, reflecting the offset when the composite reverses the edge
    jt = cover_hyperelliptic_data(c).jtilde
    f = c.iota.edge_map[jt.edge_map["e2+"]]
    flipped = jt.orientation["e2+"] * c.iota.orientation[jt.edge_map["e2+"]] == -1
    q = PointOnGraph(f, 1 - p.offset if flipped else p.offset)
    assert psi_equal(c, p, q)


@given(graphs_with_voltage(max_vertices=4, max_extra=3), st.integers(0, 10**6))
def test_linear_equivalence_and_coordinates_agree(data, seed):
    G, w = data
    c = derive_cover(G, w)
    assume(c.is_connected() and genus(G) >= 2)
    rng = random.Random(seed)
    coords = PrymCoordinates(c)
    T = c.total
    for _ in range(4):
        e, f = rng.choice(T.edges), rng.choice(T.edges)
        p = PointOnGraph(e.id, e.length * Fraction(rng.randint(0, 6), 6))
        q = PointOnGraph(f.id, f.length * Fraction(rng.randint(0, 6), 6))
        assert psi_equal(c, p, q) == coords.same_image(p, q)


def test_fibres_on_theta_cover():
    c = catalogue.figure_cover("theta-e1")
    coords = PrymCoordinates(c)
    p = PointOnGraph("e2+", Fraction(1, 3))
    found = fibre(coords, p)
    assert p in found and len(found) == 2
    assert fibre(coords, PointOnGraph("e1+", Fraction(1, 2))) is None


# γ†

def test_gamma_dagger_theta_is_a_circle():
    c = catalogue.figure_cover("theta-e1")
    data = cover_hyperelliptic_data(c)
    assert not weakly_fixed_disconnects(c.base, data)
    D = gamma_dagger(c.base, data)
    assert genus(D) == 1 and D.total_length() == 2


def test_gamma_dagger_figure_eight_is_a_two_cycle():
    c = cover("figure-eight", "l1/0", "l2/0")
    data = cover_hyperelliptic_data(c)
    assert data.weakly_fixed_tree.vertices == {"c"}
    assert weakly_fixed_disconnects(c.base, data)
    D = canonical_loopless_model(gamma_dagger(c.base, data))
    assert genus(D) == 1
    assert len(D.edges) == 2


def test_gamma_dagger_dumbbell_doubles_the_bridge():
    c = cover("dumbbell", "la/0", "lb/0")
    data = cover_hyperelliptic_data(c)
    assert "br" in data.weakly_fixed_tree.edges
    D = gamma_dagger(c.base, data)
    assert genus(D) == 1
    assert sorted(e.length for e in D.edges if e.id.startswith("br")) == [2, 2]


# image graph

def test_theta_cover_image_is_circle_of_length_two():
    c = catalogue.figure_cover("theta-e1")
    for route in ("general", "hyperelliptic"):
        r = abel_prym_graph(c, route=route)
        assert genus(r.image) == 1
        assert r.image.total_length() == 2
        assert graphs_isomorphic(canonical_loopless_model(r.image), two_cycle(1)) is not None


def test_counterexample_image_is_chain_of_two_loops():
    # two loops wedged at one point, as drawn
    r = abel_prym_graph(catalogue.figure_cover("fig-counterexamplebigonal"))
    assert genus(r.image) == 2
    assert is_two_edge_connected(r.image)
    (hub,) = [v for v in r.image.vertices if r.image.valency(v) == 4]
    assert not r.image.subgraph(v for v in r.image.vertices if v != hub).is_connected()


def test_hyptype_image_identifies_and_contracts():
    c = catalogue.figure_cover("fig-hyptype")
    r = abel_prym_graph(c)
    assert r.collapsible.cyclic_part == {"ac1+", "ac1-"}
    assert r.psi.edge_map["ac2+"] == r.psi.edge_map["ac2-"]
    assert r.psi.edge_map["ac1+"] is None
    assert harmonic_degree(r.psi) is None


def test_routes_agree_on_catalogue_hyperelliptic_covers():
    from tprym.verification import hyperelliptic_catalogue_covers

    for _, c, _ in hyperelliptic_catalogue_covers()[:12]:
        a = abel_prym_graph(c, route="general").image
        b = abel_prym_graph(c, route="hyperelliptic").image
        assert graphs_isomorphic(canonical_loopless_model(a), canonical_loopless_model(b)) is not None


# harmonicity

def test_harmonic_degree_examples():
    assert psi_harmonic_degree(catalogue.figure_cover("theta-e1")) == 2
    assert psi_harmonic_degree(catalogue.figure_cover("fig-nonhyptype")) is None


def test_dumbbell_both_loops_is_harmonic_of_degree_two():
    c = cover("dumbbell", "la/0", "lb/0")
    assert harmonic_degree(abel_prym_graph(c, route="general").psi) == 2
    assert is_hyperelliptic(c.total)


@given(graphs_with_voltage(max_vertices=3, max_extra=3))
def test_harmonic_iff_hyperelliptic_on_random_covers(data):
    G, w = data
    assume(is_two_edge_connected(G) and genus(G) >= 2)
    c = derive_cover(G, w)
    assume(c.is_connected())
    T = canonical_loopless_model(c.total)
    assume(len(T.vertices) <= 7)
    hyp = oracles.tree_involution_exists(T)
    assert (psi_harmonic_degree(c, check=False) == 2) == hyp


# pushforward

def test_pushforward_of_upper_lift_generates_image():
    c = catalogue.figure_cover("theta-e1")
    r = abel_prym_graph(c, route="general")
    (gen,) = cycle_basis(r.image)
    (up,) = [u for u in upper_lift_cycles(c, ["e3"], "e1") if u]
    image = pushforward_cycle(r, up)
    assert image in (gen, -gen)


def test_pushforward_of_zero():
    r = abel_prym_graph(catalogue.figure_cover("theta-e1"))
    assert pushforward_cycle(r, CycleVector()) == CycleVector()
