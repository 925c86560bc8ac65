from __future__ import annotations

from fractions import Fraction

import pytest

from tprym import catalogue
from tprym.abel_prym import abel_prym_graph
from tprym.bigonal import (
    NotQuotientTower,
    bigonal,
    bigonal_involutive,
    bigonal_matches_abel_prym,
    bigonal_round_trip,
    compare_with_abel_prym,
    prym_scalar,
)
from tprym.double_cover import DisconnectedCover, Voltage, connected_covers, derive_cover
from tprym.graph_core import MetricGraph, genus, graphs_isomorphic, isomorphic_up_to_model
from tprym.hyperelliptic import NotHyperellipticBase, cover_hyperelliptic_data, hyperelliptic_certificate
from tprym.morphisms import harmonic_degree, quotient_by_involution


def cover(base: str, *crossing: str):
    G = catalogue.base(base)
    return derive_cover(G, Voltage.on_edges(G, crossing))


def prune_leaves(G: MetricGraph) -> MetricGraph:
    while leaves := [v for v in G.vertices if G.valency(v) == 1]:
        G = MetricGraph(
            [v for v in G.vertices if v not in leaves],
            [e for e in G.edges if e.src not in leaves and e.dst not in leaves],
        )
    return G


@pytest.fixture(scope="module")
def theta_out():
    c = catalogue.figure_cover("theta-e1")
    return c, bigonal(c)


def test_theta_output_splits_into_circle_and_tree(theta_out):
    c, out = theta_out
    assert sorted(genus(x) for x in out.components) == [0, 1]
    circle = next(x for x in out.components if genus(x) == 1)
    tree = next(x for x in out.components if genus(x) == 0)
    # the contracted pair e1± survives as two legs of length 1/2
    core = prune_leaves(circle)
    assert core.total_length() == 2 and len(core.edges) == 4
    assert circle.total_length() - core.total_length() == 1
    jt = cover_hyperelliptic_data(c).jtilde
    assert isomorphic_up_to_model(tree, quotient_by_involution(c.total, jt)[0]) is not None


def test_output_is_degree_four_over_a_tree(theta_out):
    _, out = theta_out
    assert harmonic_degree(out.p_tilde) == 4
    assert genus(out.tree) == 0
    assert all(genus(x) == 0 for x in out.pi_quotient.component_graphs())
    assert set(out.p_tilde.slope.values()) <= {1, 2, 4}


def test_theta_matches_abel_prym_after_contraction(theta_out):
    c, out = theta_out
    cmp = compare_with_abel_prym(c, out)
    assert cmp.matches
    assert cmp.mode == "topological-quotient"
    assert cmp.abel_prym_genus == 1


def test_chain_cover_gives_tree_and_genus_two_component():
    c = catalogue.figure_cover("fig-counterexamplebigonal")
    out = bigonal(c)
    assert sorted(genus(x) for x in out.components) == [0, 2]
    assert bigonal_matches_abel_prym(c)


def test_non_hyperelliptic_source_does_not_match():
    c = catalogue.figure_cover("fig-nonhypcase")
    assert cover_hyperelliptic_data(c) is None
    cmp = compare_with_abel_prym(c)
    assert not cmp.matches
    assert cmp.abel_prym_genus == 3
    assert cmp.component_genera == [1, 1]


@pytest.mark.parametrize("base", ["dumbbell", "figure-eight", "chain-2"])
def test_finite_psi_compares_with_image_directly(base):
    modes = []
    for c in connected_covers(catalogue.base(base)):
        if cover_hyperelliptic_data(c) is None:
            continue
        cmp = compare_with_abel_prym(c)
        assert cmp.matches
        modes.append(cmp.mode)
        if cmp.mode == "abel-prym":
            ap = abel_prym_graph(c).image
            assert any(graphs_isomorphic(x, ap) is not None for x in bigonal(c).components)
    assert modes.count("abel-prym") == 1


def test_disconnected_cover_rejected():
    with pytest.raises(DisconnectedCover):
        bigonal(cover("theta"))


def test_needs_hyperelliptic_tower():
    with pytest.raises(NotHyperellipticBase):
        bigonal(catalogue.figure_cover("fig-hyptype"))
    c = catalogue.figure_cover("theta-e1")
    foreign = hyperelliptic_certificate(catalogue.base("figure-eight"))
    with pytest.raises(NotQuotientTower):
        bigonal(c, foreign)


def test_round_trip_theta(theta_out):
    c, out = theta_out
    assert bigonal_round_trip(c, out)


def test_round_trip_dumbbell():
    assert bigonal_involutive(cover("dumbbell", "la/0", "lb/0"))


def test_round_trip_chain():
    assert bigonal_involutive(catalogue.figure_cover("fig-counterexamplebigonal"))


def test_round_trip_distinguishes_covers():
    # running the construction on one cover must not reproduce a different class
    c1 = cover("chain-3", "l1/0")
    c3 = cover("chain-3", "l3/0")
    out = bigonal(c1)
    assert bigonal_round_trip(c1, out)
    out.refined_cover, saved = bigonal(c3).refined_cover, out.refined_cover
    try:
        assert not bigonal_round_trip(c1, out)
    finally:
        out.refined_cover = saved


@pytest.mark.parametrize("name", ["theta-e1", "fig-counterexamplebigonal", "fig-bridges"])
def test_prym_scalar_is_one(name):
    assert prym_scalar(catalogue.figure_cover(name)) == Fraction(1)


def test_prym_scalar_needs_one_positive_component():
    c = catalogue.figure_cover("fig-nonhypcase")
    assert prym_scalar(c) is None


def test_to_dict_lists_components(theta_out):
    _, out = theta_out
    d = out.to_dict()
    assert sorted(x["genus"] for x in d["components"]) == [0, 1]
    assert set(d["edge_types"].values()) <= {1, 2, 4}
