from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import assume, given

import oracles
from conftest import connected_graphs
from tprym import catalogue
from tprym.double_cover import covers_isomorphic, derive_cover
from tprym.graph_core import (
    MetricGraph,
    PointOnGraph,
    bridges,
    canonical_loopless_model,
    genus,
    is_two_edge_connected,
)
from tprym.hyperelliptic import (
    Attachment,
    GenusTooSmall,
    InvalidS,
    LeafEdgePresent,
    NotHyperellipticBase,
    construction_star,
    count_hyperelliptic_covers,
    cover_hyperelliptic_data,
    hyperelliptic_certificate,
    is_hyperelliptic,
    star_classes_equal,
    star_decomposition,
)


def theta_cover(*bits):
    return derive_cover(catalogue.theta(), dict(zip(("e1", "e2", "e3"), bits)))


def theta_star():
    T = catalogue.theta()
    cert = hyperelliptic_certificate(T)
    return T, cert, star_decomposition(T, cert)


def mid(name: str) -> Attachment:
    return Attachment(0, "midpoint", name)


# certificates

def test_theta_certificate_fixes_the_three_midpoints():
    cert = hyperelliptic_certificate(catalogue.theta())
    assert cert is not None
    assert set(cert.fixed_points) == {PointOnGraph(e, Fraction(1, 2)) for e in ("e1", "e2", "e3")}
    assert genus(cert.quotient_tree) == 0


def test_k4_is_not_hyperelliptic():
    assert hyperelliptic_certificate(catalogue.k4()) is None
    assert not oracles.tree_involution_exists(catalogue.k4())


def test_chain_of_three_loops_has_four_fixed_points():
    cert = hyperelliptic_certificate(catalogue.chain_of_loops(3))
    assert len(cert.fixed_points) == 4


@pytest.mark.parametrize("name", ["theta", "dumbbell", "figure-eight", "chain-2", "chain-3", "chain-4", "chain-5"])
def test_fixed_point_count_is_genus_plus_one(name):
    G = catalogue.base(name)
    assert len(hyperelliptic_certificate(G).fixed_points) == genus(G) + 1


@pytest.mark.parametrize("name", ["theta", "figure-eight", "banana"])
def test_fixed_vertex_valency(name):
    G = catalogue.base(name)
    assert is_two_edge_connected(G)
    cert = hyperelliptic_certificate(G)
    for comp in cert.fixed_locus:
        for v in comp.vertices:
            rest = MetricGraph(
                [x for x in G.vertices if x != v],
                [(e.id, e.src, e.dst, e.length) for e in G.edges if v not in (e.src, e.dst)],
            )
            assert G.valency(v) == 2 * len(rest.components())


def test_input_checks():
    with pytest.raises(GenusTooSmall):
        hyperelliptic_certificate(catalogue.circle())
    leafy = MetricGraph(["u", "v", "w"], [("e1", "u", "v", 1), ("e2", "u", "v", 2), ("e3", "u", "v", 3), ("leg", "v", "w", 1)])
    with pytest.raises(LeafEdgePresent):
        hyperelliptic_certificate(leafy)


@given(connected_graphs(max_vertices=5, max_extra=4))
def test_certificate_matches_exhaustive_search(G):
    H = canonical_loopless_model(G)
    assume(genus(H) >= 2)
    assume(all(H.valency(v) > 1 for v in H.vertices))
    assume(len(H.vertices) <= 6)
    assert is_hyperelliptic(H) == oracles.tree_involution_exists(H)


# covers

def test_theta_cover_weakly_fixed_tree_is_a_midpoint():
    data = cover_hyperelliptic_data(theta_cover(1, 0, 0))
    assert data.weakly_fixed_tree.midpoint_of == "e1"
    assert data.weakly_fixed_tree.point == PointOnGraph("e1", Fraction(1, 2))


def test_nonhyptype_figure_is_not_hyperelliptic():
    assert cover_hyperelliptic_data(catalogue.figure_cover("fig-nonhyptype")) is None


def test_counterexample_cover_weakly_fixed_tree_in_middle_loop():
    # the total is a chain of 5 loops; the lifts of the weakly fixed point
    # lie on its middle loop, the doubled lift of the crossing end loop
    c = catalogue.figure_cover("fig-counterexamplebigonal")
    comp = cover_hyperelliptic_data(c).weakly_fixed_tree
    assert comp.vertices == {"l1/m"}
    middle = {"l1/0+", "l1/0-", "l1/1+", "l1/1-"}
    assert {v for e in middle for v in (c.total.edge(e).src, c.total.edge(e).dst)} >= {"l1/m+", "l1/m-"}
    arms = c.total.without_edges(middle).component_graphs()
    assert sorted(genus(a) for a in arms if a.edges) == [2, 2]


def test_hyperelliptic_involution_commutes_with_deck():
    c = theta_cover(0, 1, 0)
    data = cover_hyperelliptic_data(c)
    jt, iota = data.jtilde, c.iota
    for v in c.total.vertices:
        assert jt.vertex_map[iota.vertex_map[v]] == iota.vertex_map[jt.vertex_map[v]]


# construction star

def test_star_single_midpoint_gives_first_cover():
    T, cert, data = theta_star()
    assert covers_isomorphic(construction_star(T, cert, [mid("e1")], data), theta_cover(1, 0, 0))


def test_star_empty_set_gives_trivial_cover():
    T, cert, data = theta_star()
    assert not construction_star(T, cert, [], data).is_connected()


def test_star_two_midpoints_is_complement_class():
    T, cert, data = theta_star()
    c = construction_star(T, cert, [mid("e1"), mid("e2")], data)
    assert covers_isomorphic(c, theta_cover(0, 0, 1))
    assert cover_hyperelliptic_data(c) is not None


def test_star_rejects_unknown_points():
    T, cert, data = theta_star()
    with pytest.raises(InvalidS):
        construction_star(T, cert, [Attachment(0, "vertex", "u")], data)


def test_star_class_equality():
    _, _, data = theta_star()
    assert star_classes_equal(data, [mid("e1")], [mid("e2"), mid("e3")])
    assert not star_classes_equal(data, [mid("e1")], [mid("e2")])
    assert star_classes_equal(data, [mid("e2")], [mid("e2")])


# census

@pytest.mark.parametrize(
    "name, expected",
    [("theta", (3, 3)), ("dumbbell", (3, 3)), ("chain-3", (7, 4)), ("chain-4", (15, 5)), ("figure-eight", (3, 3))],
)
def test_census(name, expected):
    conn, hyp, verdicts = count_hyperelliptic_covers(catalogue.base(name))
    assert (conn, hyp) == expected
    assert len(verdicts) == conn


def test_census_witnesses_are_weakly_fixed_attachments():
    G = catalogue.chain_of_loops(3)
    cert = hyperelliptic_certificate(G)
    data = star_decomposition(G, cert)
    for v in count_hyperelliptic_covers(G)[2]:
        if v.hyperelliptic:
            assert covers_isomorphic(construction_star(G, cert, v.star_set, data), derive_cover(G, v.voltage))


def test_census_rejects_non_hyperelliptic_base():
    with pytest.raises(NotHyperellipticBase):
        count_hyperelliptic_covers(catalogue.k4())


def test_bridges_in_chains_are_fixed():
    G = catalogue.chain_of_loops(4)
    cert = hyperelliptic_certificate(G)
    fixed_edges = set().union(*(comp.edges for comp in cert.fixed_locus))
    assert set(bridges(G)) <= fixed_edges
