from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

import oracles
from conftest import connected_graphs, graphs_with_voltage
from tprym import catalogue, linalg
from tprym.double_cover import Voltage, derive_cover
from tprym.graph_core import MetricGraph, PointOnGraph, genus, spanning_tree, subdivide, vertex_point
from tprym.hyperelliptic import cover_hyperelliptic_data
from tprym.prym_lattice import (
    CycleVector,
    DegreeMismatch,
    Divisor,
    Pptav,
    antisym_basis,
    apply_iota,
    cycle_basis,
    gram,
    is_cycle,
    jacobian,
    linear_equivalent,
    lll_reduce,
    pptav_isomorphic,
    prym,
)


def two_cycle(length=1) -> MetricGraph:
    return MetricGraph(["u", "v"], [("e1", "u", "v", length), ("e2", "u", "v", length)])


def form(rows) -> Pptav:
    return Pptav(len(rows), tuple(tuple(Fraction(x) for x in r) for r in rows))


# cycle bases

def test_theta_fundamental_cycles():
    assert cycle_basis(catalogue.theta(), ["e3"]) == [CycleVector({"e1": 1, "e3": -1}), CycleVector({"e2": 1, "e3": -1})]


def test_tree_has_no_cycles():
    path = MetricGraph("abc", [("x", "a", "b", 1), ("y", "b", "c", 2)])
    assert cycle_basis(path) == []


def test_two_cycle_basis():
    assert cycle_basis(two_cycle(), ["e2"]) == [CycleVector({"e1": 1, "e2": -1})]


@given(connected_graphs(loops=True))
def test_cycle_basis_size_and_closure(G):
    basis = cycle_basis(G)
    assert len(basis) == genus(G)
    assert all(is_cycle(G, v) for v in basis)


# antisymmetric basis

def test_theta_cover_antisymmetric_vector():
    c = catalogue.figure_cover("theta-e1")
    assert antisym_basis(c, tree=["e3"], eg="e1") == [CycleVector({"e2+": 1, "e3+": -1, "e2-": -1, "e3-": 1})]


def test_circle_cover_has_empty_prym():
    C = two_cycle(2)
    c = derive_cover(C, Voltage.on_edges(C, ["e1"]))
    assert antisym_basis(c) == []
    assert prym(c).rank == 0


def test_chain_cover_entries_are_small():
    G = catalogue.chain_of_loops(3)
    c = catalogue.figure_cover("fig-counterexamplebigonal")
    assert cover_hyperelliptic_data(c) is not None
    basis = antisym_basis(c)
    assert len(basis) == genus(G) - 1
    assert {k for v in basis for _, k in v.items()} <= {-2, -1, 1, 2}


@given(graphs_with_voltage(max_vertices=4, max_extra=3))
def test_antisymmetric_basis_properties(data):
    G, w = data
    c = derive_cover(G, w)
    assume(c.is_connected())
    basis = antisym_basis(c)
    assert len(basis) == genus(G) - 1
    for v in basis:
        assert is_cycle(c.total, v)
        assert apply_iota(c, v) == -v
    if basis:
        assert linalg.det(prym(c).matrix()) > 0


# Gram matrices

def test_theta_gram():
    T = catalogue.theta()
    assert gram(T, cycle_basis(T), half=False).matrix() == [[2, 1], [1, 2]]


def test_theta_cover_prym_gram():
    c = catalogue.figure_cover("theta-e1")
    assert gram(c.total, antisym_basis(c, ["e3"], "e1"), half=True).matrix() == [[2]]


def test_circle_gram_is_length():
    assert jacobian(two_cycle(Fraction(5, 6))).matrix() == [[Fraction(5, 3)]]
    assert jacobian(catalogue.circle(Fraction(7, 2))).matrix() == [[Fraction(7, 2)]]


@given(connected_graphs(loops=True), st.booleans())
def test_gram_matches_pairing_sum(G, half):
    basis = cycle_basis(G)
    expected = oracles.gram(G, [v.to_dict() for v in basis], half)
    assert gram(G, basis, half).matrix() == expected


@given(graphs_with_voltage(max_vertices=4, max_extra=3))
def test_prym_gram_matches_pairing_sum(data):
    G, w = data
    c = derive_cover(G, w)
    assume(c.is_connected() and genus(G) >= 2)
    basis = antisym_basis(c)
    assert prym(c).matrix() == oracles.gram(c.total, [v.to_dict() for v in basis], half=True)


def test_pptav_rejects_bad_forms():
    with pytest.raises(ValueError):
        form([[1, 2], [3, 1]])
    with pytest.raises(ValueError):
        form([[1, 2], [2, 1]])


# linear equivalence

def test_equal_divisors_are_equivalent():
    p = PointOnGraph("e1", Fraction(1, 3))
    assert linear_equivalent(catalogue.theta(), Divisor.of(p), Divisor.of(p))


def test_distinct_points_on_circle_are_not_equivalent():
    C = two_cycle()
    p, q = PointOnGraph("e1", Fraction(1, 4)), PointOnGraph("e2", Fraction(1, 2))
    assert not linear_equivalent(C, Divisor.of(p), Divisor.of(q))


def test_degree_mismatch_raises():
    p = PointOnGraph("e1", Fraction(1, 3))
    with pytest.raises(DegreeMismatch):
        linear_equivalent(catalogue.theta(), Divisor.of(p), Divisor.of((p, 2)))


def test_hyperelliptic_fibre_divisors_are_equivalent():
    # p - ιp ~ q - ιq for q = ι j̃ p, checked at every vertex of the total
    c = catalogue.figure_cover("theta-e1")
    jt = cover_hyperelliptic_data(c).jtilde
    iota = c.iota.vertex_map
    point = lambda v: vertex_point(c.total, v)
    for v in c.total.vertices:
        q = iota[jt.vertex_map[v]]
        D1 = Divisor.of(point(v)) - Divisor.of(point(iota[v]))
        D2 = Divisor.of(point(q)) - Divisor.of(point(iota[q]))
        assert linear_equivalent(c.total, D1, D2)


def chip_fire(G: MetricGraph, v: str, t: Fraction) -> Divisor:
    """Principal divisor of firing a distance-t neighbourhood of vertex v."""
    terms = []
    for e in G.incident(v):
        if e.src == v:
            terms.append((PointOnGraph(e.id, t), 1))
        if e.dst == v:
            terms.append((PointOnGraph(e.id, e.length - t), 1))
    return Divisor(tuple(terms)) - Divisor.of((vertex_point(G, v), G.valency(v)))


@given(connected_graphs(max_vertices=4, max_extra=3), st.integers(0, 10**6))
def test_chip_firing_gives_equivalent_divisors(G, seed):
    rng = random.Random(seed)
    v = rng.choice(G.vertices)
    t = min(e.length for e in G.incident(v)) * Fraction(rng.randint(1, 9), 10)
    p = PointOnGraph(G.edges[0].id, G.edges[0].length / 3)
    D = Divisor.of(p)
    assert linear_equivalent(G, D, D + chip_fire(G, v, t))


@given(connected_graphs(max_vertices=4, max_extra=3), st.integers(0, 10**6))
def test_equivalence_independent_of_tree_root_and_subdivision(G, seed):
    rng = random.Random(seed)
    pts = [PointOnGraph(e.id, e.length * Fraction(rng.randint(0, 4), 4)) for e in rng.choices(G.edges, k=4)]
    D1, D2 = Divisor.of(pts[0], pts[1]), Divisor.of(pts[2], pts[3])
    expected = linear_equivalent(G, D1, D2)
    root = rng.choice(G.vertices)
    assert linear_equivalent(G, D1, D2, spanning_tree(G, root), root) == expected
    e = rng.choice(G.edges)
    H, carry = subdivide(G, e.id, [e.length / 3])
    lift = lambda D: Divisor(tuple((carry(p), k) for p, k in D.support))
    assert linear_equivalent(H, lift(D1), lift(D2)) == expected


# lattice isometry

def test_pptav_examples():
    assert pptav_isomorphic(form([[2]]), form([[2]])) in ([[1]], [[-1]])
    U = pptav_isomorphic(form([[2, 1], [1, 2]]), form([[2, -1], [-1, 2]]))
    assert U is not None
    A = form([[2, 1], [1, 2]]).matrix()
    B = form([[2, -1], [-1, 2]]).matrix()
    assert abs(linalg.det(linalg.to_matrix(U))) == 1
    assert linalg.congruence(linalg.to_matrix(U), A) == B
    assert pptav_isomorphic(form([[1]]), form([[2]])) is None


@st.composite
def unimodular(draw, n):
    U = linalg.identity(n)
    for _ in range(draw(st.integers(0, 6))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if i == j:
            continue
        k = draw(st.sampled_from([-1, 1]))
        U = [[U[r][c] + (k * U[j][c] if r == i else 0) for c in range(n)] for r in range(n)]
    return U


@given(st.data())
def test_pptav_finds_random_transforms(data):
    G = data.draw(st.sampled_from([catalogue.theta(1, 2, 3), catalogue.k4(), catalogue.chain_of_loops(3)]))
    J = jacobian(G)
    U = data.draw(unimodular(J.rank))
    moved = linalg.congruence(U, J.matrix())
    K = Pptav(J.rank, tuple(tuple(r) for r in moved))
    W = pptav_isomorphic(J, K, bound=3)
    assert W is not None
    assert linalg.congruence(linalg.to_matrix(W), J.matrix()) == K.matrix()


def test_lll_keeps_the_lattice():
    A = [[Fraction(x) for x in r] for r in ([10, 7], [7, 5])]
    U = lll_reduce(A)
    assert abs(linalg.det(U)) == 1
    R = linalg.congruence(U, A)
    assert R[0][0] <= A[0][0]
    assert R[0][0] == 1
