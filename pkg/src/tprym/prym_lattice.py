"""Cycle lattices, Gram matrices, Abel-Jacobi equivalence and lattice isometries.

Cycles are integer vectors over oriented edges.  The pairing of two
chains is ``sum_e a(e) b(e) length(e)``; the Prym lattice of a double
cover is the lattice of anti-invariant cycles with half that pairing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import linalg
from .double_cover import DisconnectedCover, DoubleCover, gauge_flips, lift_edge
from .graph_core import GraphError, MetricGraph, PointOnGraph, check_point, spanning_tree, tree_paths


class SingularBasis(GraphError):
    pass


class DegreeMismatch(GraphError):
    pass


class RankMismatch(GraphError):
    pass


class CycleVector:
    """Sparse integer chain; zero coefficients are dropped."""

    __slots__ = ("_c",)

    def __init__(self, coefficients: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = coefficients.items() if isinstance(coefficients, Mapping) else coefficients
        c = {}
        for e, k in items:
            c[e] = c.get(e, 0) + k
        self._c = {e: k for e, k in sorted(c.items()) if k}

    def __getitem__(self, e: str) -> int:
        return self._c.get(e, 0)

    def items(self):
        return self._c.items()

    def support(self) -> list[str]:
        return list(self._c)

    def __add__(self, other: CycleVector) -> CycleVector:
        return CycleVector(list(self._c.items()) + list(other._c.items()))

    def __neg__(self) -> CycleVector:
        return CycleVector({e: -k for e, k in self._c.items()})

    def __sub__(self, other: CycleVector) -> CycleVector:
        return self + (-other)

    def __rmul__(self, k: int) -> CycleVector:
        return CycleVector({e: k * x for e, x in self._c.items()})

    def __eq__(self, other):
        return isinstance(other, CycleVector) and self._c == other._c

    def __hash__(self):
        return hash(tuple(self._c.items()))

    def __bool__(self):
        return bool(self._c)

    def __repr__(self):
        terms = " ".join(f"{'+' if k > 0 else '-'}{abs(k) if abs(k) != 1 else ''}{e}" for e, k in self._c.items())
        return f"CycleVector({terms or '0'})"

    def to_dict(self) -> dict[str, int]:
        return dict(self._c)


def boundary(G: MetricGraph, chain: CycleVector) -> dict[str, int]:
    out = {}
    for eid, k in chain.items():
        e = G.edge(eid)
        out[e.dst] = out.get(e.dst, 0) + k
        out[e.src] = out.get(e.src, 0) - k
    return {v: k for v, k in out.items() if k}


def is_cycle(G: MetricGraph, chain: CycleVector) -> bool:
    return not boundary(G, chain)


def pairing(G: MetricGraph, a: CycleVector, b: CycleVector) -> Fraction:
    return sum((k * b[e] * G.edge(e).length for e, k in a.items()), Fraction(0))


def fundamental_cycle(G: MetricGraph, tree: Sequence[str], eid: str, paths=None) -> CycleVector:
    """The cycle of tree + eid, traversing eid along its orientation."""
    if paths is None:
        paths = tree_paths(G, tree, G.vertices[0])
    e = G.edge(eid)
    chain = {eid: 1}
    for x, k in paths[e.src].items():
        chain[x] = chain.get(x, 0) + k
    for x, k in paths[e.dst].items():
        chain[x] = chain.get(x, 0) - k
    return CycleVector(chain)


def cycle_basis(G: MetricGraph, tree: Sequence[str] | None = None) -> list[CycleVector]:
    if not G.is_connected():
        raise GraphError("cycle basis needs a connected graph")
    tree = spanning_tree(G) if tree is None else list(tree)
    root = G.vertices[0]
    paths = tree_paths(G, tree, root)
    in_tree = set(tree)
    return [fundamental_cycle(G, tree, e, paths) for e in G.edge_ids if e not in in_tree]


def upper_lift_cycles(c: DoubleCover, tree: Sequence[str] | None = None, eg: str | None = None) -> list[CycleVector]:
    """Cycles of the total graph whose anti-symmetrizations form a Prym basis.

    The base tree is lifted to two sheets joined by one lift of a
    voltage-1 complement edge ``eg``; every other complement edge e
    contributes the fundamental cycle of its lift starting on the first
    sheet.
    """
    if not c.is_connected():
        raise DisconnectedCover("antisymmetric basis needs a connected cover")
    G = c.base
    tree = spanning_tree(G) if tree is None else list(tree)
    flips = gauge_flips(G, c.voltage.assignment, tree)
    gauged = {e.id: c.voltage[e.id] ^ flips[e.src] ^ flips[e.dst] for e in G.edges}
    in_tree = set(tree)
    complement = [e for e in G.edge_ids if e not in in_tree]
    if eg is None:
        eg = next(e for e in complement if gauged[e] == 1)
    elif eg in in_tree or gauged[eg] != 1:
        raise ValueError(f"{eg} is not a voltage-1 complement edge")

    def upper(eid: str) -> str:
        return lift_edge(eid, flips[G.edge(eid).src])

    lifted_tree = [upper(e) for e in tree] + [lift_edge(e, 1 - flips[G.edge(e).src]) for e in tree] + [upper(eg)]
    T = c.total
    paths = tree_paths(T, lifted_tree, T.vertices[0])
    return [fundamental_cycle(T, lifted_tree, upper(e), paths) for e in complement if e != eg]


def apply_iota(c: DoubleCover, v: CycleVector) -> CycleVector:
    iota = c.iota
    return CycleVector({iota.edge_map[x]: k * iota.orientation[x] for x, k in v.items()})


def antisym_basis(c: DoubleCover, tree: Sequence[str] | None = None, eg: str | None = None) -> list[CycleVector]:
    """Basis of the anti-invariant cycles: gamma - iota(gamma) over the upper lift cycles."""
    return [g - apply_iota(c, g) for g in upper_lift_cycles(c, tree, eg)]


@dataclass(frozen=True)
class Pptav:
    rank: int
    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        g = tuple(tuple(Fraction(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        if len(g) != self.rank or any(len(row) != self.rank for row in g):
            raise ValueError("gram matrix has the wrong shape")
        if any(g[i][j] != g[j][i] for i in range(self.rank) for j in range(i)):
            raise ValueError("gram matrix is not symmetric")
        if not linalg.leading_minors_positive([list(r) for r in g]):
            raise ValueError("gram matrix is not positive definite")

    def matrix(self) -> linalg.Matrix:
        return [list(row) for row in self.gram]

    def scaled(self, s) -> Pptav:
        s = Fraction(s)
        return Pptav(self.rank, tuple(tuple(x * s for x in row) for row in self.gram))

    def det(self) -> Fraction:
        return linalg.det(self.matrix()) if self.rank else Fraction(1)

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.gram]


def gram(G: MetricGraph, basis: Sequence[CycleVector], half: bool = False) -> Pptav:
    factor = Fraction(1, 2) if half else Fraction(1)
    M = [[pairing(G, a, b) * factor for b in basis] for a in basis]
    if basis and linalg.det(M) == 0:
        raise SingularBasis("basis is linearly dependent")
    return Pptav(len(basis), tuple(tuple(r) for r in M))


def jacobian(G: MetricGraph) -> Pptav:
    return gram(G, cycle_basis(G))


def prym(c: DoubleCover) -> Pptav:
    return gram(c.total, antisym_basis(c), half=True)


# ---------------------------------------------------------------------------
# Abel-Jacobi


@dataclass(frozen=True)
class Divisor:
    support: tuple[tuple[PointOnGraph, int], ...]

    @classmethod
    def of(cls, *terms) -> Divisor:
        """Divisor.of(p, q) or Divisor.of((p, 2), (q, -1))."""
        out = []
        for t in terms:
            out.append(t if isinstance(t, tuple) else (t, 1))
        return cls(tuple(out))

    @property
    def degree(self) -> int:
        return sum(k for _, k in self.support)

    def __add__(self, other: Divisor) -> Divisor:
        return Divisor(self.support + other.support)

    def __neg__(self) -> Divisor:
        return Divisor(tuple((p, -k) for p, k in self.support))

    def __sub__(self, other: Divisor) -> Divisor:
        return self + (-other)


class AbelJacobi:
    """Coordinates of 1-chains in the dual of the cycle lattice.

    A chain c maps to x with Gram(x) = (<gamma_i, c>)_i; a degree-zero
    divisor is principal exactly when the chain of any path system
    realizing it has integral x.
    """

    def __init__(self, G: MetricGraph, tree: Sequence[str] | None = None, root: str | None = None):
        if not G.is_connected():
            raise GraphError("Abel-Jacobi map needs a connected graph")
        self.graph = G
        self.tree = spanning_tree(G) if tree is None else list(tree)
        self.root = G.vertices[0] if root is None else root
        self.paths = tree_paths(G, self.tree, self.root)
        self.basis = cycle_basis(G, self.tree)
        M = [[pairing(G, a, b) for b in self.basis] for a in self.basis]
        self.gram_inverse = linalg.inverse(M) if M else []
        # per-edge row of the pairing: <gamma_i, e> for unit coefficient on e
        self._edge_pair = {
            e.id: [Fraction(g[e.id]) * e.length for g in self.basis] for e in G.edges
        }

    def chain_pairing(self, chain: Mapping[str, Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * len(self.basis)
        for e, k in chain.items():
            if k:
                row = self._edge_pair[e]
                out = [o + k * r for o, r in zip(out, row)]
        return out

    def coords_of_chain(self, chain: Mapping[str, Fraction]) -> list[Fraction]:
        return linalg.matvec(self.gram_inverse, self.chain_pairing(chain)) if self.basis else []

    def chain_to_point(self, p: PointOnGraph) -> dict[str, Fraction]:
        check_point(self.graph, p)
        e = self.graph.edge(p.edge)
        chain = {x: Fraction(k) for x, k in self.paths[e.src].items()}
        if p.offset:
            chain[e.id] = chain.get(e.id, Fraction(0)) + p.offset / e.length
        return chain

    def point_coords(self, p: PointOnGraph) -> list[Fraction]:
        return self.coords_of_chain(self.chain_to_point(p))

    def divisor_coords(self, D: Divisor) -> list[Fraction]:
        out = [Fraction(0)] * len(self.basis)
        for p, k in D.support:
            out = [o + k * x for o, x in zip(out, self.point_coords(p))]
        return out

    def equivalent(self, D1: Divisor, D2: Divisor) -> bool:
        if D1.degree != D2.degree:
            raise DegreeMismatch(f"degrees {D1.degree} and {D2.degree} differ")
        return linalg.is_integral(self.divisor_coords(D1 - D2))


def linear_equivalent(G: MetricGraph, D1: Divisor, D2: Divisor, tree: Sequence[str] | None = None, root: str | None = None) -> bool:
    return AbelJacobi(G, tree, root).equivalent(D1, D2)


# ---------------------------------------------------------------------------
# lattice isometries


def _round(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


def lll_reduce(A: linalg.Matrix, delta: Fraction = Fraction(3, 4)) -> linalg.Matrix:
    """Unimodular U such that U^T A U is LLL-reduced (A positive definite)."""
    n = len(A)
    U = linalg.identity(n)

    def gso(G):
        mu = [[Fraction(0)] * n for _ in range(n)]
        r = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1):
                r[i][j] = G[i][j] - sum((mu[j][k] * r[i][k] for k in range(j)), Fraction(0))
                if j < i:
                    mu[i][j] = r[i][j] / r[j][j]
        return mu, [r[i][i] for i in range(n)]

    k = 1
    while k < n:
        G = linalg.congruence(U, A)
        mu, bn = gso(G)
        for j in range(k - 1, -1, -1):
            q = _round(mu[k][j])
            if q:
                for row in U:
                    row[k] -= q * row[j]
                G = linalg.congruence(U, A)
                mu, bn = gso(G)
        if bn[k] >= (delta - mu[k][k - 1] ** 2) * bn[k - 1]:
            k += 1
        else:
            for row in U:
                row[k], row[k - 1] = row[k - 1], row[k]
            k = max(k - 1, 1)
    return U


def _integer_form(A: linalg.Matrix, B: linalg.Matrix) -> tuple[list[list[int]], list[list[int]]]:
    den = 1
    for M in (A, B):
        for row in M:
            for x in row:
                den = den * x.denominator // math.gcd(den, x.denominator)
    return [[int(x * den) for x in row] for row in A], [[int(x * den) for x in row] for row in B]


def pptav_isomorphic(A: Pptav, B: Pptav, bound: int = 3) -> list[list[int]] | None:
    """Integral unimodular U with U^T A U = B, searched after LLL reduction."""
    if A.rank != B.rank:
        raise RankMismatch(f"ranks {A.rank} and {B.rank} differ")
    n = A.rank
    if n == 0:
        return []
    if A.det() != B.det():
        return None
    P = lll_reduce(A.matrix())
    Q = lll_reduce(B.matrix())
    Ar = linalg.congruence(P, A.matrix())
    Br = linalg.congruence(Q, B.matrix())
    a, b = _integer_form(Ar, Br)

    def form(x, y):
        return sum(x[i] * a[i][j] * y[j] for i in range(n) for j in range(n))

    box = range(-bound, bound + 1)
    by_norm: dict[int, list[tuple[int, ...]]] = {}
    wanted = {b[i][i] for i in range(n)}
    for x in itertools.product(box, repeat=n):
        if any(x):
            norm = form(x, x)
            if norm in wanted:
                by_norm.setdefault(norm, []).append(x)
    cols: list[tuple[int, ...]] = []

    def rec(i: int):
        if i == n:
            return True
        for x in by_norm.get(b[i][i], []):
            if all(form(cols[j], x) == b[j][i] for j in range(i)):
                cols.append(x)
                if rec(i + 1):
                    return True
                cols.pop()
        return False

    if not rec(0):
        return None
    Ur = [[Fraction(cols[j][i]) for j in range(n)] for i in range(n)]
    U = linalg.matmul(linalg.matmul(P, Ur), linalg.inverse(Q))
    if not all(x.denominator == 1 for row in U for x in row):
        return None
    if linalg.congruence(U, A.matrix()) != B.matrix():
        return None
    return [[int(x) for x in row] for row in U]
