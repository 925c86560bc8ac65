"""Named base graphs and covers used by the CLI and the verification suite."""

from __future__ import annotations

from typing import Callable

from .double_cover import DoubleCover, Voltage, derive_cover
from .graph_core import MetricGraph, canonical_loopless_model


def _canon(vertices, edges) -> MetricGraph:
    return canonical_loopless_model(MetricGraph(vertices, edges))


def theta(l1=1, l2=1, l3=1) -> MetricGraph:
    return MetricGraph(["u", "v"], [("e1", "u", "v", l1), ("e2", "u", "v", l2), ("e3", "u", "v", l3)])


def circle(length=2) -> MetricGraph:
    return _canon(["o"], [("c", "o", "o", length)])


def dumbbell(loop_a=2, loop_b=4, bridge=1) -> MetricGraph:
    return _canon(["a", "b"], [("la", "a", "a", loop_a), ("lb", "b", "b", loop_b), ("br", "a", "b", bridge)])


def figure_eight(loop_a=2, loop_b=4) -> MetricGraph:
    return _canon(["c"], [("l1", "c", "c", loop_a), ("l2", "c", "c", loop_b)])


def chain_of_loops(k: int) -> MetricGraph:
    """k loops in a row joined by k-1 bridges of length 1.

    Loop i has circumference 2i; inner loops are split into two equal arcs
    between their bridge attachment points.
    """
    if k < 2:
        raise ValueError("a chain needs at least two loops")
    verts = ["p1", f"q{k}"]
    edges = [("l1", "p1", "p1", 2), (f"l{k}", f"q{k}", f"q{k}", 2 * k)]
    for i in range(2, k):
        verts += [f"q{i}", f"p{i}"]
        edges += [(f"l{i}a", f"q{i}", f"p{i}", i), (f"l{i}b", f"q{i}", f"p{i}", i)]
    for i in range(1, k):
        edges.append((f"b{i}", f"p{i}", f"q{i + 1}", 1))
    return _canon(verts, edges)


def k4() -> MetricGraph:
    vs = ["0", "1", "2", "3"]
    es = [(f"e{a}{b}", a, b, 1) for i, a in enumerate(vs) for b in vs[i + 1:]]
    return MetricGraph(vs, es)


def banana(n: int = 4) -> MetricGraph:
    return MetricGraph(["u", "v"], [(f"e{i}", "u", "v", i) for i in range(1, n + 1)])


def bridges_base() -> MetricGraph:
    """A looped centre with three bridges to looped ends (genus 4)."""
    return _canon(
        ["c", "n1", "n2", "n3"],
        [("lc", "c", "c", 2)]
        + [(f"b{i}", "c", f"n{i}", 1) for i in (1, 2, 3)]
        + [(f"l{i}", f"n{i}", f"n{i}", 2 * i) for i in (1, 2, 3)],
    )


def triangle_base() -> MetricGraph:
    """Three vertices A, B, C with one A-B edge and doubled A-C, B-C edges."""
    return MetricGraph(
        ["A", "B", "C"],
        [("ab", "A", "B", 1), ("ac1", "A", "C", 1), ("ac2", "A", "C", 1), ("bc1", "B", "C", 1), ("bc2", "B", "C", 1)],
    )


BASES: dict[str, Callable[[], MetricGraph]] = {
    "theta": theta,
    "dumbbell": dumbbell,
    "figure-eight": figure_eight,
    "chain-2": lambda: chain_of_loops(2),
    "chain-3": lambda: chain_of_loops(3),
    "chain-4": lambda: chain_of_loops(4),
    "chain-5": lambda: chain_of_loops(5),
    "K4": k4,
    "banana": banana,
    "bridges-base": bridges_base,
    "triangle": triangle_base,
}

# covers from the figures: base name and crossing edges
FIGURE_COVERS: dict[str, tuple[str, tuple[str, ...]]] = {
    "fig-bridges": ("bridges-base", ("lc/0",)),
    "fig-hyptype": ("triangle", ("ac1",)),
    "fig-nonhyptype": ("chain-3", ("l1/0", "l2a", "l3/0")),
    "fig-counterexampleofdeg2": ("chain-3", ("l2a",)),
    "fig-counterexamplebigonal": ("chain-3", ("l1/0",)),
    "fig-nonhypcase": ("chain-3", ("l1/0", "l3/0")),
    "theta-e1": ("theta", ("e1",)),
}


def base(name: str) -> MetricGraph:
    try:
        return BASES[name]()
    except KeyError:
        raise KeyError(f"unknown catalogue graph {name!r}; known: {sorted(BASES)}") from None


def figure_cover(name: str) -> DoubleCover:
    try:
        base_name, crossing = FIGURE_COVERS[name]
    except KeyError:
        raise KeyError(f"unknown catalogue cover {name!r}; known: {sorted(FIGURE_COVERS)}") from None
    G = base(base_name)
    return derive_cover(G, Voltage.on_edges(G, crossing))


def names() -> list[str]:
    return sorted(BASES) + sorted(FIGURE_COVERS)


def two_edge_connected_bases() -> list[str]:
    return ["theta", "figure-eight", "K4", "banana", "triangle"]


def hyperelliptic_bases() -> list[str]:
    return ["theta", "dumbbell", "figure-eight", "chain-2", "chain-3", "chain-4", "chain-5", "banana", "bridges-base"]
