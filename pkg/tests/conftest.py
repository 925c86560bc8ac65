from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

from hypothesis import HealthCheck, settings, strategies as st

from tprym.graph_core import MetricGraph

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

lengths = st.builds(Fraction, st.integers(1, 6), st.integers(1, 3))


@st.composite
def connected_graphs(draw, max_vertices: int = 5, max_extra: int = 4, loops: bool = False) -> MetricGraph:
    """A random spanning tree plus extra parallel edges (and optionally loops)."""
    n = draw(st.integers(2, max_vertices))
    verts = [f"v{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        j = draw(st.integers(0, i - 1))
        edges.append((f"t{i}", verts[j], verts[i], draw(lengths)))
    for k in range(draw(st.integers(0, max_extra))):
        a = draw(st.integers(0, n - 1))
        b = draw(st.integers(0, n - 1))
        if a == b and not loops:
            b = (a + 1) % n
        edges.append((f"x{k}", verts[a], verts[b], draw(lengths)))
    return MetricGraph(verts, edges)


@st.composite
def graphs_with_voltage(draw, **kw):
    G = draw(connected_graphs(**kw))
    bits = draw(st.lists(st.integers(0, 1), min_size=len(G.edges), max_size=len(G.edges)))
    return G, dict(zip(G.edge_ids, bits))
