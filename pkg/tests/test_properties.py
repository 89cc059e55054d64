"""Randomised invariants via hypothesis."""

from __future__ import annotations

import networkx as nx
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from restorable.errors import TieDetected
from restorable.graph import UNREACHABLE, UndirectedGraph, bfs_distances, dumps_graph, load_graph
from restorable.labels import DistanceLabel
from restorable.srp import single_pair_rp, single_pair_rp_reference
from restorable.tiebreak import Rpts, perturb
from restorable.verify import consistency_violation, restoration_witness, stability_violation

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def graphs(draw, min_n=2, max_n=10):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    return UndirectedGraph.from_edges(n, chosen)


@SETTINGS
@given(graphs())
def test_bfs_matches_networkx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges)
    for s in range(g.n):
        want = nx.single_source_shortest_path_length(G, s)
        got = bfs_distances(g, s)
        assert all(got[v] == want.get(v, UNREACHABLE) for v in range(g.n))


@SETTINGS
@given(graphs())
def test_format_roundtrip(g):
    assert load_graph(dumps_graph(g)) == g


@SETTINGS
@given(graphs(min_n=3), st.integers(0, 1000))
def test_scheme_invariants(g, seed):
    rp = Rpts(perturb(g, seed))
    edges = g.sorted_edges()
    try:
        for s in range(g.n):
            for t in range(g.n):
                p = rp.path(s, t)
                d = bfs_distances(g, s)[t]
                assert (p is None) == (d is UNREACHABLE)
                if p is None:
                    continue
                assert len(p) - 1 == d
                assert consistency_violation(rp, s, t, frozenset()) is None
                for e in edges[:6]:
                    F = frozenset([e])
                    assert stability_violation(rp, s, t, frozenset(), e) is None
                    assert restoration_witness(rp, s, t, F) is not None
    except TieDetected:
        pass  # ties under faults are resampled by callers; nothing to assert here


@SETTINGS
@given(graphs(min_n=3, max_n=14), st.integers(0, 1000))
def test_fast_srp_equals_reference(g, seed):
    rp = Rpts(perturb(g, seed))
    for t in range(1, g.n):
        P = rp.path(0, t)
        if P is not None:
            assert single_pair_rp(g, 0, t, P) == single_pair_rp_reference(g, 0, t, P)


@SETTINGS
@given(st.integers(1, 5000), st.integers(0, 3),
       st.lists(st.tuples(st.integers(0, 4999), st.integers(1, 4999)), max_size=30))
def test_label_codec_roundtrip(n, f, raw):
    edges = tuple(sorted({(u, u + dv) for u, dv in raw}))
    lab = DistanceLabel(0, max(n, 10_000), f, edges)
    assert DistanceLabel.from_bytes(lab.to_bytes()) == lab
