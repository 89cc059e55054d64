"""Subset replacement paths.

For every pair of sources, report the s1-s2 distance after each single
edge failure on the canonical path pi(s1, s2). Each pair is solved on the
union of the two sources' shortest-path trees, which restorability makes
sufficient.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import PathNotShortest
from .graph import UNREACHABLE, Edge, UndirectedGraph, bfs_distances, norm_edge
from .tiebreak import Rpts, with_resampling


def _check_path(h: UndirectedGraph, s: int, t: int, P: Sequence[int], ds: list) -> None:
    if not P or P[0] != s or P[-1] != t:
        raise PathNotShortest(f"path must run from {s} to {t}")
    for a, b in zip(P, P[1:]):
        if not h.has_edge(a, b):
            raise PathNotShortest(f"({a}, {b}) is not an edge")
    if ds[t] is UNREACHABLE or len(P) - 1 != ds[t]:
        raise PathNotShortest(f"path has {len(P) - 1} hops, distance is {ds[t]}")


def single_pair_rp(h: UndirectedGraph, s: int, t: int, P: Sequence[int]) -> dict:
    """Replacement distances dist_{h - e}(s, t) for every edge e of the shortest path P.

    Runs in O(m log m + n): each off-path edge (u, v) is a detour bypassing the
    contiguous run of path edges between the points where the s-side tree
    paths to u and to v leave P; a heap sweep takes per-edge minima.
    """
    ds = bfs_distances(h, s)
    _check_path(h, s, t, P, ds)
    k = len(P) - 1
    if k == 0:
        return {}
    dt = bfs_distances(h, t)

    # Branch index: last position of P on a shortest-path tree path from s
    # that contains P itself.
    branch: list = [None] * h.n
    for j, p in enumerate(P):
        branch[p] = j
    order = sorted((v for v in range(h.n) if ds[v] is not UNREACHABLE), key=ds.__getitem__)
    for v in order:
        if branch[v] is not None:
            continue
        dv = ds[v]
        for w in h.adj[v]:
            if ds[w] is not UNREACHABLE and ds[w] == dv - 1:
                branch[v] = branch[w]
                break

    path_edges = {norm_edge(a, b) for a, b in zip(P, P[1:])}
    starts: list[list] = [[] for _ in range(k)]
    for a, b in h.edges:
        if (a, b) in path_edges or branch[a] is None or branch[b] is None:
            continue
        for u, v in ((a, b), (b, a)):
            lo, hi = branch[u], branch[v]
            if lo < hi and dt[v] is not UNREACHABLE:
                starts[lo].append((ds[u] + 1 + dt[v], hi - 1))

    out: dict = {}
    heap: list = []
    for i in range(k):
        for item in starts[i]:
            heapq.heappush(heap, item)
        while heap and heap[0][1] < i:
            heapq.heappop(heap)
        out[norm_edge(P[i], P[i + 1])] = heap[0][0] if heap else UNREACHABLE
    return out


def single_pair_rp_reference(h: UndirectedGraph, s: int, t: int, P: Sequence[int]) -> dict:
    """Quadratic reference: one BFS per failed path edge."""
    ds = bfs_distances(h, s)
    _check_path(h, s, t, P, ds)
    out = {}
    for a, b in zip(P, P[1:]):
        e = norm_edge(a, b)
        out[e] = bfs_distances(h, s, frozenset([e]))[t]
    return out


@dataclass
class PairResult:
    s: int
    t: int
    base: object
    path: tuple | None
    failures: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "t": self.t,
            "base": None if self.base is UNREACHABLE else self.base,
            "failures": [
                {"u": u, "v": v, "dist": None if d is UNREACHABLE else d}
                for (u, v), d in sorted(self.failures.items())
            ],
        }


@dataclass
class SrpOutput:
    sources: list
    pairs: list
    seed: int | None = None

    def to_dict(self) -> dict:
        return {"pairs": [p.to_dict() for p in self.pairs]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def lookup(self, s: int, t: int) -> PairResult:
        a, b = (s, t) if s < t else (t, s)
        for p in self.pairs:
            if (p.s, p.t) == (a, b):
                return p
        raise KeyError((s, t))


def union_graph(rpts: Rpts, s1: int, s2: int) -> UndirectedGraph:
    edges = rpts.spt(s1).tree_edges() | rpts.spt(s2).tree_edges()
    return UndirectedGraph.from_edges(rpts.graph.n, sorted(edges))


def srp_with_scheme(rpts: Rpts, S: Iterable[int], reference: bool = False) -> SrpOutput:
    S = sorted(set(S))
    if not S:
        raise ValueError("source set must be nonempty")
    for s in S:
        rpts.spt(s)
    solver = single_pair_rp_reference if reference else single_pair_rp
    pairs = []
    for i, s1 in enumerate(S):
        for s2 in S[i + 1:]:
            P = rpts.path(s1, s2)
            if P is None:
                pairs.append(PairResult(s1, s2, UNREACHABLE, None))
                continue
            h = union_graph(rpts, s1, s2)
            pairs.append(PairResult(s1, s2, len(P) - 1, P, solver(h, s1, s2, P)))
    return SrpOutput(S, pairs, rpts.pd.seed)


def srp(g: UndirectedGraph, S: Iterable[int], seed: int = 0, K: int | None = None) -> SrpOutput:
    """Perturb g, build one tree per source, then solve each pair on its tree union."""
    S = list(S)
    out, _ = with_resampling(g, seed, lambda r: srp_with_scheme(r, S), K=K)
    return out
