"""Fault-tolerant preservers by path overlay, and +4 additive spanners by clustering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import BudgetExceeded
from .graph import UNREACHABLE, Edge, UndirectedGraph, bfs_distances, fault_key, norm_edge
from .tiebreak import Rpts, make_rng, with_resampling
from .verify import fault_sets

DEFAULT_MAX_FAULT_SETS = 2_000_000


@dataclass
class Preserver:
    n: int
    edges: frozenset
    sources: tuple
    f: int
    kind: str  # "SxV" or "SxS"
    enumerated_fault_sets: int = 0

    @property
    def size(self) -> int:
        return len(self.edges)

    def bound_value(self) -> float:
        """n^{2 - 1/2^k} |S|^{1/2^k} where k is the overlay fault depth."""
        k = self.f if self.kind == "SxV" else self.f - 1
        return overlay_bound(self.n, len(self.sources), k)

    def graph(self) -> UndirectedGraph:
        return UndirectedGraph.from_edges(self.n, sorted(self.edges))

    def stats(self) -> dict:
        return {
            "edges": self.size,
            "bound_value": self.bound_value(),
            "enumerated_fault_sets": self.enumerated_fault_sets,
            "kind": self.kind,
            "f": self.f,
            "sources": list(self.sources),
        }


def overlay_bound(n: int, sigma: int, k: int) -> float:
    e = 1.0 / (2**k)
    return n ** (2 - e) * sigma**e


def _tree_edges(scheme, s: int, F: frozenset) -> set:
    spt = getattr(scheme, "spt", None)
    if spt is not None:
        return spt(s, F).tree_edges()
    out = set()
    for v in range(scheme.graph.n):
        p = scheme.path(s, v, F)
        if p is not None:
            out.update(norm_edge(a, b) for a, b in zip(p, p[1:]))
    return out


def overlay_edges(
    scheme,
    S: Iterable[int],
    f: int,
    naive: bool = False,
    max_fault_sets: int = DEFAULT_MAX_FAULT_SETS,
) -> tuple[set, int]:
    """Union of pi(s, v | F) over s in S, all v, |F| <= f.

    By default only fault sets whose every edge lay on a tree selected under a
    smaller fault set are visited: a fault off the current path leaves it
    unchanged, so other sets add nothing. ``naive`` visits all subsets.
    Returns (edges, number of (source, F) pairs visited).
    """
    if f < 0:
        raise ValueError("f must be >= 0")
    g = scheme.graph
    H: set = set()
    visited = 0
    for s in sorted(set(S)):
        if naive:
            for F in fault_sets(g, f):
                visited += 1
                if visited > max_fault_sets:
                    raise BudgetExceeded(f"more than {max_fault_sets} fault sets")
                H |= _tree_edges(scheme, s, F)
            continue
        seen = {()}
        stack = [frozenset()]
        while stack:
            F = stack.pop()
            visited += 1
            if visited > max_fault_sets:
                raise BudgetExceeded(f"more than {max_fault_sets} fault sets")
            T = _tree_edges(scheme, s, F)
            H |= T
            if len(F) < f:
                for e in T:
                    F2 = F | {e}
                    key = fault_key(F2)
                    if key not in seen:
                        seen.add(key)
                        stack.append(F2)
    return H, visited


def build_sxv_preserver(rpts, S: Iterable[int], f: int, naive: bool = False,
                        max_fault_sets: int = DEFAULT_MAX_FAULT_SETS) -> Preserver:
    S = tuple(sorted(set(S)))
    H, visited = overlay_edges(rpts, S, f, naive, max_fault_sets)
    return Preserver(rpts.graph.n, frozenset(H), S, f, "SxV", visited)


def build_sxs_preserver(rpts, S: Iterable[int], f_plus_1: int, naive: bool = False,
                        max_fault_sets: int = DEFAULT_MAX_FAULT_SETS) -> Preserver:
    """(f+1)-fault S x S preserver: the f-fault S x V overlay, relabelled.

    Restorability splits every S x S replacement path under |F| <= f+1 into
    two selected paths under a proper subset of F, both in the overlay.
    """
    if f_plus_1 < 1:
        raise ValueError("S x S budget must be >= 1")
    P = build_sxv_preserver(rpts, S, f_plus_1 - 1, naive, max_fault_sets)
    return Preserver(P.n, P.edges, P.sources, f_plus_1, "SxS", P.enumerated_fault_sets)


# ---------------------------------------------------------------------------
# Spanners


@dataclass
class Spanner:
    n: int
    edges: frozenset
    f: int
    centers: tuple
    clustered: tuple
    center_edges: dict = field(repr=False)
    preserver: Preserver = field(repr=False, default=None)
    sigma: int = 0
    additive: int = 4

    @property
    def size(self) -> int:
        return len(self.edges)

    def graph(self) -> UndirectedGraph:
        return UndirectedGraph.from_edges(self.n, sorted(self.edges))

    def stats(self) -> dict:
        return {
            "edges": self.size,
            "f": self.f,
            "sigma": self.sigma,
            "clustered": sum(self.clustered),
            "bound_value": spanner_bound(self.n, self.f),
            "enumerated_fault_sets": self.preserver.enumerated_fault_sets if self.preserver else 0,
        }


def default_sigma(n: int, f: int) -> int:
    """Centre count balancing the preserver and clustering terms: n^{1/(2^{f-1}+1)}."""
    return max(1, min(n, math.ceil(n ** (1.0 / (2 ** (f - 1) + 1)))))


def spanner_bound(n: int, f: int) -> float:
    k = f - 1
    return n ** (1 + 2**k / (2**k + 1))


def _cluster(g: UndirectedGraph, centers: set, f: int):
    """A vertex with >= f+1 centre neighbours keeps f+1 centre edges, so one
    survives any f faults; every other vertex keeps all its edges."""
    H: set = set()
    clustered = []
    center_edges: dict[int, tuple] = {}
    need = f + 1
    for v in range(g.n):
        cn = [c for c in g.adj[v] if c in centers]
        if len(cn) >= need:
            kept = tuple(cn[:need])
            center_edges[v] = kept
            H.update(norm_edge(v, c) for c in kept)
            clustered.append(True)
        else:
            H.update(norm_edge(v, w) for w in g.adj[v])
            clustered.append(False)
    return H, tuple(clustered), center_edges


def build_spanner(
    g: UndirectedGraph,
    f: int,
    seed: int = 0,
    sigma: int | None = None,
    repeats: int | None = None,
    rpts: Rpts | None = None,
    max_fault_sets: int = DEFAULT_MAX_FAULT_SETS,
) -> Spanner:
    """f-fault +4 spanner: clustering around random centres plus an f-fault
    centre x centre preserver. Repeated ``repeats`` times (default ceil(log2 n)),
    keeping the sparsest result."""
    if f < 1:
        raise ValueError("spanner budget f must be >= 1")
    if g.n < 2:
        raise ValueError("spanner needs n >= 2")
    sigma = default_sigma(g.n, f) if sigma is None else max(1, min(g.n, sigma))
    repeats = max(1, math.ceil(math.log2(g.n))) if repeats is None else repeats
    if rpts is None:
        build = lambda r: build_spanner(g, f, seed, sigma, repeats, r, max_fault_sets)  # noqa: E731
        return with_resampling(g, seed, build)[0]
    rng = make_rng(seed ^ 0x5EED)
    best: Spanner | None = None
    for _ in range(repeats):
        centers = sorted(int(c) for c in rng.choice(g.n, size=sigma, replace=False))
        H, clustered, center_edges = _cluster(g, set(centers), f)
        pres = build_sxs_preserver(rpts, centers, f, max_fault_sets=max_fault_sets)
        H |= pres.edges
        cand = Spanner(g.n, frozenset(H), f, tuple(centers), clustered, center_edges, pres, sigma)
        if best is None or cand.size < best.size:
            best = cand
    return best


def stretch_chain(g: UndirectedGraph, sp: Spanner, s: int, t: int, F: Iterable[Edge] = ()) -> dict:
    """Evaluate each step of the +4 stretch argument on one (s, t, F).

    Picks a shortest s-t path q in G minus F, its first and last clustered
    vertices x, y and surviving centre neighbours c_x, c_y, then reports the
    chain values and whether every comparison holds.
    """
    F = frozenset(norm_edge(*e) for e in F)
    H = sp.graph()
    dG = lambda a, b: bfs_distances(g, a, F)[b]  # noqa: E731
    dH = lambda a, b: bfs_distances(H, a, F)[b]  # noqa: E731
    base = dG(s, t)
    if base is UNREACHABLE:
        return {"vacuous": True, "ok": True}
    q = _bfs_path(g, s, t, F)
    marks = [v for v in q if sp.clustered[v]]
    lhs = dH(s, t)
    if not marks:
        return {"vacuous": False, "clustered_on_path": False, "ok": lhs == base, "lhs": lhs, "base": base}
    x, y = marks[0], marks[-1]
    cx = next(c for c in sp.center_edges[x] if norm_edge(x, c) not in F)
    cy = next(c for c in sp.center_edges[y] if norm_edge(y, c) not in F)
    L1 = dH(s, x) + dH(x, y) + dH(y, t)
    L2 = dG(s, x) + dH(x, y) + dG(y, t)
    L3 = dG(s, x) + 2 + dH(cx, cy) + dG(y, t)
    L4 = dG(s, x) + 2 + dG(cx, cy) + dG(y, t)
    L5 = dG(s, x) + 4 + dG(x, y) + dG(y, t)
    L6 = base + 4
    steps = [lhs <= L1, L1 == L2, L2 <= L3, L3 == L4, L4 <= L5, L5 == L6]
    return {
        "vacuous": False, "clustered_on_path": True, "x": x, "y": y, "cx": cx, "cy": cy,
        "chain": [lhs, L1, L2, L3, L4, L5, L6], "steps": steps, "ok": all(steps),
    }


def _bfs_path(g: UndirectedGraph, s: int, t: int, F: frozenset) -> list:
    dist = bfs_distances(g, s, F)
    path = [t]
    v = t
    while v != s:
        v = next(w for w in g.adj[v] if norm_edge(v, w) not in F and dist[w] == dist[v] - 1)
        path.append(v)
    return path[::-1]
