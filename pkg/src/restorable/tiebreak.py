"""Antisymmetric integer perturbation and the replacement-path tiebreaking scheme built on it.

Every undirected edge {u, v} becomes arcs (u, v), (v, u) with weights
``(1, r(u, v))`` and ``(1, -r(u, v))``. Path weights compare as
(hops, perturbation sum), so the perturbation only ever decides between
paths of equal hop length. ``pi(s, t | F)`` is the unique lightest
s -> t path once the arcs of F are deleted.
"""

from __future__ import annotations

import io
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterable, TextIO, TypeVar

import numpy as np

from .errors import TieDetected, TieUnresolved
from .graph import (
    Edge,
    Path,
    PathWeight,
    ShortestPathTree,
    UndirectedGraph,
    dijkstra_sssp,
    fault_key,
    norm_edge,
)

DEFAULT_MAX_RETRIES = 16
DEFAULT_CACHE_SIZE = 4096

T = TypeVar("T")


def default_bound(n: int) -> int:
    return max(1, n) ** 3


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


@dataclass(frozen=True)
class PerturbedDigraph:
    base: UndirectedGraph
    K: int
    r: dict = field(repr=False, compare=False)
    seed: int | None = None
    arcs: tuple = field(repr=False, compare=False, default=())

    @classmethod
    def from_perturbation(
        cls, base: UndirectedGraph, r_edges: dict, K: int, seed: int | None = None
    ) -> "PerturbedDigraph":
        """Build from ``{(u, v): r(u, v)}`` given once per undirected edge (either orientation)."""
        r: dict[tuple[int, int], int] = {}
        for (u, v), x in r_edges.items():
            x = int(x)
            if abs(x) > K:
                raise ValueError(f"|r({u},{v})| = {abs(x)} exceeds bound {K}")
            r[(u, v)] = x
            r[(v, u)] = -x
        for e in base.edges:
            if e not in r:
                raise ValueError(f"missing perturbation for edge {e}")
        arcs = tuple(tuple((v, (1, r[(u, v)])) for v in base.adj[u]) for u in range(base.n))
        return cls(base, K, r, seed, arcs)

    def weight(self, u: int, v: int) -> PathWeight:
        return PathWeight(1, self.r[(u, v)])

    def path_weight(self, vertices) -> PathWeight:
        r = self.r
        pert = sum(r[(vertices[i], vertices[i + 1])] for i in range(len(vertices) - 1))
        return PathWeight(len(vertices) - 1, pert)

    def dumps(self) -> str:
        """One ``u v r`` line per arc with r >= 0; the reverse arc carries -r."""
        lines = []
        for u, v in self.base.sorted_edges():
            x = self.r[(u, v)]
            lines.append(f"{u} {v} {x}" if x >= 0 else f"{v} {u} {-x}")
        return "\n".join(lines) + "\n"


def load_perturbation(base: UndirectedGraph, stream: TextIO | str, K: int | None = None) -> PerturbedDigraph:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    r_edges = {}
    for raw in stream:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        u, v, x = (int(t) for t in line.split())
        r_edges[(u, v)] = x
    bound = K if K is not None else max([abs(x) for x in r_edges.values()] + [1])
    return PerturbedDigraph.from_perturbation(base, r_edges, bound)


def sample_perturbation(g: UndirectedGraph, seed: int, K: int) -> PerturbedDigraph:
    if K < 1:
        raise ValueError("perturbation bound K must be >= 1")
    rng = make_rng(seed)
    edges = g.sorted_edges()
    vals = rng.integers(-K, K + 1, size=len(edges)) if edges else []
    return PerturbedDigraph.from_perturbation(g, dict(zip(edges, vals)), K, seed)


def certify_tie_free(pd: PerturbedDigraph) -> None:
    """Raise TieDetected unless every fault-free source tree is tie-free."""
    for s in range(pd.base.n):
        dijkstra_sssp(pd, s)


def perturb(
    g: UndirectedGraph,
    seed: int = 0,
    K: int | None = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> PerturbedDigraph:
    """Sample an antisymmetric perturbation, resampling with seed+1 until the
    fault-free shortest paths are unique. Ties that only surface under faults
    are handled by :func:`with_resampling`.
    """
    K = default_bound(g.n) if K is None else K
    for attempt in range(max_retries + 1):
        pd = sample_perturbation(g, seed + attempt, K)
        try:
            certify_tie_free(pd)
        except TieDetected:
            continue
        return pd
    raise TieUnresolved(f"no tie-free perturbation with K={K} after {max_retries} retries")


class Rpts:
    """Replacement-path tiebreaking scheme ``pi(s, t | F)`` over a perturbed digraph.

    Trees are cached per (source, sorted F) in a bounded LRU. The cache lock is
    held while a missing tree is computed, so concurrent readers never see a
    partial tree and each tree is computed once while resident.
    """

    def __init__(self, pd: PerturbedDigraph, cache_size: int = DEFAULT_CACHE_SIZE):
        self.pd = pd
        self.graph = pd.base
        self.cache_size = cache_size
        self._cache: OrderedDict = OrderedDict()
        self._lock = threading.RLock()
        self.trees_computed = 0

    @classmethod
    def build(cls, g: UndirectedGraph, seed: int = 0, K: int | None = None, **kw) -> "Rpts":
        return cls(perturb(g, seed, K), **kw)

    def spt(self, s: int, F: Iterable[Edge] = frozenset()) -> ShortestPathTree:
        if not 0 <= s < self.graph.n:
            raise IndexError(f"vertex {s} out of range")
        F = F if isinstance(F, frozenset) else frozenset(norm_edge(*e) for e in F)
        key = (s, fault_key(F)) if F else (s, ())
        with self._lock:
            tree = self._cache.get(key)
            if tree is not None:
                self._cache.move_to_end(key)
                return tree
            tree = dijkstra_sssp(self.pd, s, F)
            self.trees_computed += 1
            self._cache[key] = tree
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
            return tree

    def path(self, s: int, t: int, F: Iterable[Edge] = frozenset()) -> tuple | None:
        """Vertex sequence of pi(s, t | F), or None when t is unreachable."""
        if not 0 <= t < self.graph.n:
            raise IndexError(f"vertex {t} out of range")
        return self.spt(s, F).path(t)

    def pi(self, s: int, t: int, F: Iterable[Edge] = frozenset()) -> Path | None:
        tree = self.spt(s, F)
        vs = tree.path(t)
        if vs is None:
            return None
        return Path(vs, PathWeight(*tree.dist[t]))

    def dist_star(self, s: int, t: int, F: Iterable[Edge] = frozenset()) -> PathWeight | None:
        d = self.spt(s, F).dist[t]
        return None if d is None else PathWeight(*d)


def with_resampling(
    g: UndirectedGraph,
    seed: int,
    fn: Callable[[Rpts], T],
    K: int | None = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
) -> tuple[T, Rpts]:
    """Run ``fn`` on a fresh scheme, restarting with the next seed whenever a
    tie is detected anywhere downstream."""
    start = seed
    for _ in range(max_retries + 1):
        rpts = Rpts(perturb(g, start, K, max_retries))
        try:
            return fn(rpts), rpts
        except TieDetected:
            start = rpts.pd.seed + 1
    raise TieUnresolved(f"ties persisted after {max_retries} whole-run resamples")
