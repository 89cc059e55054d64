"""Undirected graphs, lexicographic path weights, BFS/Dijkstra and edge-list I/O."""

from __future__ import annotations

import heapq
import io
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .errors import (
    DuplicateEdge,
    InvalidFaultSet,
    MalformedLine,
    SelfLoop,
    TieDetected,
    VertexOutOfRange,
)

Edge = tuple[int, int]
FaultSet = frozenset  # frozenset[Edge], members normalised with u < v


class _Unreachable:
    """Distance of a disconnected pair. Orders above every finite distance."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNREACHABLE"

    def __reduce__(self):
        return (_Unreachable, ())

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("UNREACHABLE")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__


UNREACHABLE = _Unreachable()


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class UndirectedGraph:
    n: int
    edges: frozenset
    adj: tuple = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "UndirectedGraph":
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        seen: set[Edge] = set()
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise VertexOutOfRange(f"edge ({u}, {v}) outside 0..{n - 1}")
            if u == v:
                raise SelfLoop(f"self-loop at {u}")
            e = norm_edge(u, v)
            if e in seen:
                raise DuplicateEdge(f"duplicate edge {e}")
            seen.add(e)
            nbrs[u].append(v)
            nbrs[v].append(u)
        adj = tuple(tuple(sorted(a)) for a in nbrs)
        return cls(n, frozenset(seen), adj)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def subgraph(self, edges: Iterable[Sequence[int]]) -> "UndirectedGraph":
        """Edge-induced subgraph on the same vertex set. Edges must belong to self."""
        es = {norm_edge(u, v) for u, v in edges}
        extra = es - self.edges
        if extra:
            raise ValueError(f"edges not in graph: {sorted(extra)[:5]}")
        return UndirectedGraph.from_edges(self.n, sorted(es))

    def without(self, faults: Iterable[Edge]) -> "UndirectedGraph":
        return UndirectedGraph.from_edges(self.n, sorted(self.edges - set(faults)))


def fault_set(
    g: UndirectedGraph, edges: Iterable[Sequence[int]], f_max: int | None = None
) -> FaultSet:
    """Validate and normalise a collection of failed edges."""
    F = frozenset(norm_edge(u, v) for u, v in edges)
    missing = F - g.edges
    if missing:
        raise InvalidFaultSet(f"fault edges not in graph: {sorted(missing)}")
    if f_max is not None and len(F) > f_max:
        raise InvalidFaultSet(f"|F| = {len(F)} exceeds budget {f_max}")
    return F


def fault_key(F: Iterable[Edge]) -> tuple:
    return tuple(sorted(F))


# ---------------------------------------------------------------------------
# I/O


def load_graph(stream: TextIO | str) -> UndirectedGraph:
    """Parse the ``n m`` header plus ``u v`` edge-list format. ``#`` starts a comment line."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    header = None
    edges: list[Edge] = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise MalformedLine(f"line {lineno}: non-integer token in {line!r}") from None
        if len(nums) != 2:
            raise MalformedLine(f"line {lineno}: expected two integers, got {line!r}")
        if header is None:
            if nums[0] < 0 or nums[1] < 0:
                raise MalformedLine(f"line {lineno}: negative header values")
            header = (nums[0], nums[1])
        else:
            edges.append((nums[0], nums[1]))
    if header is None:
        raise MalformedLine("missing 'n m' header")
    n, m = header
    if len(edges) != m:
        raise MalformedLine(f"header declares {m} edges, found {len(edges)}")
    return UndirectedGraph.from_edges(n, edges)


def dumps_graph(g: UndirectedGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges())
    return "\n".join(lines) + "\n"


def read_graph(path) -> UndirectedGraph:
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh)


def write_graph(g: UndirectedGraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_graph(g))


# ---------------------------------------------------------------------------
# Unweighted distances


def bfs_distances(g: UndirectedGraph, s: int, F: Iterable[Edge] = ()) -> list:
    """Hop distances from ``s`` in G minus F; UNREACHABLE where disconnected."""
    banned = F if isinstance(F, frozenset) else frozenset(norm_edge(*e) for e in F)
    dist: list = [UNREACHABLE] * g.n
    dist[s] = 0
    queue = deque([s])
    adj = g.adj
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if dist[v] is UNREACHABLE and (not banned or norm_edge(u, v) not in banned):
                dist[v] = du
                queue.append(v)
    return dist


def bfs_distances_adj(n: int, adj: Sequence[Iterable[int]], s: int) -> list:
    """BFS over an explicit adjacency structure (used for union graphs and labels)."""
    dist: list = [UNREACHABLE] * n
    dist[s] = 0
    queue = deque([s])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] is UNREACHABLE:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


# ---------------------------------------------------------------------------
# Weighted paths


@dataclass(frozen=True, order=True)
class PathWeight:
    """Lexicographically ordered (hop count, perturbation sum)."""

    hops: int
    perturbation: int

    def __add__(self, other: "PathWeight") -> "PathWeight":
        return PathWeight(self.hops + other.hops, self.perturbation + other.perturbation)


ZERO_WEIGHT = PathWeight(0, 0)


@dataclass(frozen=True)
class Path:
    vertices: tuple
    weight: PathWeight

    @property
    def hops(self) -> int:
        return len(self.vertices) - 1

    def edges(self) -> list[Edge]:
        vs = self.vertices
        return [norm_edge(vs[i], vs[i + 1]) for i in range(len(vs) - 1)]

    def arcs(self) -> list[tuple[int, int]]:
        vs = self.vertices
        return [(vs[i], vs[i + 1]) for i in range(len(vs) - 1)]

    def reversed(self) -> "Path":
        return Path(self.vertices[::-1], PathWeight(self.weight.hops, -self.weight.perturbation))


class ShortestPathTree:
    """Parent pointers plus per-vertex weights from one source.

    ``parent[source] == -1``; ``parent[v] is None`` for unreached vertices.
    ``dist`` holds raw weight tuples; ``hops`` the hop counts.
    """

    __slots__ = ("source", "parent", "dist", "hops", "order", "_paths", "_masks")

    def __init__(self, source: int, parent: list, dist: list, hops: list, order: list):
        self.source = source
        self.parent = parent
        self.dist = dist
        self.hops = hops
        self.order = order
        self._paths: dict[int, tuple] = {}
        self._masks: dict | None = None

    @property
    def n(self) -> int:
        return len(self.parent)

    def reachable(self, v: int) -> bool:
        return self.parent[v] is not None

    def path(self, v: int) -> tuple | None:
        """Vertex sequence source..v, or None when v is unreached."""
        if self.parent[v] is None:
            return None
        paths = self._paths
        cached = paths.get(v)
        if cached is not None:
            return cached
        chain = []
        u = v
        while u != -1 and u not in paths:
            chain.append(u)
            u = self.parent[u]
        out = () if u == -1 else paths[u]
        for w in reversed(chain):
            out = out + (w,)
            paths[w] = out
        return out

    def tree_edges(self) -> set[Edge]:
        return {norm_edge(v, p) for v, p in enumerate(self.parent) if p is not None and p != -1}

    def edge_masks(self) -> dict[Edge, int]:
        """For each tree edge, the bitmask of vertices whose root path uses it."""
        if self._masks is None:
            sub = [0] * self.n
            masks: dict[Edge, int] = {}
            for v in reversed(self.order):
                sub[v] |= 1 << v
                p = self.parent[v]
                if p is not None and p != -1:
                    sub[p] |= sub[v]
                    masks[norm_edge(v, p)] = sub[v]
            self._masks = masks
        return self._masks

    def level_masks(self) -> dict[int, int]:
        """Bitmask of reached vertices per hop distance."""
        out: dict[int, int] = {}
        for v in self.order:
            h = self.hops[v]
            out[h] = out.get(h, 0) | (1 << v)
        return out


def lex_dijkstra(
    arcs: Sequence[Sequence[tuple]],
    s: int,
    banned: frozenset = frozenset(),
    detect_ties: bool = True,
) -> ShortestPathTree:
    """Dijkstra over arcs ``arcs[u] = ((v, w), ...)`` where ``w`` is a tuple
    ``(primary, secondary)`` compared lexicographically and summed componentwise.

    The hop count is tracked separately from the weight. ``banned`` holds
    normalised undirected edges removed in both orientations.
    """
    n = len(arcs)
    parent: list = [None] * n
    dist: list = [None] * n
    hops: list = [None] * n
    tied = [False] * n
    done = [False] * n
    order: list[int] = []
    parent[s] = -1
    dist[s] = (0, 0)
    hops[s] = 0
    heap = [((0, 0), s)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u] or d != dist[u]:
            continue
        if detect_ties and tied[u]:
            raise TieDetected(u, s)
        done[u] = True
        order.append(u)
        h = hops[u] + 1
        for v, (w1, w2) in arcs[u]:
            if done[v]:
                continue
            if banned and ((u, v) if u < v else (v, u)) in banned:
                continue
            nd = (d[0] + w1, d[1] + w2)
            cur = dist[v]
            if cur is None or nd < cur:
                dist[v] = nd
                parent[v] = u
                hops[v] = h
                tied[v] = False
                heapq.heappush(heap, (nd, v))
            elif nd == cur:
                tied[v] = True
    return ShortestPathTree(s, parent, dist, hops, order)


def dijkstra_sssp(pd, s: int, F: Iterable[Edge] = ()) -> ShortestPathTree:
    """Shortest-path tree of a perturbed digraph under lexicographic (hops, perturbation).

    Raises TieDetected when some vertex is reached by two distinct minimal relaxations.
    """
    banned = F if isinstance(F, frozenset) else frozenset(norm_edge(*e) for e in F)
    return lex_dijkstra(pd.arcs, s, banned)


def tree_weight(tree: ShortestPathTree, v: int) -> PathWeight | None:
    d = tree.dist[v]
    return None if d is None else PathWeight(*d)
