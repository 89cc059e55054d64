"""Lower-bound family for overlay preservers under a consistent, stable scheme.

``build_gfd(f, d)`` builds the recursive tree G_f(d): a spine u_1..u_d, and
hanging from each u_j a connector path of d-j+1 edges to either a leaf
(f = 1) or the root of a copy of G_{f-1}(sqrt d). Every root-to-leaf path
has the same length, and each leaf carries a fault label of at most f spine
edges.

``build_gstar`` attaches a terminal set X to every leaf through a complete
bipartite graph whose weights decrease from left to right. Under the fault
label of leaf z_j, the lightest path from the root to any x must end with
the edge (z_j, x), forcing every bipartite edge into the overlay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import NonIntegralRecursion, SizeInfeasible, TieDetected, TieUnresolved
from .graph import Edge, UndirectedGraph, lex_dijkstra, norm_edge
from .tiebreak import Rpts, make_rng
from .verify import PropertyReport


@dataclass
class Core:
    """One copy of G_f(d) inside a larger graph."""

    root: int
    spine: list
    leaves: list  # left to right
    labels: dict  # leaf -> tuple of normalised edges, outermost spine edge first
    paths: dict  # leaf -> vertex tuple root..leaf
    vertices: set = field(repr=False)
    edges: set = field(repr=False)
    copies: list = field(default_factory=list, repr=False)


@dataclass
class LbGraph:
    graph: UndirectedGraph
    f: int
    d: int
    cores: list
    sigma: int = 1
    X: tuple = ()
    B: frozenset = frozenset()
    W: dict = field(default_factory=dict, repr=False)  # edge -> numerator over ``denom``
    denom: int = 1
    hub: int | None = None

    @property
    def root(self) -> int:
        return self.cores[0].root

    @property
    def leaves(self) -> list:
        return self.cores[0].leaves

    @property
    def labels(self) -> dict:
        out = {}
        for c in self.cores:
            out.update(c.labels)
        return out

    @property
    def sources(self) -> list:
        return [c.root for c in self.cores]

    def weight(self, u: int, v: int) -> Fraction:
        return Fraction(self.W.get(norm_edge(u, v), self.denom), self.denom)

    def dumps_weights(self) -> str:
        return "".join(
            f"{u} {v} {self.W.get((u, v), self.denom)} {self.denom}\n" for u, v in self.graph.sorted_edges()
        )


# ---------------------------------------------------------------------------
# Closed forms


def _sqrt_exact(d: int) -> int:
    r = math.isqrt(d)
    if r * r != d:
        raise NonIntegralRecursion(f"{d} is not a perfect square")
    return r


def depth_formula(f: int, d: int) -> int:
    return d if f == 1 else d + depth_formula(f - 1, _sqrt_exact(d))


def nleaf_formula(f: int, d: int) -> int:
    return d if f == 1 else d * nleaf_formula(f - 1, _sqrt_exact(d))


def nleaf_closed_form(f: int, d: int) -> Fraction:
    """d^{2 - 1/2^{f-1}}, exact for admissible d."""
    k = 2 ** (f - 1)
    root = round(d ** (1.0 / k))
    if root**k != d:
        raise NonIntegralRecursion(f"{d} is not a {k}-th power")
    return Fraction(root ** (2 * k - 1))


def vertex_count(f: int, d: int) -> int:
    """Exact vertex count of the construction: spine, connector interiors, copies."""
    connectors = d * (d - 1) // 2
    if f == 1:
        return 2 * d + connectors
    return d + connectors + d * vertex_count(f - 1, _sqrt_exact(d))


def size_recurrence_bound(f: int, d: int) -> int:
    """Upper-bound recurrence N(1,d) = 2d + d^2, N(f,d) = d N(f-1, sqrt d) + d^2."""
    if f == 1:
        return 2 * d + d * d
    return d * size_recurrence_bound(f - 1, _sqrt_exact(d)) + d * d


def admissible_d(f: int, up_to: int) -> list[int]:
    k = 2 ** (f - 1)
    out = []
    base = 1
    while base**k <= up_to:
        out.append(base**k)
        base += 1
    return out


# ---------------------------------------------------------------------------
# Construction


class _Builder:
    def __init__(self):
        self.n = 0
        self.edges: list[Edge] = []

    def new(self) -> int:
        self.n += 1
        return self.n - 1

    def link(self, u: int, v: int) -> None:
        self.edges.append(norm_edge(u, v))

    def chain(self, start: int, length: int, end: int | None = None) -> list:
        """Path of ``length`` edges from ``start``; allocates the far end unless given."""
        seq = [start]
        for i in range(length):
            v = end if (i == length - 1 and end is not None) else self.new()
            self.link(seq[-1], v)
            seq.append(v)
        return seq


def _build_core(b: _Builder, f: int, d: int) -> Core:
    if f < 1 or d < 1:
        raise ValueError("need f >= 1 and d >= 1")
    first_vertex = b.n
    first_edge = len(b.edges)
    spine = [b.new() for _ in range(d)]
    for a, c in zip(spine, spine[1:]):
        b.link(a, c)
    leaves: list[int] = []
    labels: dict = {}
    paths: dict = {}
    copies: list[Core] = []
    sub_d = None if f == 1 else _sqrt_exact(d)
    for j in range(d):  # 0-based; connector has d - j edges
        spine_edge = (norm_edge(spine[j], spine[j + 1]),) if j < d - 1 else ()
        head = tuple(spine[: j + 1])
        if f == 1:
            q = b.chain(spine[j], d - j)
            z = q[-1]
            leaves.append(z)
            labels[z] = spine_edge
            paths[z] = head + tuple(q[1:])
        else:
            q = b.chain(spine[j], d - j - 1) if d - j - 1 > 0 else [spine[j]]
            sub = _build_core(b, f - 1, sub_d)
            b.link(q[-1], sub.root)
            copies.append(sub)
            for z in sub.leaves:
                leaves.append(z)
                labels[z] = spine_edge + sub.labels[z]
                paths[z] = head + tuple(q[1:]) + sub.paths[z]
    verts = set(range(first_vertex, b.n))
    edges = set(b.edges[first_edge:])
    return Core(spine[0], spine, leaves, labels, paths, verts, edges, copies)


def build_gfd(f: int, d: int) -> LbGraph:
    """The recursive graph G_f(d). d must make every sqrt recursion integral."""
    if f < 1:
        raise ValueError("f must be >= 1")
    if f > 1:
        depth_formula(f, d)  # raises NonIntegralRecursion
    b = _Builder()
    core = _build_core(b, f, d)
    g = UndirectedGraph.from_edges(b.n, b.edges)
    return LbGraph(g, f, d, [core])


def build_gstar(
    f: int,
    d: int,
    sigma: int = 1,
    x_count: int | None = None,
    n_target: int | None = None,
) -> LbGraph:
    """The weighted lower-bound graph: ``sigma`` copies of G_f(d), a hub joined to
    each copy's last spine vertex, and terminals X joined to every leaf.

    |X| defaults to n - sigma*N(f, d) - 1 with n = 4 f sigma d^2. Bipartite
    edge (z_j, x) weighs 1 + (lambda - j)/n^4 (j = 1..lambda within its copy);
    every other edge weighs 1. Weights are stored as integers over n^4.
    """
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    if f > 1:
        depth_formula(f, d)
    per_copy = vertex_count(f, d)
    if x_count is None:
        n = n_target if n_target is not None else 4 * f * sigma * d * d
        x_count = n - sigma * per_copy - 1
    if x_count < 1:
        raise SizeInfeasible(f"no room for terminals: |X| = {x_count}")
    b = _Builder()
    cores = [_build_core(b, f, d) for _ in range(sigma)]
    hub = b.new()
    for c in cores:
        b.link(hub, c.spine[-1])
    X = tuple(b.new() for _ in range(x_count))
    B = []
    for c in cores:
        for z in c.leaves:
            for x in X:
                b.link(z, x)
                B.append(norm_edge(z, x))
    g = UndirectedGraph.from_edges(b.n, b.edges)
    n = g.n
    denom = n**4
    W = {}
    for c in cores:
        lam = len(c.leaves)
        for j, z in enumerate(c.leaves, 1):
            for x in X:
                W[norm_edge(z, x)] = denom + (lam - j)
    return LbGraph(g, f, d, cores, sigma, X, frozenset(B), W, denom, hub)


def with_extra_edge(lb: LbGraph, u: int, v: int) -> LbGraph:
    """Copy of ``lb`` with one more edge inside the first core (for negative tests)."""
    g = UndirectedGraph.from_edges(lb.graph.n, lb.graph.sorted_edges() + [norm_edge(u, v)])
    c = lb.cores[0]
    core = Core(c.root, c.spine, c.leaves, c.labels, c.paths, c.vertices, c.edges | {norm_edge(u, v)}, c.copies)
    return LbGraph(g, lb.f, lb.d, [core] + lb.cores[1:], lb.sigma, lb.X, lb.B, lb.W, lb.denom, lb.hub)


# ---------------------------------------------------------------------------
# Certification


def _count_simple_paths(adj: dict, s: int, t: int, limit: int) -> int:
    count = 0
    on_path = {s}
    stack = [(s, iter(adj.get(s, ())))]
    while stack:
        u, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            stack.pop()
            on_path.discard(u)
            continue
        if nxt in on_path:
            continue
        if nxt == t:
            count += 1
            if count >= limit:
                return count
            continue
        on_path.add(nxt)
        stack.append((nxt, iter(adj.get(nxt, ()))))
    return count


def _path_edges(p) -> set:
    return {norm_edge(a, b) for a, b in zip(p, p[1:])}


def check_path_lemma(lb: LbGraph) -> PropertyReport:
    """The four structural claims about root-to-leaf paths, on every core:
    (1) the path is the unique root-leaf path; (2) it survives the union of the
    labels of itself and every leaf to its right; (3) the label of every leaf
    to its left cuts it; (4) all such paths have the same length."""
    clauses = {1: True, 2: True, 3: True, 4: True}
    first_failure = None
    checked = 0
    for ci, core in enumerate(lb.cores):
        adj: dict[int, list] = {}
        for u, v in core.edges:
            adj.setdefault(u, []).append(v)
            adj.setdefault(v, []).append(u)
        leaves = core.leaves
        lengths = set()
        suffix_union: list[set] = [set() for _ in range(len(leaves) + 1)]
        for k in range(len(leaves) - 1, -1, -1):
            suffix_union[k] = suffix_union[k + 1] | set(core.labels[leaves[k]])
        for k, z in enumerate(leaves):
            checked += 1
            P = core.paths[z]
            pe = _path_edges(P)
            lengths.add(len(P) - 1)
            problems = []
            if not pe <= core.edges or P[0] != core.root or P[-1] != z:
                problems.append(1)
            elif _count_simple_paths(adj, core.root, z, 2) != 1:
                problems.append(1)
            if pe & suffix_union[k]:
                problems.append(2)
            for left in leaves[:k]:
                if not pe & set(core.labels[left]):
                    problems.append(3)
                    break
            for c in problems:
                clauses[c] = False
            if problems and first_failure is None:
                first_failure = {"kind": "path_lemma", "core": ci, "leaf": z, "clauses": problems}
        if len(lengths) > 1:
            clauses[4] = False
            if first_failure is None:
                first_failure = {"kind": "path_lemma", "core": ci, "clauses": [4], "lengths": sorted(lengths)}
    ok = all(clauses.values())
    return PropertyReport("path_lemma", ok, checked, first_failure,
                          [{"clause": c, "pass": v} for c, v in sorted(clauses.items())])


def _w_arcs(lb: LbGraph, secondary: dict | None = None) -> tuple:
    g = lb.graph
    W = lb.W
    den = lb.denom
    sec = secondary or {}
    return tuple(
        tuple((v, (W.get(norm_edge(u, v), den), sec.get(norm_edge(u, v), 0))) for v in g.adj[u])
        for u in range(g.n)
    )


def certify_blowup(lb: LbGraph) -> PropertyReport:
    """For every source, leaf z and terminal x: under the faults Label(z), the
    W-lightest source-x path is unique, stays inside the source's copy and ends
    with the edge (z, x). Hence every bipartite edge lies in the overlay."""
    arcs = _w_arcs(lb)
    certified: set = set()
    checked = 0
    failure = None
    for core in lb.cores:
        s = core.root
        inside = core.vertices
        depth = len(core.paths[core.leaves[0]]) - 1
        for z in core.leaves:
            F = frozenset(core.labels[z])
            tree = lex_dijkstra(arcs, s, F, detect_ties=False)
            for x in lb.X:
                checked += 1
                best = None
                argmins = []
                for w in lb.graph.adj[x]:
                    dw = tree.dist[w]
                    if dw is None or norm_edge(w, x) in F:
                        continue
                    val = dw[0] + lb.W.get(norm_edge(w, x), lb.denom)
                    if best is None or val < best:
                        best, argmins = val, [w]
                    elif val == best:
                        argmins.append(w)
                path = tree.path(x)
                ok = (
                    argmins == [z]
                    and path is not None
                    and path[-2] == z
                    and set(path[:-1]) <= inside
                    and len(path) - 1 == depth + 1
                )
                if ok:
                    certified.add(norm_edge(z, x))
                elif failure is None:
                    failure = {"kind": "blowup", "s": s, "leaf": z, "x": x, "argmins": argmins,
                               "path": None if path is None else list(path)}
    passed = failure is None and certified == set(lb.B)
    return PropertyReport("blowup", passed, checked, failure,
                          [{"bipartite_edges": len(lb.B), "certified": len(certified)}])


# ---------------------------------------------------------------------------
# The adversarial scheme itself


@dataclass(frozen=True)
class WeightedDigraph:
    base: UndirectedGraph
    arcs: tuple = field(repr=False)
    seed: int | None = None


def adversarial_scheme(lb: LbGraph, seed: int = 0, max_retries: int = 16) -> Rpts:
    """Unique-shortest-path scheme under W, residual ties broken by a random
    *symmetric* secondary weight. The result is consistent, stable and symmetric,
    and its source-terminal paths are decided by W alone."""
    g = lb.graph
    K = max(g.n, 2) ** 3
    for attempt in range(max_retries + 1):
        rng = make_rng(seed + attempt)
        edges = g.sorted_edges()
        vals = rng.integers(0, K + 1, size=len(edges))
        sec = {e: int(x) for e, x in zip(edges, vals)}
        wd = WeightedDigraph(g, _w_arcs(lb, sec), seed + attempt)
        try:
            for s in range(g.n):
                lex_dijkstra(wd.arcs, s)
        except TieDetected:
            continue
        return Rpts(wd)
    raise TieUnresolved("could not break ties in the adversarial scheme")


def overlay_size(lb: LbGraph, scheme: Rpts | None = None, **kw) -> int:
    """Edges in the f-fault overlay preserver of the sources under the adversarial scheme."""
    from .ftnet import overlay_edges

    scheme = scheme or adversarial_scheme(lb)
    H, _ = overlay_edges(scheme, lb.sources, lb.f, **kw)
    return len(H)
