"""Brute-force oracles and property checkers for replacement-path tiebreaking schemes.

A *scheme* here is any object exposing ``graph`` and ``path(s, t, F)``
(vertex tuple or None). :class:`~restorable.tiebreak.Rpts` qualifies, as
does :class:`TableScheme` for hand-built schemes.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from .graph import (
    UNREACHABLE,
    Edge,
    UndirectedGraph,
    bfs_distances,
    fault_key,
    norm_edge,
)

FULL_ENUMERATION_MAX_N = 12
FULL_ENUMERATION_MAX_WORK = 10**6
DEFAULT_SAMPLES = 20000


def oracle_replacement_distance(g: UndirectedGraph, s: int, t: int, F: Iterable[Edge] = ()):
    """dist_{G minus F}(s, t) by plain BFS."""
    if not (0 <= s < g.n and 0 <= t < g.n):
        raise IndexError("vertex out of range")
    return bfs_distances(g, s, F)[t]


@dataclass
class PropertyReport:
    property: str
    passed: bool
    instances_checked: int = 0
    counterexample: dict | None = None
    details: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "property": self.property,
            "pass": self.passed,
            "instances_checked": self.instances_checked,
        }
        if self.counterexample is not None:
            out["counterexample"] = _jsonable(self.counterexample)
        if self.details:
            out["details"] = _jsonable(self.details)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(obj):
    if obj is UNREACHABLE:
        return None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_jsonable(v) for v in items]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


class TableScheme:
    """A tiebreaking scheme given by an explicit table ``{(s, t, F_key): path}``.

    Missing entries fall back to the unique shortest path in G minus F; a
    ValueError is raised when that path is not unique.
    """

    def __init__(self, graph: UndirectedGraph, table: dict):
        self.graph = graph
        self.table = {(s, t, fault_key(F)): tuple(p) for (s, t, F), p in table.items()}

    def path(self, s: int, t: int, F: Iterable[Edge] = frozenset()):
        key = (s, t, fault_key(F))
        if key in self.table:
            return self.table[key]
        paths = all_shortest_paths(self.graph, s, t, F)
        if not paths:
            return None
        if len(paths) > 1:
            raise ValueError(f"scheme undefined for tied pair {key}")
        return paths[0]


def all_shortest_paths(g: UndirectedGraph, s: int, t: int, F: Iterable[Edge] = ()) -> list[tuple]:
    """Every shortest s-t path in G minus F (exponential in general; desk-scale only)."""
    F = frozenset(norm_edge(*e) for e in F)
    ds = bfs_distances(g, s, F)
    if ds[t] is UNREACHABLE:
        return []
    dt = bfs_distances(g, t, F)
    out: list[tuple] = []

    def extend(prefix):
        u = prefix[-1]
        if u == t:
            out.append(tuple(prefix))
            return
        for v in g.adj[u]:
            if norm_edge(u, v) in F:
                continue
            if ds[v] == ds[u] + 1 and dt[v] is not UNREACHABLE and ds[v] + dt[v] == ds[t]:
                prefix.append(v)
                extend(prefix)
                prefix.pop()

    extend([s])
    return sorted(out)


# ---------------------------------------------------------------------------
# Enumeration


def fault_sets(g: UndirectedGraph, max_size: int, min_size: int = 0) -> Iterator[frozenset]:
    """All fault sets with min_size <= |F| <= max_size, lexicographic over sorted edge lists."""
    edges = g.sorted_edges()
    for k in range(min_size, max_size + 1):
        for combo in itertools.combinations(edges, k):
            yield frozenset(combo)


def _enumeration_work(g: UndirectedGraph, f_max: int) -> int:
    return sum(math.comb(g.m, k) for k in range(f_max + 1)) * g.n * g.n


def _should_sample(g: UndirectedGraph, f_max: int, sample: int | None) -> bool:
    if sample is not None:
        return True
    return g.n > FULL_ENUMERATION_MAX_N or g.m ** max(f_max, 1) > FULL_ENUMERATION_MAX_WORK


def _sampled_triples(g, f_max, count, seed, min_size, pairs=None):
    rng = np.random.default_rng(seed)
    edges = g.sorted_edges()
    pair_list = list(pairs) if pairs is not None else None
    for _ in range(count):
        if pair_list is not None:
            s, t = pair_list[rng.integers(len(pair_list))]
        else:
            s, t = (int(x) for x in rng.integers(g.n, size=2))
        k = int(rng.integers(min_size, min(f_max, len(edges)) + 1)) if edges else 0
        idx = rng.choice(len(edges), size=k, replace=False) if k else []
        yield s, t, frozenset(edges[i] for i in idx)


class _Profile:
    """Per (source, F) summary of a scheme's paths as vertex bitmasks."""

    __slots__ = ("levels", "uses")

    def __init__(self, scheme, s: int, F: frozenset):
        levels: dict[int, int] = {}
        uses: dict[Edge, int] = {}
        for x in range(scheme.graph.n):
            p = scheme.path(s, x, F)
            if p is None:
                continue
            bit = 1 << x
            levels[len(p) - 1] = levels.get(len(p) - 1, 0) | bit
            for i in range(len(p) - 1):
                e = norm_edge(p[i], p[i + 1])
                uses[e] = uses.get(e, 0) | bit
        self.levels = levels
        self.uses = uses


class _ProfileCache:
    def __init__(self, scheme):
        self.scheme = scheme
        self._d: dict = {}

    def get(self, s: int, F: frozenset) -> _Profile:
        key = (s, fault_key(F))
        prof = self._d.get(key)
        if prof is None:
            prof = self._d[key] = _Profile(self.scheme, s, F)
        return prof


def _proper_subsets(F: frozenset) -> list[frozenset]:
    items = sorted(F)
    out = []
    for k in range(len(items) - 1, -1, -1):
        out.extend(frozenset(c) for c in itertools.combinations(items, k))
    return out


def restoration_witness(scheme, s: int, t: int, F, profiles: _ProfileCache | None = None, target=None):
    """Return ``(x, F')`` such that pi(s,x|F') + reverse(pi(t,x|F')) is a
    shortest s-t path avoiding F, or None if no such pair exists.

    Returns ``(None, None)`` for pairs disconnected in G minus F (vacuous).
    Among witnesses, prefers the largest F' and then the smallest x.
    """
    F = frozenset(norm_edge(*e) for e in F)
    g = scheme.graph
    if target is None:
        target = oracle_replacement_distance(g, s, t, F)
    if target is UNREACHABLE:
        return (None, None)
    profiles = profiles or _ProfileCache(scheme)
    for Fp in _proper_subsets(F):
        a = profiles.get(s, Fp)
        b = profiles.get(t, Fp)
        cand = 0
        for k, mask in a.levels.items():
            other = b.levels.get(target - k)
            if other:
                cand |= mask & other
        if not cand:
            continue
        for e in F:
            cand &= ~(a.uses.get(e, 0) | b.uses.get(e, 0))
        if cand:
            x = (cand & -cand).bit_length() - 1
            return (x, Fp)
    return None


def check_restorable(
    scheme,
    f_max: int,
    pairs: Iterable[tuple[int, int]] | None = None,
    sample: int | None = None,
    seed: int = 0,
) -> PropertyReport:
    """Restorability over every nonempty F with |F| <= f_max (or a random sample of triples)."""
    if f_max < 1:
        raise ValueError("f_max must be >= 1")
    g = scheme.graph
    pair_list = list(pairs) if pairs is not None else None
    profiles = _ProfileCache(scheme)
    checked = 0
    if _should_sample(g, f_max, sample):
        triples = _sampled_triples(g, f_max, sample or DEFAULT_SAMPLES, seed, 1, pair_list)
        for s, t, F in triples:
            checked += 1
            if restoration_witness(scheme, s, t, F, profiles) is None:
                return _fail_restorable(checked, s, t, F)
        return PropertyReport("restorable", True, checked)

    all_pairs = pair_list if pair_list is not None else [(s, t) for s in range(g.n) for t in range(g.n)]
    sources = sorted({s for s, _ in all_pairs})
    for F in fault_sets(g, f_max, min_size=1):
        dist = {s: bfs_distances(g, s, F) for s in sources}
        for s, t in all_pairs:
            checked += 1
            if restoration_witness(scheme, s, t, F, profiles, target=dist[s][t]) is None:
                return _fail_restorable(checked, s, t, F)
    return PropertyReport("restorable", True, checked)


def _fail_restorable(checked, s, t, F) -> PropertyReport:
    return PropertyReport(
        "restorable",
        False,
        checked,
        {"kind": "restorable", "s": s, "t": t, "F": sorted(F), "detail": "no midpoint x and proper F' restore the pair"},
    )


def consistency_violation(scheme, s: int, t: int, F) -> dict | None:
    """Check every prefix and suffix of pi(s,t|F); together these cover all contiguous subpairs."""
    P = scheme.path(s, t, F)
    if P is None:
        return None
    for i, u in enumerate(P):
        suffix = scheme.path(u, t, F)
        if suffix != P[i:]:
            return {"kind": "consistent", "s": s, "t": t, "F": sorted(F), "u": u, "v": t,
                    "expected": list(P[i:]), "got": None if suffix is None else list(suffix)}
        prefix = scheme.path(s, u, F)
        if prefix != P[: i + 1]:
            return {"kind": "consistent", "s": s, "t": t, "F": sorted(F), "u": s, "v": u,
                    "expected": list(P[: i + 1]), "got": None if prefix is None else list(prefix)}
    return None


def check_consistent(scheme, f_max: int, sample: int | None = None, seed: int = 0) -> PropertyReport:
    g = scheme.graph
    checked = 0
    if _should_sample(g, f_max, sample):
        triples = _sampled_triples(g, f_max, sample or DEFAULT_SAMPLES, seed, 0)
    else:
        triples = ((s, t, F) for F in fault_sets(g, f_max) for s in range(g.n) for t in range(g.n))
    for s, t, F in triples:
        checked += 1
        bad = consistency_violation(scheme, s, t, F)
        if bad is not None:
            return PropertyReport("consistent", False, checked, bad)
    return PropertyReport("consistent", True, checked)


def stability_violation(scheme, s: int, t: int, F, f: Edge) -> dict | None:
    F = frozenset(norm_edge(*e) for e in F)
    f = norm_edge(*f)
    P = scheme.path(s, t, F)
    if P is not None and f in {norm_edge(P[i], P[i + 1]) for i in range(len(P) - 1)}:
        return None
    Q = scheme.path(s, t, F | {f})
    if Q != P:
        return {"kind": "stable", "s": s, "t": t, "F": sorted(F), "f": f,
                "expected": None if P is None else list(P), "got": None if Q is None else list(Q)}
    return None


def check_stable(scheme, f_max: int, sample: int | None = None, seed: int = 0) -> PropertyReport:
    g = scheme.graph
    checked = 0
    if f_max < 1:
        return PropertyReport("stable", True, 0)
    if _should_sample(g, f_max, sample):
        rng = np.random.default_rng(seed + 1)
        edges = g.sorted_edges()
        for s, t, F in _sampled_triples(g, f_max - 1, sample or DEFAULT_SAMPLES, seed, 0):
            rest = [e for e in edges if e not in F]
            if not rest:
                continue
            f = rest[int(rng.integers(len(rest)))]
            checked += 1
            bad = stability_violation(scheme, s, t, F, f)
            if bad is not None:
                return PropertyReport("stable", False, checked, bad)
        return PropertyReport("stable", True, checked)

    edges = g.sorted_edges()
    n = g.n
    for F in fault_sets(g, f_max - 1):
        for s in range(n):
            base = [scheme.path(s, t, F) for t in range(n)]
            on_path = [
                {norm_edge(p[i], p[i + 1]) for i in range(len(p) - 1)} if p is not None else set()
                for p in base
            ]
            for f in edges:
                if f in F:
                    continue
                G2 = F | {f}
                for t in range(n):
                    checked += 1
                    if f in on_path[t]:
                        continue
                    got = scheme.path(s, t, G2)
                    if got != base[t]:
                        return PropertyReport("stable", False, checked, {
                            "kind": "stable", "s": s, "t": t, "F": sorted(F), "f": f,
                            "expected": None if base[t] is None else list(base[t]),
                            "got": None if got is None else list(got)})
    return PropertyReport("stable", True, checked)


def check_symmetric(scheme, f_max: int = 0) -> PropertyReport:
    g = scheme.graph
    checked = 0
    for F in fault_sets(g, f_max):
        for s in range(g.n):
            for t in range(s + 1, g.n):
                checked += 1
                p, q = scheme.path(s, t, F), scheme.path(t, s, F)
                if (p is None) != (q is None) or (p is not None and p != q[::-1]):
                    return PropertyReport("symmetric", False, checked,
                                          {"kind": "symmetric", "s": s, "t": t, "F": sorted(F),
                                           "forward": p, "backward": q})
    return PropertyReport("symmetric", True, checked)


def check_shortest(scheme, f_max: int) -> PropertyReport:
    """Every selected path is a valid shortest path in G minus F."""
    g = scheme.graph
    checked = 0
    for F in fault_sets(g, f_max):
        for s in range(g.n):
            dist = bfs_distances(g, s, F)
            for t in range(g.n):
                checked += 1
                p = scheme.path(s, t, F)
                ok = (p is None) if dist[t] is UNREACHABLE else (
                    p is not None and p[0] == s and p[-1] == t and len(p) - 1 == dist[t]
                    and len(set(p)) == len(p)
                    and all(g.has_edge(p[i], p[i + 1]) and norm_edge(p[i], p[i + 1]) not in F
                            for i in range(len(p) - 1)))
                if not ok:
                    return PropertyReport("shortest", False, checked,
                                          {"kind": "shortest", "s": s, "t": t, "F": sorted(F), "path": p})
    return PropertyReport("shortest", True, checked)


def recheck(scheme, counterexample: dict) -> bool:
    """True iff the counterexample still fails when checked in isolation."""
    kind = counterexample["kind"]
    s, t = counterexample["s"], counterexample["t"]
    F = frozenset(tuple(e) for e in counterexample["F"])
    if kind == "restorable":
        return restoration_witness(scheme, s, t, F) is None
    if kind == "consistent":
        return consistency_violation(scheme, s, t, F) is not None
    if kind == "stable":
        return stability_violation(scheme, s, t, F, tuple(counterexample["f"])) is not None
    if kind == "symmetric":
        p, q = scheme.path(s, t, F), scheme.path(t, s, F)
        return (p is None) != (q is None) or (p is not None and p != q[::-1])
    raise ValueError(f"unknown counterexample kind {kind!r}")


# ---------------------------------------------------------------------------
# The main proof's inequality, checked on concrete instances


def _edge_set(p) -> set:
    return {norm_edge(a, b) for a, b in zip(p, p[1:])}


def proof_configuration(rpts, s: int, t: int, arc: tuple[int, int]) -> dict | None:
    """Locate x, y for a failing arc (u, v) of pi(s, t) and evaluate both inequalities.

    Returns None when (u, v) is not an arc of pi(s, t) in that orientation or
    t is disconnected from s after the failure.
    """
    u, v = arc
    P = rpts.path(s, t)
    if P is None or (u, v) not in zip(P, P[1:]):
        return None
    f = frozenset([norm_edge(u, v)])
    Q = rpts.path(s, t, f)
    if Q is None:
        return None
    fe = norm_edge(u, v)
    x_idx = max(i for i, w in enumerate(Q) if fe not in _edge_set(rpts.path(s, w)))
    x = Q[x_idx]
    y = Q[x_idx + 1]
    d = rpts.dist_star
    w = rpts.pd.weight
    lhs1 = w(u, v) + d(v, y)
    rhs1 = d(u, x) + w(x, y)
    lhs2 = d(v, y) + d(y, x)
    rhs2 = d(v, u) + d(u, x)
    return {
        "s": s, "t": t, "u": u, "v": v, "x": x, "y": y,
        "first": lhs1 < rhs1,
        "second": lhs2 < rhs2,
        "t_to_x_avoids_f": fe not in _edge_set(rpts.path(t, x)),
        "y_path_uses_f": fe in _edge_set(rpts.path(s, y)),
    }


def check_proof_inequality(rpts, pairs: Iterable[tuple[int, int]] | None = None) -> PropertyReport:
    g = rpts.graph
    checked = 0
    pair_list = pairs if pairs is not None else ((s, t) for s in range(g.n) for t in range(g.n) if s != t)
    for s, t in pair_list:
        P = rpts.path(s, t)
        if P is None:
            continue
        for arc in zip(P, P[1:]):
            cfg = proof_configuration(rpts, s, t, arc)
            if cfg is None:
                continue
            checked += 1
            if not (cfg["first"] and cfg["second"] and cfg["t_to_x_avoids_f"] and cfg["y_path_uses_f"]):
                cfg["kind"] = "proof_inequality"
                cfg["F"] = [norm_edge(*arc)]
                return PropertyReport("proof_inequality", False, checked, cfg)
    return PropertyReport("proof_inequality", True, checked)


# ---------------------------------------------------------------------------
# Symmetric schemes on the 4-cycle


def c4_graph() -> UndirectedGraph:
    return UndirectedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


def c4_symmetric_schemes() -> list[TableScheme]:
    """All symmetric tiebreaking schemes of C4: one choice per antipodal pair."""
    g = c4_graph()
    schemes = []
    for mid02, mid13 in itertools.product((1, 3), (0, 2)):
        table = {}
        for s, t in itertools.permutations(range(4), 2):
            if g.has_edge(s, t):
                table[(s, t, ())] = (s, t)
        table[(0, 2, ())] = (0, mid02, 2)
        table[(2, 0, ())] = (2, mid02, 0)
        table[(1, 3, ())] = (1, mid13, 3)
        table[(3, 1, ())] = (3, mid13, 1)
        for v in range(4):
            table[(v, v, ())] = (v,)
        schemes.append(TableScheme(g, table))
    return schemes


def c4_symmetric_impossibility() -> PropertyReport:
    """Every symmetric scheme on C4 violates restorability under some single edge fault."""
    g = c4_graph()
    schemes = c4_symmetric_schemes()
    details = []
    all_fail = len(schemes) == 4
    for sch in schemes:
        sym = check_symmetric(sch, 0).passed
        lengths_ok = check_shortest(sch, 0).passed
        rep = check_restorable(sch, 1)
        witness = rep.counterexample
        refails = witness is not None and recheck(sch, witness)
        details.append({
            "pi(0,2)": sch.path(0, 2), "pi(1,3)": sch.path(1, 3),
            "symmetric": sym, "shortest": lengths_ok,
            "restorable": rep.passed, "witness": witness, "witness_refails": refails,
        })
        all_fail &= sym and lengths_ok and not rep.passed and refails
    return PropertyReport("c4_symmetric_impossibility", all_fail, len(schemes), None, details)


# ---------------------------------------------------------------------------
# Oracle sweeps for subgraph constructions


def distance_matrix(g: UndirectedGraph, F: Iterable[Edge] = (), sources: Sequence[int] | None = None) -> np.ndarray:
    """Unweighted distances in G minus F from ``sources`` (default all); inf when disconnected."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    F = frozenset(norm_edge(*e) for e in F)
    es = [e for e in g.edges if e not in F]
    if es:
        rows, cols = zip(*es)
        A = csr_matrix((np.ones(len(es)), (rows, cols)), shape=(g.n, g.n))
    else:
        A = csr_matrix((g.n, g.n))
    idx = None if sources is None else list(sources)
    return shortest_path(A, method="D", directed=False, unweighted=True, indices=idx)


def check_subgraph_distances(
    g: UndirectedGraph,
    H_edges: Iterable[Edge],
    sources: Sequence[int],
    targets: Sequence[int] | None,
    f: int,
    additive: int = 0,
    name: str = "preserver",
    only_subgraph_faults: bool = False,
) -> PropertyReport:
    """dist_{H-F}(s, t) <= dist_{G-F}(s, t) + additive for s in sources, t in targets, |F| <= f.

    With additive == 0 this is exact preservation (H is a subgraph, so >= holds).
    ``only_subgraph_faults`` restricts F to edges of H, which suffices once the
    smaller fault sets pass.
    """
    H = g.subgraph(H_edges)
    sources = sorted(set(sources))
    tcols = slice(None) if targets is None else sorted(set(targets))
    checked = 0
    fs = fault_sets(H if only_subgraph_faults else g, f)
    for F in fs:
        dG = distance_matrix(g, F, sources)[:, tcols]
        dH = distance_matrix(H, F, sources)[:, tcols]
        checked += dG.size
        bad = np.argwhere(~(dH <= dG + additive))
        if bad.size:
            i, j = bad[0]
            t = j if targets is None else tcols[j]
            return PropertyReport(name, False, checked, {
                "kind": name, "s": sources[i], "t": int(t), "F": sorted(F),
                "dist_G": _finite(dG[i, j]), "dist_H": _finite(dH[i, j])})
    return PropertyReport(name, True, checked)


def _finite(x):
    return None if not np.isfinite(x) else int(x)


def check_preserver(g, H_edges, S, f, kind: str = "SxS", **kw) -> PropertyReport:
    targets = S if kind == "SxS" else None
    return check_subgraph_distances(g, H_edges, S, targets, f, 0, f"{kind}_preserver", **kw)


def check_spanner(g, H_edges, f, additive: int = 4, **kw) -> PropertyReport:
    return check_subgraph_distances(g, H_edges, range(g.n), None, f, additive, "spanner", **kw)
