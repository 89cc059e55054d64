"""Deterministic graph generators used by the CLI, tests and sweeps."""

from __future__ import annotations

import itertools

from .graph import UndirectedGraph
from .tiebreak import make_rng

KINDS = ("gnp", "cycle", "path", "star", "complete", "grid", "lb-family")


def gnp(n: int, p: float, seed: int = 0) -> UndirectedGraph:
    """Erdos-Renyi G(n, p): one uniform draw per vertex pair, in lexicographic pair order."""
    if n < 0 or not 0.0 <= p <= 1.0:
        raise ValueError(f"invalid gnp parameters n={n}, p={p}")
    rng = make_rng(seed)
    pairs = list(itertools.combinations(range(n), 2))
    keep = rng.random(len(pairs)) < p if pairs else []
    return UndirectedGraph.from_edges(n, [e for e, k in zip(pairs, keep) if k])


def cycle(n: int) -> UndirectedGraph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return UndirectedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> UndirectedGraph:
    if n < 1:
        raise ValueError("path needs n >= 1")
    return UndirectedGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(leaves: int) -> UndirectedGraph:
    """K_{1,leaves} with centre 0."""
    if leaves < 0:
        raise ValueError("star needs leaves >= 0")
    return UndirectedGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def complete(n: int) -> UndirectedGraph:
    if n < 1:
        raise ValueError("complete graph needs n >= 1")
    return UndirectedGraph.from_edges(n, itertools.combinations(range(n), 2))


def grid(rows: int, cols: int) -> UndirectedGraph:
    if rows < 1 or cols < 1:
        raise ValueError("grid needs rows, cols >= 1")
    vid = lambda r, c: r * cols + c  # noqa: E731
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((vid(r, c), vid(r, c + 1)))
            if r + 1 < rows:
                edges.append((vid(r, c), vid(r + 1, c)))
    return UndirectedGraph.from_edges(rows * cols, edges)


def lb_family(f: int, d: int) -> UndirectedGraph:
    from .lowerbound import build_gfd

    return build_gfd(f, d).graph


def generate(kind: str, params: dict, seed: int = 0) -> UndirectedGraph:
    """Dispatch by name. ``params`` holds the generator's keyword arguments."""
    params = dict(params)
    try:
        if kind == "gnp":
            return gnp(int(params["n"]), float(params["p"]), seed)
        if kind == "cycle":
            return cycle(int(params["n"]))
        if kind == "path":
            return path(int(params["n"]))
        if kind == "star":
            return star(int(params.get("leaves", params.get("n", 1) - 1)))
        if kind == "complete":
            return complete(int(params["n"]))
        if kind == "grid":
            return grid(int(params["rows"]), int(params["cols"]))
        if kind == "lb-family":
            return lb_family(int(params["f"]), int(params["d"]))
    except KeyError as exc:
        raise ValueError(f"generator {kind!r} is missing parameter {exc.args[0]!r}") from None
    raise ValueError(f"unknown generator {kind!r}; expected one of {', '.join(KINDS)}")
