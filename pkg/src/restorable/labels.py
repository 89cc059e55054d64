"""Fault-tolerant exact distance labels.

The label of s is the edge set of its f-fault {s} x V overlay preserver.
Two labels plus the fault set answer dist_{G-F}(s, t) for |F| <= f+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import BudgetViolation
from .graph import Edge, UNREACHABLE, bfs_distances_adj, norm_edge
from .ftnet import DEFAULT_MAX_FAULT_SETS, overlay_edges


@dataclass(frozen=True)
class DistanceLabel:
    owner: int
    n: int
    f: int
    edges: tuple  # sorted, normalised

    @property
    def nominal_bits(self) -> int:
        return len(self.edges) * 2 * max(1, math.ceil(math.log2(max(self.n, 2))))

    @property
    def encoded_bits(self) -> int:
        return 8 * len(self.to_bytes())

    def to_bytes(self) -> bytes:
        """Header (owner, n, f, count) then per edge: delta of u from the previous u, and v - u.
        All fields unsigned LEB128."""
        out = bytearray()
        for x in (self.owner, self.n, self.f, len(self.edges)):
            _put_varint(out, x)
        prev = 0
        for u, v in self.edges:
            _put_varint(out, u - prev)
            _put_varint(out, v - u)
            prev = u
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "DistanceLabel":
        pos = 0
        vals = []
        for _ in range(4):
            x, pos = _get_varint(data, pos)
            vals.append(x)
        owner, n, f, count = vals
        edges = []
        u = 0
        for _ in range(count):
            du, pos = _get_varint(data, pos)
            dv, pos = _get_varint(data, pos)
            u += du
            edges.append((u, u + dv))
        if pos != len(data):
            raise ValueError("trailing bytes in label")
        return cls(owner, n, f, tuple(edges))


def _put_varint(buf: bytearray, x: int) -> None:
    if x < 0:
        raise ValueError("varint must be nonnegative")
    while True:
        b = x & 0x7F
        x >>= 7
        if x:
            buf.append(b | 0x80)
        else:
            buf.append(b)
            return


def _get_varint(data: bytes, pos: int) -> tuple[int, int]:
    shift = 0
    x = 0
    while True:
        b = data[pos]
        pos += 1
        x |= (b & 0x7F) << shift
        if not b & 0x80:
            return x, pos
        shift += 7


def build_label(rpts, s: int, f: int, max_fault_sets: int = DEFAULT_MAX_FAULT_SETS) -> DistanceLabel:
    H, _ = overlay_edges(rpts, [s], f, max_fault_sets=max_fault_sets)
    return DistanceLabel(s, rpts.graph.n, f, tuple(sorted(H)))


def build_labels(rpts, f: int, max_fault_sets: int = DEFAULT_MAX_FAULT_SETS) -> dict[int, DistanceLabel]:
    return {s: build_label(rpts, s, f, max_fault_sets) for s in range(rpts.graph.n)}


def query(label_s: DistanceLabel, label_t: DistanceLabel, F=()) -> object:
    """dist_{G-F}(s, t) from the two labels alone: BFS in (label_s u label_t) minus F."""
    F = frozenset(norm_edge(*e) for e in F)
    budget = min(label_s.f, label_t.f) + 1
    if len(F) > budget:
        raise BudgetViolation(f"|F| = {len(F)} exceeds label budget {budget}")
    if label_s.n != label_t.n:
        raise ValueError("labels come from different graphs")
    n = label_s.n
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in set(label_s.edges) | set(label_t.edges):
        if (u, v) in F:
            continue
        adj[u].append(v)
        adj[v].append(u)
    if label_s.owner == label_t.owner:
        return 0
    return bfs_distances_adj(n, adj, label_s.owner)[label_t.owner]


def write_labels(labels: dict[int, DistanceLabel], directory) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for s, lab in sorted(labels.items()):
        (d / f"{s}.label").write_bytes(lab.to_bytes())


def read_label(directory, s: int) -> DistanceLabel:
    return DistanceLabel.from_bytes((Path(directory) / f"{s}.label").read_bytes())
