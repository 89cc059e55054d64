"""Round-accurate synchronous CONGEST simulator.

Vertices see only a :class:`LocalView` (their id, neighbours, incident edge
inputs and the global n) plus their own state and inbox. A message sent in
round r is read in round r + 1; each edge direction carries at most one
message per round, and payloads are checked against a bit cap of
``c * ceil(log2 n)`` using their declared schema size.

Several algorithms can share the network via random-delay scheduling. Time
is split into phases; in phase tau each algorithm i with start delay
delta_i runs its virtual round tau - delta_i, and the phase lasts as many
physical rounds as the busiest edge direction needs to drain its FIFO.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import CapExceeded, Nondeterminism, PayloadTooLarge
from .graph import UNREACHABLE, UndirectedGraph, bfs_distances, norm_edge
from .tiebreak import PerturbedDigraph, default_bound


def _bits(x: int) -> int:
    return max(1, math.ceil(math.log2(abs(x) + 1)))


@dataclass(frozen=True)
class LocalView:
    v: int
    neighbors: tuple
    n: int
    inputs: dict  # neighbour -> per-edge input (e.g. r(v, nbr))


class SimAlgorithm:
    """Per-vertex step logic. Subclasses implement init/step/done/payload_bits."""

    name = "alg"

    def init(self, view: LocalView) -> Any:
        raise NotImplementedError

    def step(self, view: LocalView, rnd: int, state: Any, inbox: dict, rng) -> tuple[Any, dict]:
        raise NotImplementedError

    def done(self, view: LocalView, state: Any) -> bool:
        raise NotImplementedError

    def payload_bits(self, payload, n: int) -> int:
        raise NotImplementedError


@dataclass
class SimNetwork:
    topology: UndirectedGraph
    inputs: list = None  # per-vertex dict neighbour -> edge input
    c: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.inputs is None:
            self.inputs = [{} for _ in range(self.topology.n)]

    @property
    def n(self) -> int:
        return self.topology.n

    @property
    def bit_cap(self) -> int:
        return self.c * max(1, math.ceil(math.log2(max(self.n, 2))))

    def view(self, v: int) -> LocalView:
        return LocalView(v, self.topology.adj[v], self.n, dict(self.inputs[v]))

    def diameter(self) -> int:
        best = 0
        for s in range(self.n):
            for d in bfs_distances(self.topology, s):
                if d is not UNREACHABLE and d > best:
                    best = d
        return best

    def vertex_rngs(self, salt: int) -> list:
        ss = np.random.SeedSequence([self.seed, salt])
        return [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(self.n)]


@dataclass
class RunMetrics:
    rounds: int = 0
    total_msgs: int = 0
    max_edge_msgs_per_round: int = 0
    max_edge_messages: int = 0
    edge_messages: dict = field(default_factory=dict, repr=False)
    precompute_rounds: int = 0
    phases: int = 0
    D: int | None = None

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "max_edge_msgs_per_round": self.max_edge_msgs_per_round,
            "max_edge_messages": self.max_edge_messages,
            "total_msgs": self.total_msgs,
            "precompute_rounds": self.precompute_rounds,
            "D": self.D,
        }


@dataclass
class _Job:
    alg: SimAlgorithm
    delay: int
    views: list
    states: list
    rngs: list
    inbox: list
    vround: int = 0
    finished: bool = False
    finish_round: int | None = None
    edge_messages: dict = field(default_factory=dict)
    history: list | None = None


@dataclass
class ScheduleResult:
    states: list  # per algorithm, per vertex final state
    metrics: RunMetrics
    virtual_rounds: list
    transcript: list
    histories: list


def run_schedule(
    net: SimNetwork,
    algs: Sequence[SimAlgorithm],
    delays: Sequence[int] | None = None,
    fifo_cap: int | None = None,
    max_phases: int = 100_000,
    record: bool = False,
) -> ScheduleResult:
    """Run algorithms concurrently; algorithm i starts at phase delays[i]."""
    n = net.n
    delays = list(delays) if delays is not None else [0] * len(algs)
    if len(delays) != len(algs):
        raise ValueError("one delay per algorithm")
    jobs = []
    for i, alg in enumerate(algs):
        views = [net.view(v) for v in range(n)]
        jobs.append(_Job(alg, delays[i], views, [alg.init(views[v]) for v in range(n)],
                         net.vertex_rngs(i), [dict() for _ in range(n)],
                         history=[] if record else None))
    cap = net.bit_cap
    metrics = RunMetrics()
    edge_totals: dict = {}
    transcript: list = []
    physical = 0
    tau = 0
    while not all(j.finished for j in jobs):
        if tau >= max_phases:
            raise RuntimeError("phase limit reached before termination")
        queues: dict[tuple[int, int], deque] = {}
        for ai, job in enumerate(jobs):
            if job.finished or tau < job.delay:
                continue
            r = job.vround
            new_inbox: list[dict] = [dict() for _ in range(n)]
            sent = False
            for v in range(n):
                state, out = job.alg.step(job.views[v], r, job.states[v], job.inbox[v], job.rngs[v])
                job.states[v] = state
                for w, payload in out.items():
                    if w not in job.views[v].neighbors:
                        raise ValueError(f"vertex {v} sent to non-neighbour {w}")
                    bits = job.alg.payload_bits(payload, n)
                    if bits > cap:
                        raise PayloadTooLarge(f"{bits} bits exceeds cap {cap}")
                    queues.setdefault((v, w), deque()).append((ai, payload))
                    new_inbox[w][v] = payload
                    e = norm_edge(v, w)
                    job.edge_messages[e] = job.edge_messages.get(e, 0) + 1
                    sent = True
            if job.history is not None:
                job.history.append([_snapshot(s) for s in job.states])
            job.inbox = new_inbox
            job.vround += 1
            if not sent and all(job.alg.done(job.views[v], job.states[v]) for v in range(n)):
                job.finished = True
                job.finish_round = job.vround
        load = max((len(q) for q in queues.values()), default=0)
        if fifo_cap is not None and load > fifo_cap:
            raise CapExceeded(f"edge queue of {load} exceeds cap {fifo_cap}")
        if load == 0 and all(j.finished for j in jobs):
            # closing phase where every vertex only decides to stop: no round used
            tau += 1
            break
        span = max(1, load)
        for k in range(span):
            per_edge_round: dict = {}
            for (v, w), q in queues.items():
                if q:
                    ai, payload = q.popleft()
                    if record:
                        transcript.append((physical + k, v, w, ai, payload))
                    e = norm_edge(v, w)
                    per_edge_round[e] = per_edge_round.get(e, 0) + 1
                    edge_totals[e] = edge_totals.get(e, 0) + 1
                    metrics.total_msgs += 1
            if per_edge_round:
                metrics.max_edge_msgs_per_round = max(metrics.max_edge_msgs_per_round,
                                                      max(per_edge_round.values()))
        physical += span
        tau += 1
    metrics.rounds = physical
    metrics.phases = tau
    metrics.edge_messages = edge_totals
    metrics.max_edge_messages = max(edge_totals.values(), default=0)
    return ScheduleResult([j.states for j in jobs], metrics, [j.finish_round for j in jobs],
                          transcript, [j.history for j in jobs])


def _snapshot(state):
    if isinstance(state, dict):
        return tuple(sorted((k, _snapshot(v)) for k, v in state.items()))
    if isinstance(state, (set, frozenset)):
        return tuple(sorted(state))
    return state


# ---------------------------------------------------------------------------
# Layered shortest-path tree under a tiebreaking weight function


class SptAlgorithm(SimAlgorithm):
    """Layer i announces dist*(s, .) one round after joining; a fresh vertex
    adopts the announcing neighbour minimising dist*(s, w) + w(w, v).

    Edge inputs are r(v, nbr); the arc weight w -> v is (1, -r(v, w)).
    Each vertex announces once, and only to neighbours it has not heard
    from, so every edge carries at most two messages.
    """

    def __init__(self, source: int, K: int):
        self.source = source
        self.K = K
        self.name = f"spt[{source}]"

    def init(self, view: LocalView) -> dict:
        root = view.v == self.source
        return {"joined": root, "dist": (0, 0) if root else None, "parent": -1 if root else None,
                "joined_round": -1 if root else None, "announced": False, "heard": frozenset()}

    def step(self, view, rnd, state, inbox, rng):
        state = dict(state)
        if inbox:
            state["heard"] = state["heard"] | frozenset(inbox)
        if not state["joined"]:
            if inbox:
                cands = []
                for w, (h, p) in inbox.items():
                    cands.append(((h + 1, p - view.inputs[w]), w))
                cands.sort()
                if len(cands) > 1 and cands[0][0] == cands[1][0]:
                    raise Nondeterminism(f"vertex {view.v}: parents {cands[0][1]} and {cands[1][1]} tie")
                state.update(joined=True, dist=cands[0][0], parent=cands[0][1], joined_round=rnd)
            return state, {}
        if not state["announced"] and rnd > state["joined_round"]:
            state["announced"] = True
            targets = [w for w in view.neighbors if w not in state["heard"]]
            return state, {w: state["dist"] for w in targets}
        return state, {}

    def done(self, view, state) -> bool:
        return state["announced"] or not state["joined"]

    def payload_bits(self, payload, n: int) -> int:
        h, p = payload
        return _bits(n) + 1 + _bits(n * self.K)


class WeightSamplingAlgorithm(SimAlgorithm):
    """One round: the smaller endpoint of each edge samples r uniformly in
    [-K, K] and sends it across; both ends store r(v, nbr)."""

    name = "sample-weights"

    def __init__(self, K: int):
        self.K = K

    def init(self, view):
        return {"r": {}, "sent": False}

    def step(self, view, rnd, state, inbox, rng):
        state = {"r": dict(state["r"]), "sent": state["sent"]}
        for w, x in inbox.items():
            state["r"][w] = -x
        if state["sent"]:
            return state, {}
        out = {}
        for w in view.neighbors:
            if view.v < w:
                x = int(rng.integers(-self.K, self.K + 1))
                state["r"][w] = x
                out[w] = x
        state["sent"] = True
        return state, out

    def done(self, view, state) -> bool:
        return state["sent"]

    def payload_bits(self, payload, n: int) -> int:
        return 1 + _bits(self.K)


# ---------------------------------------------------------------------------
# Drivers


def network_for(pd: PerturbedDigraph, c: int = 8, seed: int = 0) -> SimNetwork:
    g = pd.base
    inputs = [{w: pd.r[(v, w)] for w in g.adj[v]} for v in range(g.n)]
    return SimNetwork(g, inputs, c, seed)


@dataclass
class SptRun:
    parent: list
    dist: list
    metrics: RunMetrics


def _tree_from_states(states) -> tuple[list, list]:
    return [s["parent"] for s in states], [s["dist"] for s in states]


def run_spt(net: SimNetwork, s: int, K: int | None = None, record: bool = False) -> SptRun:
    """Distributed SPT from s under the network's per-edge perturbation inputs."""
    K = default_bound(net.n) if K is None else K
    res = run_schedule(net, [SptAlgorithm(s, K)], record=record)
    parent, dist = _tree_from_states(res.states[0])
    res.metrics.D = net.diameter()
    run = SptRun(parent, dist, res.metrics)
    run.schedule = res
    return run


@dataclass
class DelayRun:
    outputs: list
    metrics: RunMetrics
    delays: list
    solo_rounds: list
    congestion: int
    dilation: int


def random_delays(count: int, congestion: int, seed: int) -> list[int]:
    """Start phases drawn uniformly from [0, congestion] using the shared seed."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0xD1A7])))
    return [int(x) for x in rng.integers(0, congestion + 1, size=count)]


def run_random_delay(
    net: SimNetwork,
    algs: Sequence[SimAlgorithm],
    dilation: int,
    congestion: int,
    seed: int = 0,
    fifo_cap: int | None = None,
    precompute_rounds: int | None = None,
) -> DelayRun:
    """Schedule ``algs`` with independent uniform start delays in [0, congestion].

    Pre-computation is charged as a flat ``precompute_rounds`` (default
    dilation * ceil(log2 n)^2) and reported separately from ``rounds``.
    """
    delays = random_delays(len(algs), congestion, seed)
    res = run_schedule(net, algs, delays, fifo_cap=fifo_cap)
    lg = max(1, math.ceil(math.log2(max(net.n, 2))))
    res.metrics.precompute_rounds = dilation * lg * lg if precompute_rounds is None else precompute_rounds
    res.metrics.D = net.diameter()
    return DelayRun(res.states, res.metrics, delays, res.virtual_rounds, congestion, dilation)


@dataclass
class DistributedPreserver:
    edges: frozenset
    sources: tuple
    pd: PerturbedDigraph
    trees: dict
    metrics: RunMetrics
    weight_rounds: int
    schedule: DelayRun

    def to_metrics(self) -> dict:
        out = self.metrics.to_dict()
        out["rounds"] = self.metrics.rounds + self.weight_rounds
        out["edges"] = len(self.edges)
        return out


def run_distributed_1ft_sxs(net: SimNetwork, S: Iterable[int], seed: int = 0, K: int | None = None,
                            fifo_cap: int | None = None) -> DistributedPreserver:
    """Sample the perturbation locally (one round), then run one SPT per source
    under random delays; the union of the trees is a 1-fault S x S preserver."""
    S = tuple(sorted(set(S)))
    if not S:
        raise ValueError("source set must be nonempty")
    K = default_bound(net.n) if K is None else K
    g = net.topology
    sampler = run_schedule(SimNetwork(g, None, net.c, seed), [WeightSamplingAlgorithm(K)])
    local = [st["r"] for st in sampler.states[0]]
    r_edges = {(u, w): local[u][w] for u, w in g.sorted_edges()}
    for u, w in g.sorted_edges():
        if local[w][u] != -local[u][w]:
            raise Nondeterminism(f"perturbation of edge ({u},{w}) is not antisymmetric")
    pd = PerturbedDigraph.from_perturbation(g, r_edges, K, seed)
    wnet = SimNetwork(g, local, net.c, seed)
    algs = [SptAlgorithm(s, K) for s in S]
    D = wnet.diameter()
    sched = run_random_delay(wnet, algs, dilation=2 * D + 2, congestion=2 * len(S), seed=seed,
                             fifo_cap=fifo_cap)
    trees = {}
    edges = set()
    for s, states in zip(S, sched.outputs):
        parent, dist = _tree_from_states(states)
        trees[s] = parent
        edges.update(norm_edge(v, p) for v, p in enumerate(parent) if p is not None and p != -1)
    return DistributedPreserver(frozenset(edges), S, pd, trees, sched.metrics, sampler.metrics.rounds, sched)
