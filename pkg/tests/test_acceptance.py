"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also repeated in the terminal summary, and ``python3 tests/test_acceptance.py``
runs the suite without pytest.
"""

from __future__ import annotations

import math
import time

import numpy as np

from restorable.congest import (
    SimNetwork,
    SptAlgorithm,
    network_for,
    run_distributed_1ft_sxs,
    run_random_delay,
    run_spt,
)
from restorable.ftnet import build_spanner, build_sxs_preserver
from restorable.generators import gnp
from restorable.labels import build_labels
from restorable.lowerbound import (
    build_gfd,
    build_gstar,
    certify_blowup,
    check_path_lemma,
    depth_formula,
    nleaf_closed_form,
    nleaf_formula,
    size_recurrence_bound,
    vertex_count,
)
from restorable.srp import single_pair_rp, single_pair_rp_reference, srp_with_scheme
from restorable.tiebreak import Rpts, perturb, with_resampling
from restorable.verify import (
    c4_symmetric_impossibility,
    check_consistent,
    check_preserver,
    check_restorable,
    check_spanner,
    check_stable,
    oracle_replacement_distance,
)

RESULTS: dict[int, str] = {}


def _record(k: int, ok: bool, detail: str) -> None:
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} | {detail}"
    RESULTS[k] = line
    print(line)


def _slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# ---------------------------------------------------------------------------


def criterion_1(graphs: int = 200) -> bool:
    """Exhaustive restorable / consistent / stable at f_max = 2 on n <= 9."""
    probs = (0.2, 0.4, 0.7)
    failures = []
    checked = 0
    resamples = 0
    t0 = time.time()
    for i in range(graphs):
        n = 5 + i % 5  # 5..9
        g = gnp(n, probs[i % 3], 1000 + i)

        def props(rp):
            return [check_restorable(rp, 2), check_consistent(rp, 2), check_stable(rp, 2)]

        reports, rp = with_resampling(g, i, props)
        resamples += rp.pd.seed != i
        for r in reports:
            checked += r.instances_checked
            if not r.passed:
                failures.append((i, r.to_dict()))
    ok = not failures
    _record(1, ok, f"{graphs} graphs n=5..9 p in {probs} f_max=2, {checked} checks, "
                   f"{len(failures)} failures, {resamples} whole-run resamples, {time.time() - t0:.0f}s")
    return ok


def criterion_2() -> bool:
    rep = c4_symmetric_impossibility()
    witnesses = [d["witness"] for d in rep.details]
    ok = rep.passed and rep.instances_checked == 4 and all(w is not None for w in witnesses)
    wit = "; ".join(f"({w['s']},{w['t']},{w['F'][0]})" for w in witnesses)
    _record(2, ok, f"{rep.instances_checked} symmetric C4 schemes, all non-restorable, witnesses {wit}")
    return ok


def criterion_3(instances: int = 60) -> bool:
    """SRP output equals BFS oracle; fast single-pair equals the quadratic reference."""
    rng = np.random.default_rng(3)
    bad_oracle = bad_ref = queries = pair_checks = 0
    for i in range(instances):
        n = int(rng.integers(12, 41))
        p = float(rng.uniform(1.5 / n, 0.35))
        g = gnp(n, p, 3000 + i)
        S = sorted(int(x) for x in rng.choice(n, size=int(rng.integers(2, 7)), replace=False))

        def run(rp):
            return srp_with_scheme(rp, S), srp_with_scheme(rp, S, reference=True)

        (fast, ref), rp = with_resampling(g, i, run)
        bad_ref += fast.to_dict() != ref.to_dict()
        for pr in fast.pairs:
            bad_oracle += pr.base != oracle_replacement_distance(g, pr.s, pr.t)
            for e, d in pr.failures.items():
                queries += 1
                bad_oracle += d != oracle_replacement_distance(g, pr.s, pr.t, [e])
        # the single-pair routine on the full graph, every canonical path from the first source
        for t in range(n):
            P = rp.path(S[0], t)
            if P is not None and t != S[0]:
                pair_checks += 1
                bad_ref += single_pair_rp(g, S[0], t, P) != single_pair_rp_reference(g, S[0], t, P)
    ok = bad_oracle == 0 and bad_ref == 0
    _record(3, ok, f"{instances} instances n<=40 |S|<=6, {queries} replacement distances, "
                   f"{bad_oracle} oracle mismatches, {pair_checks} extra fast-vs-reference paths, "
                   f"{bad_ref} reference mismatches")
    return ok


def criterion_4(instances: int = 12) -> bool:
    """1-FT and 2-FT S x S preservers pass exhaustive oracle sweeps; 1-FT size fit."""
    failures = 0
    sweeps = 0
    for i in range(instances):
        n = 10 + i % 5  # 10..14
        g = gnp(n, 0.3 + 0.03 * (i % 4), 4000 + i)
        S = list(range(0, n, 3))[:4]
        for budget in (1, 2):
            P, _ = with_resampling(g, i, lambda rp: build_sxs_preserver(rp, S, budget))
            rep = check_preserver(g, P.edges, S, budget, "SxS")
            sweeps += 1
            failures += not rep.passed
    xs, ys, ratios = [], [], []
    for n in (20, 30, 40, 60, 80):
        for k in (2, 4, 8):
            for seed in range(2):
                g = gnp(n, min(1.0, 8 / n), 5000 + 10 * n + seed)
                S = list(range(0, n, max(1, n // k)))[:k]
                P, _ = with_resampling(g, seed, lambda rp: build_sxs_preserver(rp, S, 1))
                xs.append(len(S) * n)
                ys.append(P.size)
                ratios.append(P.size / (len(S) * n))
    C = float(np.dot(xs, ys) / np.dot(xs, xs))
    ok = failures == 0 and C <= 2
    _record(4, ok, f"{sweeps} exhaustive S x S sweeps (1-FT and 2-FT, n=10..14), {failures} failures; "
                   f"1-FT fit edges = C*|S|*n gives C={C:.3f} (max ratio {max(ratios):.3f}) <= 2")
    return ok


def criterion_5(instances: int = 30) -> bool:
    """+4 stretch under every single fault; size trend on a dense G(n, p) family."""
    failures = 0
    for i in range(instances):
        n = 20 + (i % 5) * 5  # 20..40
        g = gnp(n, [0.15, 0.3, 0.5][i % 3], 6000 + i)
        sp = build_spanner(g, 1, seed=i)
        failures += not check_spanner(g, sp.edges, 1, 4).passed
    ns = [20, 30, 40, 60, 80, 120, 160]

    def trend(pf):
        sizes = []
        for n in ns:
            sizes.append(np.mean([build_spanner(gnp(n, pf(n), 7000 + 10 * n + s), 1, seed=s).size
                                  for s in range(3)]))
        return _slope(ns, sizes)

    dense = trend(lambda n: 0.5)
    sparse = trend(lambda n: min(1.0, 10 / n))
    ok = failures == 0 and 1.3 <= dense <= 1.7
    _record(5, ok, f"{instances} spanners n=20..40, all pairs x all single faults, {failures} stretch "
                   f"violations; slope on G(n,1/2) = {dense:.3f} in [1.3, 1.7] "
                   f"(G(n,10/n) slope {sparse:.3f}, host has only O(n) edges, informational)")
    return ok


def _label_sweep(g, labs, budget) -> tuple[int, int]:
    from restorable.cli import check_labels

    rep = check_labels(g, labs, budget)
    return rep.instances_checked, int(not rep.passed)


def criterion_6(instances: int = 10) -> bool:
    """f=1 labels answer |F| <= 2 exactly; f=0 labels answer |F| <= 1 exactly."""
    checked = failures = 0
    for i in range(instances):
        n = 7 + i % 6  # 7..12
        g = gnp(n, 0.35, 8000 + i)
        for f in (0, 1):
            labs, _ = with_resampling(g, i, lambda rp: build_labels(rp, f))
            c, bad = _label_sweep(g, labs, f + 1)
            checked += c
            failures += bad
    ok = failures == 0
    _record(6, ok, f"{instances} graphs n=7..12, f=0 and f=1 labels, {checked} exhaustive queries, "
                   f"{failures} failing sweeps")
    return ok


def criterion_7() -> bool:
    rows = []
    ok = True
    for f, d in [(1, 3), (1, 4), (2, 4)]:
        gfd = build_gfd(f, d)
        lam = len(gfd.leaves)
        depths = {len(p) - 1 for p in gfd.cores[0].paths.values()}
        counts_ok = (
            gfd.graph.n == vertex_count(f, d) <= size_recurrence_bound(f, d) <= 2 * f * d * d
            and lam == nleaf_formula(f, d) == nleaf_closed_form(f, d)
            and depths == {depth_formula(f, d)}
        )
        lemma = check_path_lemma(gfd)
        gstar = build_gstar(f, d)
        blow = certify_blowup(gstar)
        ok &= counts_ok and lemma.passed and blow.passed
        rows.append(f"(f={f},d={d}) N={gfd.graph.n}<={size_recurrence_bound(f, d)}<={2 * f * d * d} "
                    f"nLeaf={lam} depth={depth_formula(f, d)} lemma={'ok' if lemma.passed else 'FAIL'} "
                    f"B={len(gstar.B)} certified={blow.details[0]['certified']}")
    _record(7, ok, "; ".join(rows))
    return ok


def criterion_8(instances: int = 50) -> bool:
    """Distributed SPT = centralized, <= 2 messages per edge per SPT, random-delay round fit."""
    mismatches = 0
    max_msgs = 0
    for i in range(instances):
        n = 10 + i % 31  # 10..40
        g = gnp(n, min(1.0, 4 / n), 9000 + i)
        pd = perturb(g, i)
        net = network_for(pd, seed=i)
        s = i % n
        run = run_spt(net, s, pd.K)
        mismatches += run.parent != list(Rpts(pd).spt(s).parent)
        max_msgs = max(max_msgs, run.metrics.max_edge_messages)
    ratios = []
    composite_bad = 0
    xs, ys = [], []
    for seed in range(10):
        g = gnp(50, 0.1, 9500 + seed)
        pd = perturb(g, seed)
        net = network_for(pd, seed=seed)
        S = sorted(int(x) for x in np.random.default_rng(seed).choice(50, size=7, replace=False))
        D = net.diameter()
        res = run_random_delay(net, [SptAlgorithm(s, pd.K) for s in S], dilation=2 * D + 2,
                               congestion=2 * len(S), seed=seed)
        for s, states in zip(S, res.outputs):
            composite_bad += [st["parent"] for st in states] != run_spt(net, s, pd.K).parent
        scale = len(S) + D * math.log2(50)
        ratios.append(res.metrics.rounds / scale)
        xs.append(scale)
        ys.append(res.metrics.rounds)
        dist = run_distributed_1ft_sxs(SimNetwork(g, seed=seed), S, seed)
        composite_bad += not check_preserver(g, dist.edges, S, 1, "SxS").passed
    a = float(np.dot(xs, ys) / np.dot(xs, xs))
    ok = mismatches == 0 and max_msgs <= 2 and composite_bad == 0 and a <= 4 and max(ratios) <= 4
    _record(8, ok, f"{instances} SPT runs, {mismatches} tree mismatches, max per-edge messages {max_msgs}; "
                   f"10 seeds G(50,0.1) |S|=7: {composite_bad} composite/preserver failures, "
                   f"fitted a={a:.3f} (max ratio {max(ratios):.3f}) <= 4")
    return ok


# ---------------------------------------------------------------------------


def test_criterion_1_restorability_suite():
    assert criterion_1()


def test_criterion_2_c4_impossibility():
    assert criterion_2()


def test_criterion_3_srp_oracle():
    assert criterion_3()


def test_criterion_4_preservers():
    assert criterion_4()


def test_criterion_5_spanner():
    assert criterion_5()


def test_criterion_6_labels():
    assert criterion_6()


def test_criterion_7_lower_bound():
    assert criterion_7()


def test_criterion_8_congest():
    assert criterion_8()


if __name__ == "__main__":
    import sys

    results = [fn() for fn in (criterion_1, criterion_2, criterion_3, criterion_4,
                               criterion_5, criterion_6, criterion_7, criterion_8)]
    sys.exit(0 if all(results) else 1)
