"""Command-line front end and experiment harness.

Every subcommand is first turned into an :class:`ExperimentConfig`, which
round-trips through JSON, and then executed by :func:`run_experiment`.
Reports are JSON (sorted keys) or CSV, so reruns with the same config are
byte-identical. Exit status is 0 iff every enabled verification passes;
library errors map to the exit code carried by their class.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import congest, ftnet, generators, labels, lowerbound, srp, verify
from .errors import RestorableError, VerificationFailed
from .graph import UNREACHABLE, UndirectedGraph, dumps_graph, norm_edge, read_graph
from .tiebreak import Rpts, perturb, with_resampling

log = logging.getLogger("restorable")

COMMANDS = ("gen", "reweight", "srp", "preserver", "spanner", "labels", "lb", "congest", "verify")


@dataclass
class ExperimentConfig:
    command: str
    seed: int = 0
    graph: str | None = None  # edge-list path
    generator: dict | None = None  # {"kind": ..., "params": {...}, "seed": ...}
    f: int | None = None
    sources: list | None = None
    sigma: int | None = None  # None means AUTO
    K: int | None = None
    mode: str | None = None  # sub-mode: preserver kind, labels action, congest algorithm
    params: dict = field(default_factory=dict)  # command-specific extras
    out: str | None = None
    outputs: dict = field(default_factory=dict)  # named secondary outputs
    verify: bool = False
    threads: int = 1

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls(**json.loads(text))

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.seed is None:
            raise ValueError("a seed is required")
        if self.generator is not None and self.generator.get("seed") is None:
            raise ValueError("generator seed is required")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


# ---------------------------------------------------------------------------
# Helpers


def _parse_sources(text: str | None) -> list | None:
    if text is None:
        return None
    return sorted({int(x) for x in text.replace(" ", "").split(",") if x})


def parse_faults(text: str | None) -> frozenset:
    """"u-v,u-v" -> frozenset of normalised edges."""
    if not text:
        return frozenset()
    out = set()
    for item in text.replace(" ", "").split(","):
        if not item:
            continue
        try:
            u, v = item.split("-")
            out.add(norm_edge(int(u), int(v)))
        except ValueError:
            raise ValueError(f"bad fault {item!r}; expected u-v") from None
    return frozenset(out)


def _parse_params(items) -> dict:
    params = {}
    for item in items or ():
        if "=" not in item:
            raise ValueError(f"bad parameter {item!r}; expected key=value")
        k, v = item.split("=", 1)
        params[k] = _number(v)
    return params


def _number(v: str):
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


def load_config_graph(cfg: ExperimentConfig) -> UndirectedGraph:
    if cfg.graph is not None:
        return read_graph(cfg.graph)
    if cfg.generator is not None:
        gen = cfg.generator
        return generators.generate(gen["kind"], gen.get("params", {}), gen["seed"])
    raise ValueError("no graph given: use --graph FILE or --gen KIND key=value ...")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)


def _sidecar(path: str | None) -> str | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    return str(p.with_suffix(".json")) if p.suffix != ".json" else str(p) + ".stats.json"


def _edges_text(n: int, edges) -> str:
    return dumps_graph(UndirectedGraph.from_edges(n, sorted(edges)))


def _reports_ok(reports) -> bool:
    return all(r.passed for r in reports)


# ---------------------------------------------------------------------------
# Pipelines. Each returns the list of PropertyReports it produced.


def _run_gen(cfg: ExperimentConfig) -> list:
    g = load_config_graph(cfg)
    _emit(dumps_graph(g), cfg.out)
    return []


def _run_reweight(cfg: ExperimentConfig) -> list:
    g = load_config_graph(cfg)
    pd = perturb(g, cfg.seed, cfg.K)
    _emit(pd.dumps(), cfg.out)
    reports = []
    if cfg.verify:
        # the scheme is deliberately asymmetric, so only validity is checked here
        reports.append(verify.check_shortest(Rpts(pd), 0))
    return reports


def _run_srp(cfg: ExperimentConfig) -> list:
    g = load_config_graph(cfg)
    S = cfg.sources if cfg.sources is not None else list(range(g.n))
    out = srp.srp(g, S, cfg.seed, cfg.K)
    _emit(out.to_json() + "\n", cfg.out)
    if not cfg.verify:
        return []
    checked = 0
    for pr in out.pairs:
        for e, d in pr.failures.items():
            checked += 1
            if verify.oracle_replacement_distance(g, pr.s, pr.t, [e]) != d:
                return [verify.PropertyReport("srp_oracle", False, checked,
                                              {"s": pr.s, "t": pr.t, "F": [e], "reported": d})]
    return [verify.PropertyReport("srp_oracle", True, checked)]


def _run_preserver(cfg: ExperimentConfig) -> list:
    g = load_config_graph(cfg)
    kind = (cfg.mode or "sxv").lower()
    if kind not in ("sxv", "sxs"):
        raise ValueError("--kind must be sxv or sxs")
    f = 1 if cfg.f is None else cfg.f
    S = cfg.sources if cfg.sources is not None else [0]
    build = ftnet.build_sxs_preserver if kind == "sxs" else ftnet.build_sxv_preserver
    P, _ = with_resampling(g, cfg.seed, lambda r: build(r, S, f), K=cfg.K)
    _emit(_edges_text(g.n, P.edges), cfg.out)
    reports = []
    if cfg.verify:
        reports.append(verify.check_preserver(g, P.edges, S, f, P.kind))
    stats = P.stats()
    stats["verified"] = _reports_ok(reports) if cfg.verify else None
    side = cfg.outputs.get("stats") or _sidecar(cfg.out)
    if side:
        _emit(_dump_json(stats), side)
    return reports


def _spanner_row(args) -> tuple:
    n, p, f, sigma, seed = args
    g = generators.gnp(n, p, seed)
    sp = ftnet.build_spanner(g, f, seed, sigma)
    return n, g.m, sp.size, ftnet.spanner_bound(n, f)


def _run_spanner(cfg: ExperimentConfig) -> list:
    f = 1 if cfg.f is None else cfg.f
    sweep = cfg.params.get("sweep")
    if sweep:
        avg = cfg.params.get("avg_degree")
        p = cfg.params.get("p")
        jobs = [(n, p if p is not None else min(1.0, (avg or 10) / n), f, cfg.sigma, cfg.seed + i)
                for i, n in enumerate(sweep)]
        if cfg.threads > 1:
            with ProcessPoolExecutor(cfg.threads) as ex:
                rows = list(ex.map(_spanner_row, jobs))
        else:
            rows = [_spanner_row(j) for j in jobs]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "host_edges", "edges", "bound_value"])
        for n, m, e, b in sorted(rows):
            w.writerow([n, m, e, f"{b:.3f}"])
        _emit(buf.getvalue(), cfg.out)
        return []
    g = load_config_graph(cfg)
    sp = ftnet.build_spanner(g, f, cfg.seed, cfg.sigma)
    _emit(_edges_text(g.n, sp.edges), cfg.out)
    reports = []
    if cfg.verify:
        reports.append(verify.check_spanner(g, sp.edges, f, sp.additive))
    stats = sp.stats()
    stats["verified"] = _reports_ok(reports) if cfg.verify else None
    side = cfg.outputs.get("stats") or _sidecar(cfg.out)
    if side:
        _emit(_dump_json(stats), side)
    return reports


def _run_labels(cfg: ExperimentConfig) -> list:
    action = cfg.mode or "build"
    if action == "query":
        d = cfg.params["dir"]
        ls, lt = labels.read_label(d, cfg.params["s"]), labels.read_label(d, cfg.params["t"])
        F = parse_faults(cfg.params.get("fail"))
        dist = labels.query(ls, lt, F)
        res = {"s": ls.owner, "t": lt.owner, "F": [list(e) for e in sorted(F)],
               "dist": None if dist is UNREACHABLE else dist}
        reports = []
        if cfg.verify:
            g = load_config_graph(cfg)
            want = verify.oracle_replacement_distance(g, ls.owner, lt.owner, F)
            reports.append(verify.PropertyReport("label_query", want == dist, 1,
                                                 None if want == dist else res))
        _emit(_dump_json(res), cfg.out)
        return reports
    if action != "build":
        raise ValueError("labels action must be build or query")
    g = load_config_graph(cfg)
    f = 1 if cfg.f is None else cfg.f
    labs, _ = with_resampling(g, cfg.seed, lambda r: labels.build_labels(r, f), K=cfg.K)
    out_dir = cfg.out or "labels"
    labels.write_labels(labs, out_dir)
    bits = [lab.encoded_bits for lab in labs.values()]
    stats = {"f": f, "n": g.n, "max_bits": max(bits, default=0),
             "max_edges": max((len(lab.edges) for lab in labs.values()), default=0),
             "total_bits": sum(bits)}
    reports = []
    if cfg.verify:
        reports.append(check_labels(g, labs, f + 1))
        stats["verified"] = reports[-1].passed
    _emit(_dump_json(stats), str(Path(out_dir) / "stats.json"))
    return reports


def check_labels(g: UndirectedGraph, labs: dict, budget: int) -> verify.PropertyReport:
    """Every query with |F| <= budget against BFS; fault sets enumerated exhaustively."""
    checked = 0
    for F in verify.fault_sets(g, budget):
        dm = verify.distance_matrix(g, F)
        for s in range(g.n):
            for t in range(g.n):
                checked += 1
                got = labels.query(labs[s], labs[t], F)
                want = dm[s, t]
                ok = (got is UNREACHABLE) if want == float("inf") else got == int(want)
                if not ok:
                    return verify.PropertyReport("labels", False, checked, {
                        "kind": "labels", "s": s, "t": t, "F": sorted(F),
                        "got": None if got is UNREACHABLE else got,
                        "want": None if want == float("inf") else int(want)})
    return verify.PropertyReport("labels", True, checked)


def _run_lb(cfg: ExperimentConfig) -> list:
    if (cfg.mode or "gen") != "gen":
        raise ValueError("lb supports only 'gen'")
    f = 1 if cfg.f is None else cfg.f
    d = cfg.params.get("d", 3)
    sigma = cfg.sigma or 1
    lb = lowerbound.build_gstar(f, d, sigma, cfg.params.get("x_count"))
    _emit(dumps_graph(lb.graph), cfg.out)
    if cfg.outputs.get("weights"):
        _emit(lb.dumps_weights(), cfg.outputs["weights"])
    reports = []
    if cfg.verify:
        reports.append(lowerbound.check_path_lemma(lowerbound.build_gfd(f, d)))
        reports.append(lowerbound.certify_blowup(lb))
    stats = {"f": f, "d": d, "sigma": sigma, "n": lb.graph.n, "m": lb.graph.m,
             "N": lowerbound.vertex_count(f, d), "depth": lowerbound.depth_formula(f, d),
             "nLeaf": lowerbound.nleaf_formula(f, d), "X": len(lb.X), "B": len(lb.B)}
    side = cfg.outputs.get("stats") or _sidecar(cfg.out)
    if side:
        _emit(_dump_json(stats), side)
    return reports


def _run_congest(cfg: ExperimentConfig) -> list:
    g = load_config_graph(cfg)
    alg = cfg.mode or "spt"
    S = cfg.sources if cfg.sources is not None else [0]
    reports = []
    if alg == "spt":
        pd = perturb(g, cfg.seed, cfg.K)
        net = congest.network_for(pd, seed=cfg.seed)
        run = congest.run_spt(net, S[0], pd.K)
        metrics = run.metrics.to_dict()
        if cfg.verify:
            central = Rpts(pd).spt(S[0])
            same = list(central.parent) == list(run.parent)
            reports.append(verify.PropertyReport("distributed_spt", same, 1,
                                                 None if same else {"s": S[0]}))
    elif alg == "sxs":
        net = congest.SimNetwork(g, None, seed=cfg.seed)
        res = congest.run_distributed_1ft_sxs(net, S, cfg.seed, cfg.K)
        metrics = res.to_metrics()
        if cfg.verify:
            reports.append(verify.check_preserver(g, res.edges, S, 1, "SxS"))
    else:
        raise ValueError("congest algorithm must be spt or sxs")
    side = cfg.outputs.get("metrics") or cfg.out
    _emit(_dump_json(metrics), side)
    return reports


def _verify_instance(args) -> list:
    g, seed, f_max = args
    def props(rpts):
        return [verify.check_restorable(rpts, f_max), verify.check_consistent(rpts, f_max),
                verify.check_stable(rpts, f_max), verify.check_shortest(rpts, f_max)]
    reports, _ = with_resampling(g, seed, props)
    return reports


def _run_verify(cfg: ExperimentConfig) -> list:
    f_max = 2 if cfg.f is None else cfg.f
    count = cfg.params.get("instances")
    if count:
        n_max = cfg.params.get("n_max", 9)
        probs = (0.2, 0.4, 0.7)
        jobs = []
        for i in range(count):
            n = 4 + i % (n_max - 3)
            seed = cfg.seed + i
            jobs.append((generators.gnp(n, probs[i % 3], seed), seed, f_max))
    else:
        jobs = [(load_config_graph(cfg), cfg.seed, f_max)]
    if cfg.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(cfg.threads) as ex:
            results = list(ex.map(_verify_instance, jobs))
    else:
        results = [_verify_instance(j) for j in jobs]
    summary: dict = {}
    failures = []
    for i, reps in enumerate(results):
        for r in reps:
            agg = summary.setdefault(r.property, {"property": r.property, "pass": True,
                                                  "instances_checked": 0})
            agg["instances_checked"] += r.instances_checked
            if not r.passed:
                agg["pass"] = False
                failures.append({"instance": i, **r.to_dict()})
    doc = {"graphs": len(jobs), "f_max": f_max, "reports": [summary[k] for k in sorted(summary)],
           "failures": failures}
    _emit(_dump_json(doc), cfg.out)
    return [r for reps in results for r in reps]


PIPELINES = {
    "gen": _run_gen, "reweight": _run_reweight, "srp": _run_srp, "preserver": _run_preserver,
    "spanner": _run_spanner, "labels": _run_labels, "lb": _run_lb, "congest": _run_congest,
    "verify": _run_verify,
}


def run_experiment(cfg: ExperimentConfig) -> list:
    """Execute the pipeline named by ``cfg.command``; returns its PropertyReports."""
    cfg.validate()
    return PIPELINES[cfg.command](cfg)


# ---------------------------------------------------------------------------
# Argument parsing


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="seed for every randomized step")
    p.add_argument("--verify", action="store_true", help="attach brute-force oracle checks")
    p.add_argument("--out", help="primary output path (stdout if omitted)")
    p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--config", help="write the resolved ExperimentConfig JSON here")
    return p


def _graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", help="edge-list file")
    p.add_argument("--gen", metavar="KIND", help=f"generate instead: {', '.join(generators.KINDS)}")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="generator parameter (repeatable)")
    p.add_argument("--K", type=int, help="perturbation bound (default n^3)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="restorable", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a graph")
    p.add_argument("kind", choices=generators.KINDS)
    p.add_argument("params", nargs="*", metavar="KEY=VALUE")

    p = sub.add_parser("reweight", parents=[common], help="dump a tie-free perturbation")
    _graph_args(p)

    p = sub.add_parser("srp", parents=[common], help="subset replacement paths")
    _graph_args(p)
    p.add_argument("--sources", required=True)

    p = sub.add_parser("preserver", parents=[common], help="fault-tolerant preserver")
    _graph_args(p)
    p.add_argument("--kind", choices=("sxv", "sxs"), default="sxv")
    p.add_argument("--f", type=int, default=1)
    p.add_argument("--sources", required=True)

    p = sub.add_parser("spanner", parents=[common], help="fault-tolerant +4 spanner")
    _graph_args(p)
    p.add_argument("--f", type=int, default=1)
    p.add_argument("--sigma", default="AUTO", help="centre count or AUTO")
    p.add_argument("--sweep", help="comma-separated n values; writes a CSV on G(n, p)")
    p.add_argument("--avg-degree", type=float, default=10.0, help="sweep density: p = avg/n")
    p.add_argument("--p", type=float, help="sweep density: fixed p (overrides --avg-degree)")

    p = sub.add_parser("labels", parents=[common], help="distance labels")
    lsub = p.add_subparsers(dest="action", required=True)
    b = lsub.add_parser("build", parents=[common])
    _graph_args(b)
    b.add_argument("--f", type=int, default=1)
    q = lsub.add_parser("query", parents=[common])
    _graph_args(q)
    q.add_argument("--dir", required=True, help="directory written by labels build")
    q.add_argument("--s", type=int, required=True)
    q.add_argument("--t", type=int, required=True)
    q.add_argument("--fail", default="", help='faults as "u-v,u-v"')

    p = sub.add_parser("lb", parents=[common], help="lower-bound family")
    lbsub = p.add_subparsers(dest="action", required=True)
    g = lbsub.add_parser("gen", parents=[common])
    g.add_argument("--f", type=int, default=1)
    g.add_argument("--d", type=int, default=3)
    g.add_argument("--sigma", type=int, default=1)
    g.add_argument("--x-count", type=int)
    g.add_argument("--weights", help="weights file: lines 'u v num den'")

    p = sub.add_parser("congest", parents=[common], help="CONGEST simulation")
    p.add_argument("algorithm", choices=("spt", "sxs"))
    _graph_args(p)
    p.add_argument("--sources", default="0")
    p.add_argument("--metrics", help="metrics JSON path (defaults to --out)")

    p = sub.add_parser("verify", parents=[common], help="property checks on a scheme")
    _graph_args(p)
    p.add_argument("--f-max", type=int, default=2)
    p.add_argument("--instances", type=int, help="random G(n,p) graphs instead of one input")
    p.add_argument("--n-max", type=int, default=9)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cmd = args.command
    cfg = ExperimentConfig(command=cmd, seed=args.seed, out=args.out, verify=args.verify,
                           threads=args.threads)
    if cmd == "gen":
        cfg.generator = {"kind": args.kind, "params": _parse_params(args.params), "seed": args.seed}
        return cfg
    if getattr(args, "graph", None):
        cfg.graph = args.graph
    elif getattr(args, "gen", None):
        cfg.generator = {"kind": args.gen, "params": _parse_params(args.param), "seed": args.seed}
    cfg.K = getattr(args, "K", None)
    cfg.f = getattr(args, "f", None)
    if getattr(args, "sources", None) is not None:
        cfg.sources = _parse_sources(args.sources)
    if cmd == "preserver":
        cfg.mode = args.kind
    elif cmd == "spanner":
        cfg.sigma = None if str(args.sigma).upper() == "AUTO" else int(args.sigma)
        if args.sweep:
            cfg.params = {"sweep": [int(x) for x in args.sweep.split(",")],
                          "avg_degree": args.avg_degree, "p": args.p}
    elif cmd == "labels":
        cfg.mode = args.action
        if args.action == "query":
            cfg.params = {"dir": args.dir, "s": args.s, "t": args.t, "fail": args.fail}
    elif cmd == "lb":
        cfg.mode = args.action
        cfg.sigma = args.sigma
        cfg.params = {"d": args.d, "x_count": args.x_count}
        if args.weights:
            cfg.outputs["weights"] = args.weights
    elif cmd == "congest":
        cfg.mode = args.algorithm
        if args.metrics:
            cfg.outputs["metrics"] = args.metrics
    elif cmd == "verify":
        cfg.f = args.f_max
        if args.instances:
            cfg.params = {"instances": args.instances, "n_max": args.n_max}
    return cfg


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.config:
            _emit(cfg.to_json() + "\n", args.config)
        reports = run_experiment(cfg)
    except RestorableError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except (ValueError, KeyError, OSError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2
    failed = [r for r in reports if not r.passed]
    for r in failed:
        log.error("verification failed: %s", r.to_json())
    return VerificationFailed.exit_code if failed else 0


if __name__ == "__main__":
    sys.exit(main())
