from __future__ import annotations

import csv
import json

import pytest

from restorable.cli import ExperimentConfig, main, parse_faults, run_experiment
from restorable.generators import cycle, gnp
from restorable.graph import read_graph, write_graph


@pytest.fixture
def gfile(tmp_path):
    p = tmp_path / "g.txt"
    write_graph(gnp(10, 0.4, 3), p)
    return p


def test_gen(tmp_path):
    out = tmp_path / "c4.txt"
    assert main(["gen", "cycle", "n=4", "--out", str(out)]) == 0
    assert read_graph(out) == cycle(4)


def test_srp_c4_json(tmp_path):
    c4 = tmp_path / "c4.txt"
    write_graph(cycle(4), c4)
    out = tmp_path / "srp.json"
    assert main(["srp", "--graph", str(c4), "--sources", "0,2", "--out", str(out), "--verify"]) == 0
    doc = json.loads(out.read_text())
    pair = doc["pairs"][0]
    assert (pair["s"], pair["t"], pair["base"]) == (0, 2, 2)
    assert [f["dist"] for f in pair["failures"]] == [2, 2]


def test_reports_byte_identical(tmp_path, gfile):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["srp", "--graph", str(gfile), "--sources", "0,3,7", "--seed", "5", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_preserver_sidecar(tmp_path, gfile):
    out = tmp_path / "pres.txt"
    rc = main(["preserver", "--graph", str(gfile), "--kind", "sxs", "--f", "2", "--sources", "0,4",
               "--out", str(out), "--verify"])
    assert rc == 0
    stats = json.loads((tmp_path / "pres.json").read_text())
    assert {"edges", "bound_value", "enumerated_fault_sets"} <= set(stats)
    assert read_graph(out).m == stats["edges"]


def test_spanner_and_sweep(tmp_path, gfile):
    assert main(["spanner", "--graph", str(gfile), "--f", "1", "--sigma", "3", "--verify",
                 "--out", str(tmp_path / "sp.txt")]) == 0
    assert json.loads((tmp_path / "sp.json").read_text())["sigma"] == 3
    csv_out = tmp_path / "sweep.csv"
    assert main(["spanner", "--sweep", "20,30", "--out", str(csv_out)]) == 0
    rows = list(csv.DictReader(csv_out.open()))
    assert [int(r["n"]) for r in rows] == [20, 30] and all("edges" in r for r in rows)


def test_labels_build_and_query(tmp_path, gfile):
    d = tmp_path / "labs"
    assert main(["labels", "build", "--graph", str(gfile), "--f", "1", "--out", str(d), "--verify"]) == 0
    assert len(list(d.glob("*.label"))) == 10
    out = tmp_path / "q.json"
    assert main(["labels", "query", "--dir", str(d), "--s", "0", "--t", "5", "--fail", "0-1",
                 "--graph", str(gfile), "--verify", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["s"] == 0
    assert main(["labels", "query", "--dir", str(d), "--s", "0", "--t", "5",
                 "--fail", "0-1,1-2,2-3"]) == 5


def test_lb_gen(tmp_path):
    out, w = tmp_path / "lb.txt", tmp_path / "w.txt"
    assert main(["lb", "gen", "--f", "1", "--d", "4", "--x-count", "6", "--out", str(out),
                 "--weights", str(w), "--verify"]) == 0
    stats = json.loads((tmp_path / "lb.json").read_text())
    assert stats["B"] == 24 and stats["nLeaf"] == 4
    assert len(w.read_text().splitlines()) == read_graph(out).m
    assert main(["lb", "gen", "--f", "2", "--d", "5"]) == 6


def test_congest(tmp_path, gfile):
    m = tmp_path / "m.json"
    assert main(["congest", "spt", "--graph", str(gfile), "--sources", "0", "--verify", "--metrics", str(m)]) == 0
    assert {"rounds", "max_edge_msgs_per_round", "total_msgs", "D"} <= set(json.loads(m.read_text()))
    assert main(["congest", "sxs", "--graph", str(gfile), "--sources", "0,3", "--verify",
                 "--metrics", str(m)]) == 0


def test_verify_all(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--instances", "4", "--n-max", "7", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["graphs"] == 4 and all(r["pass"] for r in doc["reports"])


def test_reweight(tmp_path, gfile):
    out = tmp_path / "r.txt"
    assert main(["reweight", "--graph", str(gfile), "--verify", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == read_graph(gfile).m


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 1\n0 0\n")
    assert main(["srp", "--graph", str(bad), "--sources", "0"]) == 2
    assert main(["srp", "--graph", str(tmp_path / "missing.txt"), "--sources", "0"]) == 2
    assert main(["reweight", "--gen", "grid", "--param", "rows=5", "--param", "cols=5", "--K", "1"]) == 3


def test_config_roundtrip(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    out = tmp_path / "srp.json"
    assert main(["srp", "--gen", "gnp", "--param", "n=12", "--param", "p=0.3", "--sources", "1,2",
                 "--seed", "4", "--out", str(out), "--config", str(cfg_path)]) == 0
    cfg = ExperimentConfig.from_json(cfg_path.read_text())
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
    first = out.read_bytes()
    run_experiment(cfg)
    assert out.read_bytes() == first


def test_config_requires_seed():
    with pytest.raises(ValueError):
        ExperimentConfig(command="srp", seed=None).validate()
    with pytest.raises(ValueError):
        ExperimentConfig(command="bogus").validate()


def test_parse_faults():
    assert parse_faults("1-0, 2-3") == frozenset({(0, 1), (2, 3)})
    assert parse_faults("") == frozenset()
    with pytest.raises(ValueError):
        parse_faults("1_2")
