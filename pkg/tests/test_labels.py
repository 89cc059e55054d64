from __future__ import annotations

import pytest

from restorable.cli import check_labels
from restorable.errors import BudgetViolation
from restorable.generators import cycle, gnp
from restorable.graph import bfs_distances
from restorable.labels import DistanceLabel, build_label, build_labels, query, read_label, write_labels
from restorable.tiebreak import Rpts, perturb, with_resampling


def test_f0_label_is_spt():
    g = gnp(12, 0.4, 0)
    rp = Rpts(perturb(g, 0))
    lab = build_label(rp, 3, 0)
    assert set(lab.edges) == rp.spt(3).tree_edges()
    assert len(lab.edges) == g.n - 1


def test_c4_f1_label(c4_example_scheme):
    assert len(build_label(c4_example_scheme, 0, 1).edges) == 4


def test_c4_f0_query(c4_example_scheme):
    labs = build_labels(c4_example_scheme, 0)
    assert query(labs[0], labs[2], [(0, 1)]) == 2


def test_fault_free_equals_distance():
    g = gnp(11, 0.3, 3)
    labs = build_labels(Rpts(perturb(g, 3)), 0)
    for s in range(g.n):
        d = bfs_distances(g, s)
        for t in range(g.n):
            assert query(labs[s], labs[t]) == d[t]


def test_f1_labels_exhaustive():
    g = gnp(10, 0.3, 5)
    labs, _ = with_resampling(g, 5, lambda rp: build_labels(rp, 1))
    assert check_labels(g, labs, 2).passed


def test_budget_violation(c4_example_scheme):
    labs = build_labels(c4_example_scheme, 0)
    with pytest.raises(BudgetViolation):
        query(labs[0], labs[2], [(0, 1), (2, 3)])


def test_encoding_roundtrip(tmp_path):
    g = gnp(40, 0.2, 1)
    labs, _ = with_resampling(g, 1, lambda rp: build_labels(rp, 1))
    write_labels(labs, tmp_path)
    for s in (0, 17, 39):
        back = read_label(tmp_path, s)
        assert back == labs[s]
        assert back.encoded_bits == 8 * len(labs[s].to_bytes())


def test_trailing_bytes_rejected():
    lab = DistanceLabel(0, 5, 1, ((0, 1), (1, 4)))
    with pytest.raises(ValueError):
        DistanceLabel.from_bytes(lab.to_bytes() + b"\x00")


def test_mismatched_graphs(c4_example_scheme):
    a = DistanceLabel(0, 4, 1, ((0, 1),))
    b = DistanceLabel(1, 5, 1, ((0, 1),))
    with pytest.raises(ValueError):
        query(a, b)


def test_nominal_bits():
    lab = DistanceLabel(0, 16, 1, ((0, 1), (2, 3), (4, 5)))
    assert lab.nominal_bits == 3 * 2 * 4
