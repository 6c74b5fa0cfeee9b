import numpy as np
import pytest

from graphdil.datasets import dataset_num_classes, load_dataset, save_dataset
from graphdil.errors import DataError
from graphdil.graphs import Graph, synth_domain_suite
from graphdil.numerics import rng


def test_round_trip_identity(tmp_path):
    gen = rng(0, "ds-roundtrip")
    g = Graph(
        num_nodes=5,
        edges=[(0, 1), (1, 4), (2, 3)],
        features=gen.standard_normal((5, 3)) * np.pi,
        labels=[0, 1, -1, 2, 1],
        split=["train", "val", "test", "train", "test"],
    )
    save_dataset(g, tmp_path / "ds")
    assert load_dataset(tmp_path / "ds") == g


def test_round_trip_bit_exact_features(tmp_path):
    feats = rng(1, "ds-bits").standard_normal((8, 4)) / 3.0
    g = Graph(8, [(0, 7)], feats)
    save_dataset(g, tmp_path / "ds")
    loaded = load_dataset(tmp_path / "ds")
    assert np.array_equal(loaded.features, g.features)


def test_round_trip_for_generated_suite(tmp_path):
    for task in synth_domain_suite(2, 2, 6, 0.4, 0.1, 5, 3.0, seed=4):
        d = tmp_path / f"dom{task.domain_id}"
        save_dataset(task.graph, d)
        assert load_dataset(d) == task.graph


def test_unlabeled_graph_round_trip(tmp_path):
    g = Graph(3, [(0, 1)], np.zeros((3, 2)))
    save_dataset(g, tmp_path / "ds")
    loaded = load_dataset(tmp_path / "ds")
    assert loaded == g
    assert loaded.labels is None


def test_fixture_counts(tiny6_dir):
    g = load_dataset(tiny6_dir)
    assert g.num_nodes == 6
    assert g.num_edges == 7
    assert dataset_num_classes(tiny6_dir) == 3
    assert int(g.labels.max()) + 1 == 3


def test_edge_referencing_missing_node(tmp_path, tiny6_dir):
    import shutil

    shutil.copytree(tiny6_dir, tmp_path / "bad")
    (tmp_path / "bad" / "edges.tsv").write_text("0\t1\n2\t999\n", encoding="utf-8")
    with pytest.raises(DataError, match=r"edges\.tsv:2"):
        load_dataset(tmp_path / "bad")


def test_malformed_node_line(tmp_path, tiny6_dir):
    import shutil

    shutil.copytree(tiny6_dir, tmp_path / "bad")
    nodes = (tmp_path / "bad" / "nodes.tsv").read_text().splitlines()
    nodes[2] = "2\t1\tval\tnot_a_number\t2.0"
    (tmp_path / "bad" / "nodes.tsv").write_text("\n".join(nodes) + "\n", encoding="utf-8")
    with pytest.raises(DataError, match=r"nodes\.tsv:3"):
        load_dataset(tmp_path / "bad")


def test_label_outside_declared_range(tmp_path, tiny6_dir):
    import shutil

    shutil.copytree(tiny6_dir, tmp_path / "bad")
    nodes = (tmp_path / "bad" / "nodes.tsv").read_text().splitlines()
    nodes[0] = nodes[0].replace("0\t0\ttrain", "0\t5\ttrain", 1)
    (tmp_path / "bad" / "nodes.tsv").write_text("\n".join(nodes) + "\n", encoding="utf-8")
    with pytest.raises(DataError, match="outside declared range"):
        load_dataset(tmp_path / "bad")


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_dataset(tmp_path / "nope")


def test_src_must_be_less_than_dst(tmp_path, tiny6_dir):
    import shutil

    shutil.copytree(tiny6_dir, tmp_path / "bad")
    (tmp_path / "bad" / "edges.tsv").write_text("1\t0\n", encoding="utf-8")
    with pytest.raises(DataError, match="src < dst"):
        load_dataset(tmp_path / "bad")
