import numpy as np
import pytest
from scipy.stats import binom

from graphdil.graphs import (
    DomainTask,
    Graph,
    align_features,
    augment,
    fit_aligner,
    induced_subgraph,
    normalized_adjacency,
    synth_domain_suite,
)
from graphdil.numerics import rng, truncated_svd


def simple_graph():
    return Graph(
        num_nodes=4,
        edges=[(0, 1), (1, 2)],
        features=np.arange(8.0).reshape(4, 2),
        labels=[0, 0, 1, -1],
        split=["train", "train", "test", "val"],
    )


class TestGraph:
    def test_edges_canonicalized(self):
        g = Graph(3, [(2, 0), (0, 2), (1, 0)], np.zeros((3, 1)))
        assert np.array_equal(g.edges, [[0, 1], [0, 2]])

    def test_rejects_out_of_range_edge(self):
        with pytest.raises(ValueError):
            Graph(3, [(0, 3)], np.zeros((3, 1)))

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph(3, [(1, 1)], np.zeros((3, 1)))

    def test_rejects_bad_split(self):
        with pytest.raises(ValueError):
            Graph(2, [], np.zeros((2, 1)), split=["train", "dev"])

    def test_arrays_read_only(self):
        g = simple_graph()
        with pytest.raises(ValueError):
            g.features[0, 0] = 9.0
        with pytest.raises(ValueError):
            g.edges[0, 0] = 2

    def test_masks(self):
        g = simple_graph()
        assert np.array_equal(g.mask("train"), [True, True, False, False])
        assert np.array_equal(g.mask("test"), [False, False, True, False])


class TestDomainTask:
    def test_labels_must_fit_block(self):
        g = simple_graph()
        DomainTask(0, g, (0, 2))
        with pytest.raises(ValueError):
            DomainTask(0, g, (1, 2))

    def test_empty_block_rejected(self):
        with pytest.raises(ValueError):
            DomainTask(0, simple_graph(), (2, 2))


class TestNormalizedAdjacency:
    def test_single_node(self):
        a = normalized_adjacency(Graph(1, [], np.zeros((1, 1))))
        assert np.array_equal(a, [[1.0]])

    def test_two_nodes_one_edge(self):
        a = normalized_adjacency(Graph(2, [(0, 1)], np.zeros((2, 1))))
        assert np.max(np.abs(a - 0.5)) <= 1e-12

    def test_triangle(self):
        a = normalized_adjacency(Graph(3, [(0, 1), (0, 2), (1, 2)], np.zeros((3, 1))))
        assert np.max(np.abs(a - 1.0 / 3.0)) <= 1e-12

    def test_symmetric_and_isolated_rows(self):
        gen = rng(0, "adj-random")
        n = 12
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if gen.random() < 0.2]
        g = Graph(n + 1, pairs, np.zeros((n + 1, 1)))  # node n stays isolated
        a = normalized_adjacency(g)
        assert np.max(np.abs(a - a.T)) <= 1e-12
        assert np.array_equal(a[n], np.eye(n + 1)[n])


class TestAlignFeatures:
    def test_projection_example(self):
        out = align_features(np.array([[2.0, 0.0], [0.0, 1.0]]), 1)
        assert np.max(np.abs(out - [[2.0], [0.0]])) <= 1e-12

    def test_norm_preserved_at_full_width(self):
        f = rng(1, "align-full").standard_normal((10, 6))
        out = align_features(f, 6)
        assert abs(np.linalg.norm(out) - np.linalg.norm(f)) <= 1e-8

    def test_padding_when_narrow(self):
        f = rng(2, "align-pad").standard_normal((5, 2))
        out = align_features(f, 4)
        assert out.shape == (5, 4)
        assert np.array_equal(out[:, :2], f)
        assert np.all(out[:, 2:] == 0.0)

    def test_energy_matches_top_singular_values(self):
        gen = rng(3, "align-energy")
        for n, d0, dbar in ((30, 12, 5), (20, 20, 8), (40, 9, 9)):
            f = gen.standard_normal((n, d0))
            out = align_features(f, dbar)
            s = truncated_svd(f, dbar).s
            assert abs(np.sum(out * out) - np.sum(s * s)) <= 1e-8

    def test_aligner_reuse_is_bit_stable(self):
        f = rng(4, "align-reuse").standard_normal((15, 8))
        aligner = fit_aligner(f, 3)
        assert np.array_equal(aligner.apply(f), aligner.apply(f))
        sub = aligner.apply(f[:4])
        assert np.array_equal(sub, aligner.apply(f)[:4])


class TestAugment:
    def test_zero_rates_identity(self):
        g = simple_graph()
        out = augment(g, 0.0, 0.0, seed=5)
        assert out == g

    def test_drop_all_edges(self):
        g = simple_graph()
        assert augment(g, 0.0, 1.0, seed=5).num_edges == 0

    def test_deterministic_per_seed(self):
        g = Graph(20, [(i, i + 1) for i in range(19)], rng(5, "aug-g").standard_normal((20, 6)))
        a = augment(g, 0.3, 0.4, seed=11)
        b = augment(g, 0.3, 0.4, seed=11)
        assert a == b
        assert a != augment(g, 0.3, 0.4, seed=12)

    def test_mask_count_within_three_sigma(self):
        feats = np.ones((100, 10))
        g = Graph(100, [], feats)
        out = augment(g, 0.5, 0.0, seed=7)
        zeroed = int(np.sum(out.features == 0.0))
        n, p = 1000, 0.5
        sigma = np.sqrt(n * p * (1 - p))
        assert abs(zeroed - n * p) <= 3 * sigma

    def test_labels_and_split_unchanged(self):
        g = simple_graph()
        out = augment(g, 0.5, 0.5, seed=3)
        assert out.num_nodes == g.num_nodes
        assert np.array_equal(out.labels, g.labels)
        assert np.array_equal(out.split, g.split)

    def test_invalid_rate_rejected(self):
        with pytest.raises(ValueError):
            augment(simple_graph(), 1.5, 0.0, seed=0)


class TestInducedSubgraph:
    def test_relabels_and_keeps_inner_edges(self):
        g = simple_graph()
        sub = induced_subgraph(g, [1, 2])
        assert sub.num_nodes == 2
        assert np.array_equal(sub.edges, [[0, 1]])
        assert np.array_equal(sub.features, g.features[[1, 2]])
        assert np.array_equal(sub.labels, [0, 1])

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            induced_subgraph(simple_graph(), [0, 0])


class TestSynthDomainSuite:
    def test_disjoint_blocks_in_domain_order(self):
        tasks = synth_domain_suite(4, 3, 5, 0.3, 0.05, 8, 4.0, seed=0)
        assert [t.class_block for t in tasks] == [(0, 3), (3, 6), (6, 9), (9, 12)]
        covered = sorted(c for t in tasks for c in range(*t.class_block))
        assert covered == list(range(12))

    def test_deterministic(self):
        a = synth_domain_suite(2, 2, 10, 0.3, 0.05, 6, 4.0, seed=9)
        b = synth_domain_suite(2, 2, 10, 0.3, 0.05, 6, 4.0, seed=9)
        for ta, tb in zip(a, b):
            assert ta.graph == tb.graph

    def test_intra_edges_dominate(self):
        tasks = synth_domain_suite(1, 3, 40, 0.2, 0.02, 8, 4.0, seed=1)
        g = tasks[0].graph
        same = g.labels[g.edges[:, 0]] == g.labels[g.edges[:, 1]]
        n_per = 40
        intra_pairs = 3 * n_per * (n_per - 1) / 2
        inter_pairs = (120 * 119 / 2) - intra_pairs
        intra_frac = np.sum(same) / intra_pairs
        inter_frac = np.sum(~same) / inter_pairs
        assert intra_frac > inter_frac

    def test_labels_global_and_splits_populated(self):
        tasks = synth_domain_suite(3, 2, 10, 0.4, 0.1, 4, 3.0, seed=2)
        for t in tasks:
            g = t.graph
            assert g.labels.min() >= t.class_block[0]
            assert g.labels.max() < t.class_block[1]
            for tag in ("train", "val", "test"):
                assert np.any(g.mask(tag))

    def test_mask_count_statistics(self):
        # binomial sanity on the documented edge probabilities
        tasks = synth_domain_suite(1, 2, 50, 0.2, 0.02, 4, 3.0, seed=3)
        g = tasks[0].graph
        same = g.labels[g.edges[:, 0]] == g.labels[g.edges[:, 1]]
        intra_pairs = 2 * 50 * 49 // 2
        lo, hi = binom.ppf([0.001, 0.999], intra_pairs, 0.2)
        assert lo <= int(np.sum(same)) <= hi

    def test_domain_data_independent_of_suite_length(self):
        short = synth_domain_suite(2, 2, 8, 0.3, 0.05, 6, 4.0, seed=6)
        long = synth_domain_suite(5, 2, 8, 0.3, 0.05, 6, 4.0, seed=6)
        for a, b in zip(short, long):
            assert a.graph == b.graph
