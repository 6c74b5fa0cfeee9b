"""Graph data model, adjacency normalization, feature alignment, augmentation.

Graphs are immutable after construction: the underlying numpy arrays are
marked read-only, and every operation returns a new object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import rng, truncated_svd

SPLITS = ("train", "val", "test")

__all__ = [
    "SPLITS",
    "DomainTask",
    "FeatureAligner",
    "Graph",
    "align_features",
    "augment",
    "fit_aligner",
    "induced_subgraph",
    "normalized_adjacency",
    "synth_domain_suite",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class Graph:
    """Undirected graph with node features, optional labels, and split tags.

    Edges are stored canonically: ``(src, dst)`` with ``src < dst``,
    deduplicated and row-sorted.  Self-loops are rejected here; they are
    added on the fly by :func:`normalized_adjacency`.  Labels use ``-1``
    for unlabeled nodes.
    """

    def __init__(self, num_nodes, edges, features, labels=None, split=None):
        num_nodes = int(num_nodes)
        if num_nodes < 0:
            raise ValueError(f"num_nodes must be nonnegative, got {num_nodes}")

        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if e.min() < 0 or e.max() >= num_nodes:
                bad = e[(e.min(axis=1) < 0) | (e.max(axis=1) >= num_nodes)][0]
                raise ValueError(
                    f"edge ({bad[0]}, {bad[1]}) endpoint out of range [0, {num_nodes})"
                )
            if np.any(e[:, 0] == e[:, 1]):
                bad = e[e[:, 0] == e[:, 1]][0]
                raise ValueError(f"self-loop ({bad[0]}, {bad[1]}) is not allowed")
            e = np.stack([e.min(axis=1), e.max(axis=1)], axis=1)
            e = np.unique(e, axis=0)

        f = np.asarray(features, dtype=np.float64)
        if f.ndim != 2 or f.shape[0] != num_nodes:
            raise ValueError(f"features must be ({num_nodes}, d), got shape {f.shape}")
        if not np.all(np.isfinite(f)):
            raise ValueError("features contain non-finite entries")

        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (num_nodes,):
                raise ValueError(f"labels must have shape ({num_nodes},), got {labels.shape}")
            if labels.size and labels.min() < -1:
                raise ValueError("labels must be >= 0, or -1 for unlabeled")
            if not np.any(labels >= 0):
                labels = None  # fully unlabeled is canonically label-free
            else:
                labels = _freeze(labels.copy())

        if split is None:
            split = np.full(num_nodes, "train", dtype="<U5")
        else:
            split = np.asarray(split, dtype="<U5")
            if split.shape != (num_nodes,):
                raise ValueError(f"split must have shape ({num_nodes},), got {split.shape}")
            bad = set(split.tolist()) - set(SPLITS)
            if bad:
                raise ValueError(f"unknown split tags: {sorted(bad)}")

        self.num_nodes = num_nodes
        self.edges = _freeze(e)
        self.features = _freeze(f.copy())
        self.labels = labels
        self.split = _freeze(split.copy())

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def mask(self, tag: str) -> np.ndarray:
        if tag not in SPLITS:
            raise ValueError(f"unknown split tag {tag!r}")
        return self.split == tag

    def with_features(self, features) -> "Graph":
        return Graph(self.num_nodes, self.edges, features, self.labels, self.split)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        if self.num_nodes != other.num_nodes:
            return False
        if not np.array_equal(self.edges, other.edges):
            return False
        if not np.array_equal(self.features, other.features):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is not None and not np.array_equal(self.labels, other.labels):
            return False
        return bool(np.array_equal(self.split, other.split))

    def __repr__(self) -> str:
        return (
            f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges}, "
            f"feature_dim={self.feature_dim}, labeled={self.labels is not None})"
        )


@dataclass(frozen=True)
class DomainTask:
    """One incremental domain: a graph plus its disjoint global class block.

    ``class_block`` is a half-open ``(start, stop)`` range of global class
    indices; every label present in the graph must fall inside it.
    """

    domain_id: int
    graph: Graph
    class_block: tuple[int, int]

    def __post_init__(self):
        start, stop = self.class_block
        if not 0 <= start < stop:
            raise ValueError(f"class_block must be a nonempty range, got {self.class_block}")
        if self.graph.labels is not None:
            present = self.graph.labels[self.graph.labels >= 0]
            if present.size and (present.min() < start or present.max() >= stop):
                raise ValueError(
                    f"labels [{present.min()}, {present.max()}] fall outside class block "
                    f"[{start}, {stop})"
                )

    @property
    def num_classes(self) -> int:
        return self.class_block[1] - self.class_block[0]


def normalized_adjacency(g: Graph) -> np.ndarray:
    """Dense symmetric normalization ``D^{-1/2} (A + I) D^{-1/2}``.

    ``D`` is the degree matrix of ``A + I``.  The row of a node with no
    neighbors is the corresponding standard basis vector.
    """
    n = g.num_nodes
    a = np.zeros((n, n), dtype=np.float64)
    if g.num_edges:
        a[g.edges[:, 0], g.edges[:, 1]] = 1.0
        a[g.edges[:, 1], g.edges[:, 0]] = 1.0
    a[np.arange(n), np.arange(n)] += 1.0
    dinv = 1.0 / np.sqrt(a.sum(axis=1))
    return a * np.multiply.outer(dinv, dinv)


@dataclass(frozen=True)
class FeatureAligner:
    """Reusable per-domain map from raw feature width to the unified width.

    For wide inputs (``in_dim >= out_dim``) this is projection onto the
    top right-singular directions of the fitting matrix (``F @ basis``);
    for narrow inputs it is zero-padding on the right.  The same aligner
    is applied at training and at inference so both share one feature
    space.
    """

    in_dim: int
    out_dim: int
    basis: np.ndarray | None  # (in_dim, out_dim); None means zero-pad

    def apply(self, features) -> np.ndarray:
        f = np.asarray(features, dtype=np.float64)
        if f.ndim != 2 or f.shape[1] != self.in_dim:
            raise ValueError(f"expected (n, {self.in_dim}) features, got shape {f.shape}")
        if self.basis is not None:
            return f @ self.basis
        out = np.zeros((f.shape[0], self.out_dim), dtype=np.float64)
        out[:, : self.in_dim] = f
        return out


def fit_aligner(features, out_dim: int) -> FeatureAligner:
    """Fit the width-``out_dim`` aligner on a domain's full feature matrix."""
    f = np.asarray(features, dtype=np.float64)
    if f.ndim != 2 or f.shape[0] < 1:
        raise ValueError(f"features must be a nonempty 2-d matrix, got shape {f.shape}")
    if out_dim < 1:
        raise ValueError(f"out_dim must be >= 1, got {out_dim}")
    d0 = f.shape[1]
    if d0 < out_dim:
        return FeatureAligner(in_dim=d0, out_dim=out_dim, basis=None)
    svd = truncated_svd(f, out_dim)
    return FeatureAligner(in_dim=d0, out_dim=out_dim, basis=_freeze(svd.v))


def align_features(features, out_dim: int) -> np.ndarray:
    """One-shot alignment: fit on ``features`` and apply to it."""
    return fit_aligner(features, out_dim).apply(features)


def augment(g: Graph, mask_rate: float, drop_rate: float, seed: int) -> Graph:
    """Random feature masking and edge dropping, deterministic per seed.

    Each feature entry is zeroed independently with probability
    ``mask_rate``; each edge is removed independently with probability
    ``drop_rate``.  Node count, labels, and split tags are unchanged.
    """
    for name, rate in (("mask_rate", mask_rate), ("drop_rate", drop_rate)):
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {rate}")
    gen = rng(seed, "augment")
    mask = gen.random(g.features.shape) < mask_rate
    feats = np.where(mask, 0.0, g.features)
    keep = gen.random(g.num_edges) >= drop_rate
    return Graph(g.num_nodes, g.edges[keep], feats, g.labels, g.split)


def induced_subgraph(g: Graph, nodes) -> Graph:
    """Subgraph on the given node indices, relabeled to 0..len(nodes)-1."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.ndim != 1 or np.unique(nodes).size != nodes.size:
        raise ValueError("nodes must be a 1-d array of distinct indices")
    if nodes.size and (nodes.min() < 0 or nodes.max() >= g.num_nodes):
        raise ValueError("node index out of range")
    remap = -np.ones(g.num_nodes, dtype=np.int64)
    remap[nodes] = np.arange(nodes.size)
    inside = np.zeros(g.num_nodes, dtype=bool)
    inside[nodes] = True
    keep = inside[g.edges[:, 0]] & inside[g.edges[:, 1]] if g.num_edges else np.zeros(0, bool)
    edges = remap[g.edges[keep]]
    labels = None if g.labels is None else g.labels[nodes]
    return Graph(nodes.size, edges, g.features[nodes], labels, g.split[nodes])


def _split_tags(gen: np.random.Generator, count: int) -> np.ndarray:
    """60/20/20 train/val/test assignment within one class."""
    n_train = int(round(count * 0.6))
    n_val = int(round(count * 0.2))
    tags = np.array(
        ["train"] * n_train + ["val"] * n_val + ["test"] * (count - n_train - n_val),
        dtype="<U5",
    )
    gen.shuffle(tags)
    return tags


def synth_domain_suite(
    num_domains: int,
    classes_per_domain: int,
    nodes_per_class: int,
    p_in: float,
    p_out: float,
    feature_dim: int,
    mean_separation: float,
    seed: int,
) -> list[DomainTask]:
    """Seeded multi-domain benchmark: one stochastic block model per domain.

    Every (domain, class) pair gets a Gaussian feature mean drawn so that
    two means are ``mean_separation`` apart in expectation; node features
    add unit isotropic noise.  Edges connect same-class nodes with
    probability ``p_in`` and cross-class nodes with ``p_out``.  Global
    class blocks are assigned disjointly in domain order, and graph
    labels are global indices.
    """
    for name, v in (
        ("num_domains", num_domains),
        ("classes_per_domain", classes_per_domain),
        ("nodes_per_class", nodes_per_class),
        ("feature_dim", feature_dim),
    ):
        if v < 1:
            raise ValueError(f"{name} must be >= 1, got {v}")
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {p}")

    mean_std = mean_separation / np.sqrt(2.0 * feature_dim)

    tasks = []
    for k in range(num_domains):
        # independent streams per domain: domain k's data does not depend on
        # how many domains the suite has
        means = mean_std * rng(seed, f"suite-means-{k}").standard_normal(
            (classes_per_domain, feature_dim)
        )
        gen = rng(seed, f"suite-domain-{k}")
        start = k * classes_per_domain
        n = classes_per_domain * nodes_per_class
        labels = start + np.repeat(np.arange(classes_per_domain), nodes_per_class)

        same = labels[:, None] == labels[None, :]
        prob = np.where(same, p_in, p_out)
        draw = gen.random((n, n))
        iu = np.triu_indices(n, k=1)
        hit = draw[iu] < prob[iu]
        edges = np.stack([iu[0][hit], iu[1][hit]], axis=1)

        feats = means[labels - start] + gen.standard_normal((n, feature_dim))
        split = np.concatenate(
            [_split_tags(gen, nodes_per_class) for _ in range(classes_per_domain)]
        )
        graph = Graph(n, edges, feats, labels, split)
        tasks.append(
            DomainTask(domain_id=k, graph=graph, class_block=(start, start + classes_per_domain))
        )
    return tasks
