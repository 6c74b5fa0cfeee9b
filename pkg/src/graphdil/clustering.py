"""Density clustering and the append-only embedding-prototype store.

After a domain's adapter is frozen, its training embeddings are
clustered and each cluster centroid is kept as a prototype.  Later
domains are pushed away from these prototypes by the inter-domain
objective, so the store only ever grows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Prototype",
    "PrototypeSet",
    "auto_eps",
    "dbscan",
    "extract_prototypes",
]

NOISE = -1
_UNSEEN = -2


def dbscan(points, eps: float, min_pts: int) -> np.ndarray:
    """Classic density clustering under Euclidean distance.

    Deterministic for a fixed point order: clusters are seeded from core
    points in index order and expanded breadth-first, also in index
    order.  A point's neighborhood includes itself.  Returns one label
    per point, ``-1`` for noise.
    """
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be >= 1, got {min_pts}")
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise ValueError(f"points must be 2-dimensional, got shape {pts.shape}")
    m = pts.shape[0]
    if m == 0:
        return np.zeros(0, dtype=np.int64)

    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    within = d2 <= eps * eps
    neighbor_count = within.sum(axis=1)
    core = neighbor_count >= min_pts

    labels = np.full(m, _UNSEEN, dtype=np.int64)
    cluster = 0
    for i in range(m):
        if labels[i] != _UNSEEN:
            continue
        if not core[i]:
            labels[i] = NOISE  # may be upgraded to a border point later
            continue
        labels[i] = cluster
        queue = [i]
        while queue:
            p = queue.pop(0)
            for q in np.flatnonzero(within[p]):
                if labels[q] == _UNSEEN:
                    labels[q] = cluster
                    if core[q]:
                        queue.append(int(q))
                elif labels[q] == NOISE:
                    labels[q] = cluster
        cluster += 1
    return labels


def auto_eps(points, k: int = 4) -> float:
    """Median distance to the k-th nearest neighbor (self excluded).

    The default radius for prototype extraction when none is configured.
    Degenerate all-identical inputs yield a tiny positive radius.
    """
    pts = np.asarray(points, dtype=np.float64)
    m = pts.shape[0]
    if m < 2:
        return 1e-12
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    d = np.sqrt(np.maximum(d2, 0.0))
    d[np.arange(m), np.arange(m)] = np.inf
    kth = min(k, m - 1)
    knn = np.sort(d, axis=1)[:, kth - 1]
    eps = float(np.median(knn))
    return eps if eps > 0 else 1e-12


@dataclass(frozen=True)
class Prototype:
    """Centroid of one density cluster, tagged with its origin."""

    domain_id: int
    cluster_id: int
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("prototype vector must be a finite 1-d array")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vector", v)


class PrototypeSet:
    """Append-only collection of prototypes across the domain sequence."""

    def __init__(self, items=()):
        self._items: list[Prototype] = []
        self.extend(items)

    def extend(self, items) -> None:
        for item in items:
            if not isinstance(item, Prototype):
                raise TypeError(f"expected Prototype, got {type(item).__name__}")
            self._items.append(item)

    def vectors(self) -> np.ndarray:
        if not self._items:
            return np.zeros((0, 0), dtype=np.float64)
        return np.stack([p.vector for p in self._items])

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def __getitem__(self, idx) -> Prototype:
        return self._items[idx]


def extract_prototypes(x, labels, eps, min_pts: int, domain_id: int) -> list[Prototype]:
    """Cluster a frozen domain's embeddings and return cluster centroids.

    ``eps=None`` selects :func:`auto_eps`.  If clustering yields no
    clusters at all, falls back to one centroid per class present in
    ``labels`` (tagged with the class index) so the domain never loses
    its repulsion targets.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if x.shape[0] != labels.shape[0]:
        raise ValueError(f"{x.shape[0]} embeddings but {labels.shape[0]} labels")
    radius = auto_eps(x) if eps is None else float(eps)
    assignments = dbscan(x, radius, min_pts)

    protos = []
    for cid in np.unique(assignments):
        if cid == NOISE:
            continue
        centroid = x[assignments == cid].mean(axis=0)
        protos.append(Prototype(domain_id=domain_id, cluster_id=int(cid), vector=centroid))
    if protos:
        return protos
    return [
        Prototype(domain_id=domain_id, cluster_id=int(c), vector=x[labels == c].mean(axis=0))
        for c in np.unique(labels[labels >= 0])
    ]
