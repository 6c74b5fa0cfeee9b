"""Domain discrimination through a frozen random graph projection.

Aligned node features are pushed through a randomly initialized,
never-trained two-layer graph convolution into a high-dimensional space,
where mean-pooled per-domain prototypes become far apart even when the
raw feature distributions overlap.  A test graph is assigned to the
domain whose prototype is Euclidean-nearest to its own pooled
projection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph, normalized_adjacency
from .numerics import gaussian, rng

__all__ = [
    "DomainPrototype",
    "ProjectionParams",
    "discriminate",
    "domain_prototype",
    "init_projection",
    "random_projection",
]


@dataclass(frozen=True)
class ProjectionParams:
    """Frozen random projection weights, identical across all domains."""

    r1: np.ndarray  # in_dim x out_dim
    r2: np.ndarray  # out_dim x out_dim
    seed: int

    @property
    def in_dim(self) -> int:
        return self.r1.shape[0]

    @property
    def out_dim(self) -> int:
        return self.r1.shape[1]


def init_projection(in_dim: int, out_dim: int, seed: int) -> ProjectionParams:
    """Create projection weights from the seed (Gaussian, var 2/fan-in).

    The same ``(in_dim, out_dim, seed)`` always regenerates byte-identical
    weights, so persistence only needs to record the seed.
    """
    if in_dim < 1 or out_dim < 1:
        raise ValueError(f"projection dims must be >= 1, got ({in_dim}, {out_dim})")
    gen = rng(seed, "projection")
    r1 = gaussian(gen, in_dim, out_dim, std=np.sqrt(2.0 / in_dim))
    r2 = gaussian(gen, out_dim, out_dim, std=np.sqrt(2.0 / out_dim))
    r1.flags.writeable = False
    r2.flags.writeable = False
    return ProjectionParams(r1=r1, r2=r2, seed=int(seed))


def random_projection(g: Graph, params: ProjectionParams) -> np.ndarray:
    """Project aligned node features: ``Ahat @ relu(Ahat @ F @ R1) @ R2``."""
    if g.feature_dim != params.in_dim:
        raise ValueError(
            f"graph features have width {g.feature_dim}, projection expects {params.in_dim}"
        )
    ahat = normalized_adjacency(g)
    h = np.maximum(ahat @ g.features @ params.r1, 0.0)
    return (ahat @ h) @ params.r2


def domain_prototype(fhat) -> np.ndarray:
    """Average-pool projected features over all nodes of one graph."""
    fhat = np.asarray(fhat, dtype=np.float64)
    if fhat.ndim != 2 or fhat.shape[0] < 1:
        raise ValueError(f"need at least one projected row, got shape {fhat.shape}")
    return fhat.mean(axis=0)


@dataclass(frozen=True)
class DomainPrototype:
    """Mean projected-feature vector of one registered domain."""

    domain_id: int
    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("domain prototype must be a finite 1-d vector")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "vector", v)


def discriminate(test_proto, prototypes) -> int:
    """Pick the domain maximizing ``exp(-||D_test - D_k||^2)``.

    Equivalently the Euclidean-nearest prototype; exact ties resolve to
    the lowest domain id.
    """
    test_proto = np.asarray(test_proto, dtype=np.float64)
    candidates = sorted(prototypes, key=lambda p: p.domain_id)
    if not candidates:
        raise ValueError("prototype list must be nonempty")
    best_id = None
    best_d2 = np.inf
    for proto in candidates:
        if proto.vector.shape != test_proto.shape:
            raise ValueError(
                f"prototype width {proto.vector.shape} != test width {test_proto.shape}"
            )
        d2 = float(np.sum((test_proto - proto.vector) ** 2))
        if d2 < best_d2:
            best_d2 = d2
            best_id = proto.domain_id
    return int(best_id)
