"""Recursively updated ridge-regression classifier.

The classifier weight ``W`` (embedding width x total classes) and the
inverse regularized Gram matrix ``M`` are carried across domains.  A new
domain contributes only its own embeddings and one-hot targets: ``M`` is
refreshed through the Woodbury identity and ``W`` gains the new class
columns while its old columns receive a closed-form correction.  The
result is exactly the batch ridge solution over all domains seen so far,
without storing any historical data.

Updates are strictly sequential; states are immutable snapshots, so
prediction on a snapshot is pure and safe to run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import ridge_solve_batch, softmax_rows, spd_solve

__all__ = [
    "ClassBlock",
    "RidgeState",
    "batch_oracle",
    "init_state",
    "one_hot",
    "predict",
    "update_state",
]


@dataclass(frozen=True)
class ClassBlock:
    """Half-open global class range owned by one domain."""

    domain_id: int
    start: int
    stop: int

    @property
    def width(self) -> int:
        return self.stop - self.start

    def overlaps(self, other: "ClassBlock") -> bool:
        return self.start < other.stop and other.start < self.stop


@dataclass(frozen=True)
class RidgeState:
    """Classifier weights, inverse-Gram matrix, and the class-block registry.

    ``w`` columns are ordered by block arrival; ``blocks`` maps each
    column span back to its domain and global class indices.
    """

    w: np.ndarray  # h x C
    m: np.ndarray  # h x h, symmetric positive definite
    lam: float
    blocks: tuple[ClassBlock, ...]

    @property
    def num_classes(self) -> int:
        return self.w.shape[1]

    @property
    def embedding_dim(self) -> int:
        return self.w.shape[0]

    def column_classes(self) -> np.ndarray:
        """Global class index of each column of ``w``."""
        return np.concatenate([np.arange(b.start, b.stop) for b in self.blocks])


def one_hot(labels, width: int) -> np.ndarray:
    """Encode block-local labels in ``[0, width)`` as one-hot rows."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= width):
        raise ValueError(f"labels must lie in [0, {width})")
    y = np.zeros((labels.shape[0], width), dtype=np.float64)
    y[np.arange(labels.shape[0]), labels] = 1.0
    return y


def _check_one_hot(y: np.ndarray) -> None:
    if y.ndim != 2 or y.shape[1] < 1:
        raise ValueError(f"targets must be a 2-d one-hot matrix, got shape {y.shape}")
    ok = np.all((y == 0.0) | (y == 1.0)) and np.all(y.sum(axis=1) == 1.0)
    if not ok:
        raise ValueError("targets must be one-hot rows (exactly one 1 per row)")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def init_state(x, y, lam: float, domain_id: int = 0, class_start: int = 0) -> RidgeState:
    """Fit the first domain: ``W = (X^T X + lam I)^{-1} X^T Y``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"x must be a nonempty 2-d matrix, got shape {x.shape}")
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"x and y row counts differ: {x.shape[0]} vs {y.shape[0]}")
    _check_one_hot(y)
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    h = x.shape[1]
    m = spd_solve(x.T @ x + lam * np.eye(h), np.eye(h))
    m = (m + m.T) / 2.0
    w = m @ (x.T @ y)
    block = ClassBlock(domain_id=domain_id, start=class_start, stop=class_start + y.shape[1])
    return RidgeState(w=_frozen(w), m=_frozen(m), lam=float(lam), blocks=(block,))


def _woodbury_m(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Capacitance-side update, O(n^3) in the new domain's row count."""
    n = x.shape[0]
    xm = x @ m
    k = np.eye(n) + xm @ x.T
    return m - xm.T @ spd_solve(k, xm)


def _gram_m(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Gram-side update, O(h^3) in the embedding width."""
    h = m.shape[0]
    m_inv = spd_solve(m, np.eye(h))
    m_inv = (m_inv + m_inv.T) / 2.0
    return spd_solve(m_inv + x.T @ x, np.eye(h))


def update_state(state: RidgeState, x, y, domain_id: int | None = None, class_start: int | None = None) -> RidgeState:
    """Absorb a new domain's data into the classifier.

    ``M`` is updated through whichever Woodbury form inverts the smaller
    matrix; old ``W`` columns get the correction ``-M X^T X W`` and the
    new block's columns are ``M X^T Y``.  The new class block must be
    disjoint from every registered one.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise ValueError(f"x must be a nonempty 2-d matrix, got shape {x.shape}")
    if x.shape[1] != state.embedding_dim:
        raise ValueError(
            f"embedding width {x.shape[1]} does not match state width {state.embedding_dim}"
        )
    if y.shape[0] != x.shape[0]:
        raise ValueError(f"x and y row counts differ: {x.shape[0]} vs {y.shape[0]}")
    _check_one_hot(y)

    if domain_id is None:
        domain_id = max(b.domain_id for b in state.blocks) + 1
    if class_start is None:
        class_start = max(b.stop for b in state.blocks)
    block = ClassBlock(domain_id=int(domain_id), start=int(class_start), stop=int(class_start) + y.shape[1])
    for existing in state.blocks:
        if existing.overlaps(block):
            raise ValueError(
                f"class block [{block.start}, {block.stop}) overlaps existing "
                f"[{existing.start}, {existing.stop}) of domain {existing.domain_id}"
            )

    n, h = x.shape
    m_new = _woodbury_m(state.m, x) if n <= h else _gram_m(state.m, x)
    m_new = (m_new + m_new.T) / 2.0

    corrected = state.w - m_new @ (x.T @ (x @ state.w))
    new_cols = m_new @ (x.T @ y)
    w_new = np.hstack([corrected, new_cols])
    return RidgeState(
        w=_frozen(w_new), m=_frozen(m_new), lam=state.lam, blocks=state.blocks + (block,)
    )


def predict(state: RidgeState, x):
    """Per-row class probabilities and predicted global class indices.

    Probabilities are the row softmax of ``X W``; the predicted class is
    the argmax column (lowest index on ties) mapped through the block
    registry to its global class id.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != state.embedding_dim:
        raise ValueError(f"x must be (n, {state.embedding_dim}), got shape {x.shape}")
    probs = softmax_rows(x @ state.w)
    classes = state.column_classes()[np.argmax(probs, axis=1)]
    return probs, classes


def batch_oracle(all_x, all_y, lam: float) -> np.ndarray:
    """Reference batch solution over stacked domains (test oracle).

    ``all_x`` and ``all_y`` are per-domain sequences; targets are
    zero-padded into the concatenated class space in block order.
    """
    all_x = [np.asarray(x, dtype=np.float64) for x in all_x]
    all_y = [np.asarray(y, dtype=np.float64) for y in all_y]
    if len(all_x) != len(all_y) or not all_x:
        raise ValueError("need one target block per domain, at least one domain")
    widths = [y.shape[1] for y in all_y]
    total = sum(widths)
    padded = []
    offset = 0
    for y in all_y:
        block = np.zeros((y.shape[0], total), dtype=np.float64)
        block[:, offset : offset + y.shape[1]] = y
        padded.append(block)
        offset += y.shape[1]
    return ridge_solve_batch(np.vstack(all_x), np.vstack(padded), lam)
