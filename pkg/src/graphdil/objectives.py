"""Training objectives for adapter optimization, with analytic gradients.

Two terms, combined by nonnegative weights:

  * intra-domain: a supervised contrastive loss over cosine similarities
    between original-view and augmented-view embeddings.  Positives for
    node j are all same-class nodes in the augmented view, including j
    itself, so the positive set is never empty.
  * inter-domain: inverse squared distance from each embedding to every
    stored prototype of earlier domains, a repulsion term that is zero
    when no prototypes exist yet.

Gradients are returned alongside values so the adapter training loop can
chain them through the backbone without an autodiff framework.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import PrototypeSet
from .errors import NumericalError

__all__ = ["LossReport", "inter_loss", "intra_loss", "total_loss"]


def _unit_rows(x: np.ndarray, name: str):
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0):
        raise NumericalError(f"{name} has a zero-norm row; cosine similarity is undefined")
    return x / norms[:, None], norms


def _masked_logsumexp(s: np.ndarray, mask: np.ndarray) -> np.ndarray:
    masked = np.where(mask, s, -np.inf)
    m = masked.max(axis=1, keepdims=True)
    return (m + np.log(np.sum(np.exp(masked - m), axis=1, keepdims=True)))[:, 0]


def intra_loss(x, x_aug, labels):
    """Supervised contrastive loss between the two views.

    value = -sum_j log( sum_{o in pos(j)} exp(sim(x_j, xa_o))
                        / sum_{o' over all} exp(sim(x_j, xa_o')) )

    with cosine similarity.  Returns ``(value, grad_x, grad_x_aug)``.
    """
    x = np.asarray(x, dtype=np.float64)
    x_aug = np.asarray(x_aug, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if x.shape != x_aug.shape or x.shape[0] != labels.shape[0]:
        raise ValueError(
            f"misaligned inputs: x {x.shape}, x_aug {x_aug.shape}, labels {labels.shape}"
        )

    u, nx = _unit_rows(x, "x")
    v, nv = _unit_rows(x_aug, "x_aug")
    s = u @ v.T
    pos = labels[:, None] == labels[None, :]

    lse_all = _masked_logsumexp(s, np.ones_like(pos))
    lse_pos = _masked_logsumexp(s, pos)
    value = float(np.sum(lse_all - lse_pos))

    # dL/ds = softmax over all minus softmax restricted to positives
    a = np.exp(s - lse_all[:, None])
    b = np.where(pos, np.exp(s - lse_pos[:, None]), 0.0)
    g = a - b

    du = g @ v
    dv = g.T @ u
    grad_x = (du - np.sum(du * u, axis=1, keepdims=True) * u) / nx[:, None]
    grad_x_aug = (dv - np.sum(dv * v, axis=1, keepdims=True) * v) / nv[:, None]
    return value, grad_x, grad_x_aug


def inter_loss(x, prototypes: PrototypeSet, epsilon: float):
    """Mean inverse squared distance to every stored prototype.

    value = (1/n) sum_j sum_k 1 / (||x_j - P_k||^2 + epsilon)

    Empty prototype sets give value 0 and a zero gradient.  Returns
    ``(value, grad_x)``.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    x = np.asarray(x, dtype=np.float64)
    if len(prototypes) == 0:
        return 0.0, np.zeros_like(x)
    p = prototypes.vectors()
    if p.shape[1] != x.shape[1]:
        raise ValueError(f"prototype width {p.shape[1]} != embedding width {x.shape[1]}")
    n = x.shape[0]
    diff = x[:, None, :] - p[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    w = 1.0 / (d2 + epsilon)
    value = float(w.sum() / n)
    grad_x = (-2.0 / n) * np.sum((w * w)[:, :, None] * diff, axis=1)
    return value, grad_x


@dataclass(frozen=True)
class LossReport:
    """Component and combined values plus gradients for both views."""

    intra: float
    inter: float
    total: float
    grad_x: np.ndarray
    grad_x_aug: np.ndarray


def total_loss(x, x_aug, labels, prototypes: PrototypeSet, gamma1: float, gamma2: float, epsilon: float) -> LossReport:
    """Weighted combination ``gamma1 * intra + gamma2 * inter``.

    The inter-domain term sees only the original view, so its gradient
    contributes nothing to ``grad_x_aug``.
    """
    if gamma1 < 0 or gamma2 < 0:
        raise ValueError(f"loss weights must be nonnegative, got {gamma1}, {gamma2}")
    intra, gx_intra, gxa_intra = intra_loss(x, x_aug, labels)
    inter, gx_inter = inter_loss(x, prototypes, epsilon)
    return LossReport(
        intra=intra,
        inter=inter,
        total=gamma1 * intra + gamma2 * inter,
        grad_x=gamma1 * gx_intra + gamma2 * gx_inter,
        grad_x_aug=gamma1 * gxa_intra,
    )
