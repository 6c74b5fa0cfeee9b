"""Two-layer graph convolution backbone with a hand-derived reverse pass.

The forward pass is

    H1 = relu(Ahat @ F @ (W1 + D1))
    X  = Ahat @ H1 @ (W2 + D2)

where ``Dl = down_l @ up_l`` is a low-rank adapter branch (zero when no
adapter is attached; the effective weight is then exactly ``Wl``, so an
adapter with ``up = 0`` is bit-identical to no adapter).  After
link-prediction pretraining on the first domain the backbone is frozen
for good; only adapter parameters are ever trained afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import expit

from .graphs import Graph, normalized_adjacency
from .numerics import glorot_uniform, rng
from .optim import Adam

if TYPE_CHECKING:  # pragma: no cover
    from .adapters import LoraAdapter

__all__ = [
    "BackboneGrads",
    "BackboneParams",
    "PretrainConfig",
    "Tape",
    "backward",
    "forward",
    "pretrain_link_prediction",
]


@dataclass
class BackboneParams:
    """Weights of the two graph-convolution layers plus the freeze flag."""

    w1: np.ndarray  # in_dim x hidden
    w2: np.ndarray  # hidden x hidden
    frozen: bool = False

    @property
    def in_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[1]

    def freeze(self) -> "BackboneParams":
        self.w1.flags.writeable = False
        self.w2.flags.writeable = False
        self.frozen = True
        return self

    def copy_trainable(self) -> "BackboneParams":
        return BackboneParams(w1=self.w1.copy(), w2=self.w2.copy(), frozen=False)


def init_backbone(in_dim: int, hidden: int, seed: int) -> BackboneParams:
    gen = rng(seed, "backbone-init")
    return BackboneParams(
        w1=glorot_uniform(gen, in_dim, hidden),
        w2=glorot_uniform(gen, hidden, hidden),
    )


@dataclass
class Tape:
    """Cached intermediates of one forward pass; consumed by one backward."""

    p: np.ndarray  # Ahat @ F
    z1: np.ndarray  # pre-activation of layer 1
    q: np.ndarray  # Ahat @ H1
    ahat: np.ndarray
    w2_eff: np.ndarray
    adapter: "LoraAdapter | None"
    consumed: bool = False


@dataclass(frozen=True)
class BackboneGrads:
    w1: np.ndarray
    w2: np.ndarray


def forward(ahat, feats, params: BackboneParams, adapter: "LoraAdapter | None" = None):
    """Run the adapted two-layer forward pass; returns ``(X, tape)``."""
    ahat = np.asarray(ahat, dtype=np.float64)
    feats = np.asarray(feats, dtype=np.float64)
    n = feats.shape[0]
    if ahat.shape != (n, n):
        raise ValueError(f"ahat must be ({n}, {n}), got {ahat.shape}")
    if feats.shape[1] != params.in_dim:
        raise ValueError(f"features have width {feats.shape[1]}, backbone expects {params.in_dim}")
    if adapter is not None and adapter.dims != (params.in_dim, params.hidden):
        raise ValueError(
            f"adapter dims {adapter.dims} do not match backbone ({params.in_dim}, {params.hidden})"
        )

    w1_eff = params.w1 if adapter is None else params.w1 + adapter.delta(0)
    w2_eff = params.w2 if adapter is None else params.w2 + adapter.delta(1)
    p = ahat @ feats
    z1 = p @ w1_eff
    h1 = np.maximum(z1, 0.0)
    q = ahat @ h1
    x = q @ w2_eff
    return x, Tape(p=p, z1=z1, q=q, ahat=ahat, w2_eff=w2_eff, adapter=adapter)


def backward(tape: Tape, d_out):
    """Chain-rule gradients for one forward pass.

    Returns ``(BackboneGrads, adapter_grads)`` where ``adapter_grads`` is
    ``None`` when the forward ran without an adapter, else a dict with
    keys ``down0, up0, down1, up1``.  Backbone gradients are always
    computed; whether they may be applied is the caller's contract.
    """
    if tape.consumed:
        raise RuntimeError("tape already consumed by a previous backward pass")
    tape.consumed = True
    d_out = np.asarray(d_out, dtype=np.float64)
    if d_out.shape != (tape.q.shape[0], tape.w2_eff.shape[1]):
        raise ValueError(f"d_out has shape {d_out.shape}, expected {(tape.q.shape[0], tape.w2_eff.shape[1])}")

    d_w2_eff = tape.q.T @ d_out
    dq = d_out @ tape.w2_eff.T
    dh1 = tape.ahat.T @ dq
    dz1 = dh1 * (tape.z1 > 0)
    d_w1_eff = tape.p.T @ dz1

    grads = BackboneGrads(w1=d_w1_eff, w2=d_w2_eff)
    if tape.adapter is None:
        return grads, None
    a = tape.adapter
    adapter_grads = {
        "down0": d_w1_eff @ a.up[0].T,
        "up0": a.down[0].T @ d_w1_eff,
        "down1": d_w2_eff @ a.up[1].T,
        "up1": a.down[1].T @ d_w2_eff,
    }
    return grads, adapter_grads


@dataclass(frozen=True)
class PretrainConfig:
    hidden: int = 64
    epochs: int = 200
    lr: float = 5e-2
    weight_decay: float = 5e-4
    seed: int = 0


def _edge_logits(x: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", x[u], x[v])


def pretrain_link_prediction(g: Graph, cfg: PretrainConfig):
    """Train the backbone to score edges above random non-edges.

    Binary cross-entropy on ``sigmoid(x_u . x_v)`` over all edges plus
    one uniformly sampled negative pair per edge, resampled each epoch.
    Returns ``(params, losses)`` with ``params`` frozen.
    """
    if g.num_edges < 1:
        raise ValueError("link-prediction pretraining needs at least one edge")
    params = init_backbone(g.feature_dim, cfg.hidden, cfg.seed)
    ahat = normalized_adjacency(g)
    pos_u, pos_v = g.edges[:, 0], g.edges[:, 1]
    e = g.num_edges
    n = g.num_nodes
    neg_gen = rng(cfg.seed, "pretrain-negatives")
    opt = Adam(
        {"w1": params.w1, "w2": params.w2},
        lr=cfg.lr,
        weight_decay=cfg.weight_decay,
    )

    losses = []
    for _ in range(cfg.epochs):
        neg_u = neg_gen.integers(0, n, size=e)
        neg_v = neg_gen.integers(0, n, size=e)
        clash = neg_u == neg_v
        neg_v[clash] = (neg_v[clash] + 1) % n

        x, tape = forward(ahat, g.features, params)
        pos_t = _edge_logits(x, pos_u, pos_v)
        neg_t = _edge_logits(x, neg_u, neg_v)
        # softplus(-t) = -log(sigmoid(t)); softplus(t) = -log(1 - sigmoid(t))
        loss = (np.logaddexp(0.0, -pos_t).sum() + np.logaddexp(0.0, neg_t).sum()) / (2 * e)
        losses.append(float(loss))

        d_x = np.zeros_like(x)
        g_pos = (expit(pos_t) - 1.0) / (2 * e)
        g_neg = expit(neg_t) / (2 * e)
        np.add.at(d_x, pos_u, g_pos[:, None] * x[pos_v])
        np.add.at(d_x, pos_v, g_pos[:, None] * x[pos_u])
        np.add.at(d_x, neg_u, g_neg[:, None] * x[neg_v])
        np.add.at(d_x, neg_v, g_neg[:, None] * x[neg_u])

        grads, _ = backward(tape, d_x)
        opt.step({"w1": grads.w1, "w2": grads.w2})

    return params.freeze(), np.asarray(losses)
