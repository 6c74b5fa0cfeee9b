"""Per-domain low-rank adapters and their training loop.

Each domain owns one adapter: a (down, up) factor pair per backbone
layer whose product perturbs the frozen layer weight.  ``up`` starts at
zero so a fresh adapter leaves the backbone output untouched; training a
later domain never revisits an earlier adapter, which is what keeps old
domains' embeddings frozen in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backbone import BackboneParams, backward, forward
from .clustering import PrototypeSet
from .graphs import DomainTask, augment, normalized_adjacency
from .numerics import rng
from .objectives import total_loss
from .optim import Adam

__all__ = [
    "AdapterRegistry",
    "AdapterTrainConfig",
    "LoraAdapter",
    "init_adapter",
    "train_adapter",
]


@dataclass
class LoraAdapter:
    """Low-rank weight pair per layer for one domain.

    Layer l contributes ``delta_l = down[l] @ up[l]`` to the frozen
    weight.  Frozen adapters are bit-immutable (arrays read-only).
    """

    domain_id: int
    rank: int
    down: tuple[np.ndarray, np.ndarray]
    up: tuple[np.ndarray, np.ndarray]
    frozen: bool = False

    @property
    def dims(self) -> tuple[int, int]:
        return self.down[0].shape[0], self.up[0].shape[1]

    def delta(self, layer: int) -> np.ndarray:
        return self.down[layer] @ self.up[layer]

    def parameter_count(self) -> int:
        return sum(m.size for m in self.down) + sum(m.size for m in self.up)

    def freeze(self) -> "LoraAdapter":
        for m in (*self.down, *self.up):
            m.flags.writeable = False
        self.frozen = True
        return self

    def copy(self) -> "LoraAdapter":
        return LoraAdapter(
            domain_id=self.domain_id,
            rank=self.rank,
            down=tuple(m.copy() for m in self.down),
            up=tuple(m.copy() for m in self.up),
            frozen=False,
        )


def init_adapter(dims: tuple[int, int], rank: int, seed: int, domain_id: int = 0) -> LoraAdapter:
    """Create an adapter for a backbone of the given (in_dim, hidden) dims.

    ``down`` is scaled Gaussian (std 1/sqrt(rank)), ``up`` is zero, so
    the adapted forward initially equals the frozen backbone exactly.
    """
    in_dim, hidden = dims
    if not 1 <= rank < min(in_dim, hidden):
        raise ValueError(f"rank must satisfy 1 <= rank < {min(in_dim, hidden)}, got {rank}")
    gen = rng(seed, f"adapter-init-domain-{domain_id}")
    std = 1.0 / np.sqrt(rank)
    down = (
        std * gen.standard_normal((in_dim, rank)),
        std * gen.standard_normal((hidden, rank)),
    )
    up = (np.zeros((rank, hidden)), np.zeros((rank, hidden)))
    return LoraAdapter(domain_id=domain_id, rank=rank, down=down, up=up)


class AdapterRegistry:
    """Frozen adapters keyed by domain id; at most one per domain."""

    def __init__(self):
        self._adapters: dict[int, LoraAdapter] = {}

    def add(self, adapter: LoraAdapter) -> None:
        if not adapter.frozen:
            raise ValueError("only frozen adapters may be registered")
        if adapter.domain_id in self._adapters:
            raise ValueError(f"domain {adapter.domain_id} already has an adapter")
        self._adapters[adapter.domain_id] = adapter

    def get(self, domain_id: int) -> LoraAdapter:
        if domain_id not in self._adapters:
            raise KeyError(f"no adapter registered for domain {domain_id}")
        return self._adapters[domain_id]

    def ids(self) -> list[int]:
        return sorted(self._adapters)

    def __len__(self) -> int:
        return len(self._adapters)

    def __contains__(self, domain_id: int) -> bool:
        return domain_id in self._adapters


@dataclass(frozen=True)
class AdapterTrainConfig:
    rank: int = 16
    epochs: int = 200
    lr: float = 5e-2
    weight_decay: float = 5e-4
    gamma1: float = 1.0
    gamma2: float = 0.1
    epsilon: float = 1e-8
    mask_rate: float = 0.1
    drop_rate: float = 0.1
    seed: int = 0


def _train_rows(task: DomainTask) -> np.ndarray:
    g = task.graph
    if g.labels is None:
        raise ValueError(f"domain {task.domain_id} has no labels; cannot train")
    rows = np.flatnonzero(g.mask("train") & (g.labels >= 0))
    if rows.size == 0:
        raise ValueError(f"domain {task.domain_id} has no labeled training nodes")
    return rows


def active_rows(rows: np.ndarray, x: np.ndarray, x_aug: np.ndarray) -> np.ndarray:
    """Drop rows whose embedding is exactly zero in either view.

    A rectified neighborhood can die under an unlucky augmentation or
    adapter drift; the zero row has no cosine gradient, so that node sits
    out the epoch instead of poisoning the objective.
    """
    alive = (np.linalg.norm(x[rows], axis=1) > 0.0) & (
        np.linalg.norm(x_aug[rows], axis=1) > 0.0
    )
    if not np.any(alive):
        raise NumericalError("every training embedding collapsed to zero norm")
    return rows[alive]


def train_adapter(
    task: DomainTask,
    backbone: BackboneParams,
    prototypes: PrototypeSet,
    cfg: AdapterTrainConfig,
):
    """Train this domain's adapter against the frozen backbone.

    Per epoch: draw an augmented view, run both views forward, evaluate
    the combined objective on labeled training nodes, and apply an Adam
    step to the adapter factors only.  Returns ``(adapter, losses)``
    with the adapter frozen; the backbone bytes are untouched.
    """
    if not backbone.frozen:
        raise ValueError("backbone must be frozen before adapter training")
    g = task.graph
    if g.feature_dim != backbone.in_dim:
        raise ValueError(
            f"domain features have width {g.feature_dim}, backbone expects {backbone.in_dim}"
        )
    rows = _train_rows(task)

    adapter = init_adapter(
        (backbone.in_dim, backbone.hidden), cfg.rank, cfg.seed, domain_id=task.domain_id
    )
    ahat = normalized_adjacency(g)
    epoch_seeds = rng(cfg.seed, f"adapter-train-domain-{task.domain_id}")
    opt = Adam(
        {"down0": adapter.down[0], "up0": adapter.up[0], "down1": adapter.down[1], "up1": adapter.up[1]},
        lr=cfg.lr,
        weight_decay=cfg.weight_decay,
    )

    losses = []
    for _ in range(cfg.epochs):
        aug = augment(g, cfg.mask_rate, cfg.drop_rate, seed=int(epoch_seeds.integers(2**63)))
        ahat_aug = normalized_adjacency(aug)

        x, tape = forward(ahat, g.features, backbone, adapter)
        x_aug, tape_aug = forward(ahat_aug, aug.features, backbone, adapter)
        act = active_rows(rows, x, x_aug)

        report = total_loss(
            x[act], x_aug[act], g.labels[act], prototypes, cfg.gamma1, cfg.gamma2, cfg.epsilon
        )
        losses.append(report.total)

        d_x = np.zeros_like(x)
        d_x[act] = report.grad_x
        d_x_aug = np.zeros_like(x_aug)
        d_x_aug[act] = report.grad_x_aug

        _, ga = backward(tape, d_x)
        _, ga_aug = backward(tape_aug, d_x_aug)
        opt.step({k: ga[k] + ga_aug[k] for k in ga})

    return adapter.freeze(), np.asarray(losses)
