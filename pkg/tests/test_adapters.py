import numpy as np
import pytest
from oracles import assert_grad_close, finite_difference

from graphdil.adapters import (
    AdapterRegistry,
    AdapterTrainConfig,
    LoraAdapter,
    init_adapter,
    train_adapter,
)
from graphdil.backbone import backward, forward, init_backbone
from graphdil.clustering import Prototype, PrototypeSet
from graphdil.graphs import DomainTask, augment, normalized_adjacency, synth_domain_suite
from graphdil.numerics import rng
from graphdil.objectives import total_loss


def frozen_backbone(d=6, h=4, seed=0):
    return init_backbone(d, h, seed).freeze()


def domain(seed=0, classes=2, nodes=20, dim=6):
    return synth_domain_suite(1, classes, nodes, 0.3, 0.05, dim, 4.0, seed=seed)[0]


class TestInitAdapter:
    def test_shape_contract(self):
        a = init_adapter((64, 32), rank=8, seed=0)
        assert a.down[0].shape == (64, 8)
        assert a.up[0].shape == (8, 32)
        assert a.down[1].shape == (32, 8)
        assert a.up[1].shape == (8, 32)

    def test_fresh_adapter_is_identity_bit_exact(self):
        backbone = frozen_backbone()
        g = domain().graph
        ahat = normalized_adjacency(g)
        feats = g.features
        a = init_adapter((6, 4), rank=2, seed=1)
        x_plain, _ = forward(ahat, feats, backbone)
        x_adapted, _ = forward(ahat, feats, backbone, a)
        assert np.array_equal(x_plain, x_adapted)

    def test_deterministic_per_seed(self):
        a = init_adapter((6, 4), rank=2, seed=3)
        b = init_adapter((6, 4), rank=2, seed=3)
        assert np.array_equal(a.down[0], b.down[0])
        assert np.array_equal(a.down[1], b.down[1])
        assert not np.array_equal(a.down[0], init_adapter((6, 4), rank=2, seed=4).down[0])

    def test_invalid_rank_rejected(self):
        with pytest.raises(ValueError):
            init_adapter((6, 4), rank=0, seed=0)
        with pytest.raises(ValueError):
            init_adapter((6, 4), rank=4, seed=0)

    def test_parameter_count_below_backbone(self):
        a = init_adapter((64, 64), rank=16, seed=0)
        backbone = init_backbone(64, 64, 0)
        assert a.parameter_count() == 16 * (64 + 64) + 16 * (64 + 64)
        assert a.parameter_count() < backbone.w1.size + backbone.w2.size


class TestRegistry:
    def test_only_frozen_adapters_registered(self):
        reg = AdapterRegistry()
        a = init_adapter((6, 4), rank=2, seed=0, domain_id=0)
        with pytest.raises(ValueError):
            reg.add(a)
        reg.add(a.freeze())
        assert 0 in reg and len(reg) == 1

    def test_duplicate_domain_rejected(self):
        reg = AdapterRegistry()
        reg.add(init_adapter((6, 4), rank=2, seed=0, domain_id=1).freeze())
        with pytest.raises(ValueError):
            reg.add(init_adapter((6, 4), rank=2, seed=1, domain_id=1).freeze())


class TestTrainAdapter:
    def cfg(self, **kw):
        base = dict(rank=2, epochs=5, lr=0.05, weight_decay=5e-4, gamma1=1.0,
                    gamma2=0.1, epsilon=1e-8, mask_rate=0.1, drop_rate=0.1, seed=0)
        base.update(kw)
        return AdapterTrainConfig(**base)

    def test_zero_epochs_returns_frozen_init(self):
        task = domain(seed=1)
        backbone = frozen_backbone()
        adapter, losses = train_adapter(task, backbone, PrototypeSet(), self.cfg(epochs=0))
        assert adapter.frozen
        assert losses.size == 0
        ref = init_adapter((6, 4), rank=2, seed=0, domain_id=task.domain_id)
        assert np.array_equal(adapter.down[0], ref.down[0])
        assert np.all(adapter.up[0] == 0.0)

    def test_loss_decreases_without_prototypes(self):
        task = domain(seed=2, nodes=20)
        backbone = frozen_backbone()
        _, losses = train_adapter(task, backbone, PrototypeSet(), self.cfg(epochs=60, gamma2=0.0))
        assert losses[-1] < losses[0]

    def test_backbone_bytes_unchanged(self):
        task = domain(seed=3)
        backbone = frozen_backbone()
        w1_before = backbone.w1.copy()
        w2_before = backbone.w2.copy()
        train_adapter(task, backbone, PrototypeSet(), self.cfg(epochs=3))
        assert np.array_equal(backbone.w1, w1_before)
        assert np.array_equal(backbone.w2, w2_before)

    def test_unfrozen_backbone_rejected(self):
        task = domain(seed=4)
        with pytest.raises(ValueError):
            train_adapter(task, init_backbone(6, 4, 0), PrototypeSet(), self.cfg())

    def test_dimension_mismatch_rejected(self):
        task = domain(seed=5, dim=5)
        with pytest.raises(ValueError):
            train_adapter(task, frozen_backbone(d=6), PrototypeSet(), self.cfg())

    def test_training_later_domain_keeps_earlier_embeddings(self):
        from graphdil.graphs import Graph

        backbone = frozen_backbone()
        task1 = domain(seed=6)
        g2 = domain(seed=7).graph
        shifted = Graph(g2.num_nodes, g2.edges, g2.features, g2.labels + 2, g2.split)
        task2 = DomainTask(1, shifted, (2, 4))
        a1, _ = train_adapter(task1, backbone, PrototypeSet(), self.cfg(epochs=4))
        ahat1 = normalized_adjacency(task1.graph)
        x1_before, _ = forward(ahat1, task1.graph.features, backbone, a1)
        train_adapter(task2, backbone, PrototypeSet(), self.cfg(epochs=4))
        x1_after, _ = forward(ahat1, task1.graph.features, backbone, a1)
        assert np.array_equal(x1_before, x1_after)

    def test_frozen_result_rejects_writes(self):
        task = domain(seed=8)
        adapter, _ = train_adapter(task, frozen_backbone(), PrototypeSet(), self.cfg(epochs=1))
        with pytest.raises(ValueError):
            adapter.up[0][0, 0] = 1.0


class TestFirstStepGradient:
    def test_pipeline_gradient_matches_finite_differences(self):
        # the exact quantity the first optimizer step consumes: combined
        # objective of both views, differentiated w.r.t. adapter factors
        task = domain(seed=9, classes=2, nodes=5, dim=6)
        g = task.graph
        backbone = frozen_backbone(d=6, h=4, seed=10)
        adapter = init_adapter((6, 4), rank=2, seed=11, domain_id=0)
        gen = rng(12, "step-fd")
        for m in (*adapter.down, *adapter.up):
            m += 0.05 * gen.standard_normal(m.shape)

        protos = PrototypeSet(
            [Prototype(domain_id=9, cluster_id=0, vector=gen.standard_normal(4))]
        )
        rows = np.flatnonzero(g.mask("train") & (g.labels >= 0))
        labels = g.labels[rows]
        aug = augment(g, 0.2, 0.2, seed=13)
        ahat = normalized_adjacency(g)
        ahat_aug = normalized_adjacency(aug)
        gamma1, gamma2, eps = 1.0, 0.3, 1e-8

        def loss_and_grads(a):
            x, tape = forward(ahat, g.features, backbone, a)
            x_aug, tape_aug = forward(ahat_aug, aug.features, backbone, a)
            report = total_loss(x[rows], x_aug[rows], labels, protos, gamma1, gamma2, eps)
            d_x = np.zeros_like(x)
            d_x[rows] = report.grad_x
            d_xa = np.zeros_like(x_aug)
            d_xa[rows] = report.grad_x_aug
            _, ga = backward(tape, d_x)
            _, gaa = backward(tape_aug, d_xa)
            return report.total, {k: ga[k] + gaa[k] for k in ga}

        base_total, grads = loss_and_grads(adapter)
        slots = {"down0": (0, "down"), "up0": (0, "up"), "down1": (1, "down"), "up1": (1, "up")}
        for name, (layer, kind) in slots.items():
            def f(arr, layer=layer, kind=kind):
                a = adapter.copy()
                getattr(a, kind)[layer][:] = arr
                return loss_and_grads(a)[0]

            fd = finite_difference(f, getattr(adapter, kind)[layer])
            assert_grad_close(grads[name], fd)
