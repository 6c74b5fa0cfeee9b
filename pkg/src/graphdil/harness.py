"""Sequence runner, inference pipeline, metrics, and persistence.

A run walks the domain sequence once: pretrain the backbone on the
first domain, then per domain align features, train that domain's
adapter, harvest embedding prototypes, fold the domain into the ridge
classifier, and record its discrimination prototype.  After every
domain, all domains seen so far are re-evaluated through the same
inference path the public :func:`infer` uses (domain discrimination
included), filling one row of the accuracy matrix.

Artifacts persist into ``<out>/checkpoint/`` (binary matrices plus a
manifest); the report persists as JSON and CSV with rendered figures
alongside.  A ``.lock`` file serializes runners per output directory.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from filelock import FileLock, Timeout

from .adapters import AdapterRegistry, AdapterTrainConfig, LoraAdapter, train_adapter
from .backbone import BackboneParams, PretrainConfig, backward, forward, pretrain_link_prediction
from .clustering import Prototype, PrototypeSet, extract_prototypes
from .config import RunConfig
from .container import read_matrix, write_matrix
from .datasets import dataset_num_classes, load_dataset, save_dataset
from .discrimination import (
    DomainPrototype,
    ProjectionParams,
    domain_prototype,
    init_projection,
    random_projection,
)
from .errors import ConfigError, DataError
from .graphs import DomainTask, FeatureAligner, Graph, fit_aligner, normalized_adjacency, synth_domain_suite
from .numerics import ridge_solve_batch, rng, spd_solve
from .objectives import total_loss
from .optim import Adam
from .ridge import ClassBlock, RidgeState, init_state, one_hot, predict, update_state

__all__ = [
    "AccuracyMatrix",
    "InferenceResult",
    "RunArtifacts",
    "RunReport",
    "embed",
    "infer",
    "load_checkpoint",
    "load_run_tasks",
    "metrics",
    "run_sequence",
    "save_checkpoint",
]

MANIFEST_VERSION = 1
_CHECKPOINT = "checkpoint"
_MANIFEST = "manifest.json"


class AccuracyMatrix:
    """Lower-triangular record: entry (i, j) is the accuracy on domain j's
    test split measured after learning domain i."""

    def __init__(self, rows=()):
        self._rows: list[tuple[float, ...]] = []
        for row in rows:
            self.append_row(row)

    def append_row(self, row) -> None:
        row = tuple(float(v) for v in row)
        if len(row) != len(self._rows) + 1:
            raise ValueError(f"row {len(self._rows)} must have {len(self._rows) + 1} entries, got {len(row)}")
        if any(not 0.0 <= v <= 1.0 for v in row):
            raise ValueError(f"accuracies must lie in [0, 1], got {row}")
        self._rows.append(row)

    @property
    def rows(self) -> tuple[tuple[float, ...], ...]:
        return tuple(self._rows)

    @property
    def num_domains(self) -> int:
        return len(self._rows)

    def entry(self, i: int, j: int) -> float:
        if j > i:
            raise ValueError(f"entry ({i}, {j}) is above the diagonal")
        return self._rows[i][j]

    def to_lists(self) -> list[list[float]]:
        return [list(r) for r in self._rows]


def metrics(matrix) -> tuple[float, float]:
    """Average accuracy and average forgetting of an accuracy matrix.

    AA is the mean of the final row.  AF is the mean, over all but the
    last domain, of (final accuracy - accuracy when first learned); by
    convention AF = 0 for a single domain.
    """
    rows = matrix.rows if isinstance(matrix, AccuracyMatrix) else AccuracyMatrix(matrix).rows
    t = len(rows)
    if t < 1:
        raise ValueError("accuracy matrix must have at least one row")
    aa = float(np.mean(rows[-1]))
    if t == 1:
        return aa, 0.0
    af = float(np.mean([rows[-1][j] - rows[j][j] for j in range(t - 1)]))
    return aa, af


@dataclass
class RunArtifacts:
    """Everything a finished run persists, as in-memory objects."""

    config: RunConfig
    backbone: BackboneParams
    projection: ProjectionParams
    adapters: AdapterRegistry
    aligners: list[FeatureAligner] = field(default_factory=list)
    prototypes: PrototypeSet = field(default_factory=PrototypeSet)
    domain_protos: list[DomainPrototype] = field(default_factory=list)
    ridge: RidgeState | None = None
    embeddings: list[np.ndarray] = field(default_factory=list)
    dataset_paths: list[str] = field(default_factory=list)

    @property
    def num_domains(self) -> int:
        return len(self.aligners)


@dataclass(frozen=True)
class RunReport:
    """Outcome of one sequence run."""

    matrix: AccuracyMatrix
    average_accuracy: float
    average_forgetting: float
    confusion: list[list[int]]
    config: RunConfig
    blocks: tuple[ClassBlock, ...]
    oracle_domains: bool
    timings: dict

    def to_dict(self) -> dict:
        """Deterministic report content (timings are reported separately)."""
        return {
            "config": self.config.to_dict(),
            "accuracy_matrix": self.matrix.to_lists(),
            "average_accuracy": self.average_accuracy,
            "average_forgetting": self.average_forgetting,
            "domain_confusion": self.confusion,
            "class_blocks": [dataclasses.asdict(b) for b in self.blocks],
            "oracle_domains": self.oracle_domains,
        }


@dataclass(frozen=True)
class InferenceResult:
    """Predictions for one graph plus the discriminated domain."""

    domain_id: int
    classes: np.ndarray  # global class index per node
    probs: np.ndarray  # n x C, rows sum to 1
    scores: dict[int, float]  # squared prototype distance per candidate domain


def _resolve_tasks(config: RunConfig, out: Path) -> tuple[list[DomainTask], list[str]]:
    """Build the domain sequence and the dataset paths to record."""
    if config.synth_domains > 0:
        tasks = synth_domain_suite(
            num_domains=config.synth_domains,
            classes_per_domain=config.synth_classes_per_domain,
            nodes_per_class=config.synth_nodes_per_class,
            p_in=config.synth_p_in,
            p_out=config.synth_p_out,
            feature_dim=config.synth_feature_dim,
            mean_separation=config.synth_mean_separation,
            seed=config.seed,
        )
        paths = []
        for task in tasks:
            rel = f"datasets/domain_{task.domain_id}"
            _save_task_dataset(task, out / rel)
            paths.append(rel)
        return tasks, paths

    tasks = []
    offset = 0
    for i, path in enumerate(config.datasets):
        try:
            g = load_dataset(path)
            width = dataset_num_classes(path)
        except DataError as exc:
            raise DataError(f"domain {i}: {exc}") from exc
        if g.labels is None or width < 1:
            raise DataError(f"domain {i}: dataset {path} has no labels")
        tasks.append(_task_from_local(g, i, offset, width))
        offset += width
    return tasks, list(config.datasets)


def _task_from_local(g: Graph, domain_id: int, start: int, width: int) -> DomainTask:
    labels = g.labels.copy()
    labels[labels >= 0] += start
    global_graph = Graph(g.num_nodes, g.edges, g.features, labels, g.split)
    return DomainTask(domain_id=domain_id, graph=global_graph, class_block=(start, start + width))


def _save_task_dataset(task: DomainTask, path: Path) -> None:
    """Persist one synthetic domain with block-local labels."""
    g = task.graph
    labels = g.labels.copy()
    labels[labels >= 0] -= task.class_block[0]
    local = Graph(g.num_nodes, g.edges, g.features, labels, g.split)
    save_dataset(local, path, name=f"domain_{task.domain_id}")


def _aligned(graph: Graph, aligner: FeatureAligner) -> Graph:
    return graph.with_features(aligner.apply(graph.features))


def _train_labeled_rows(task: DomainTask) -> np.ndarray:
    g = task.graph
    rows = np.flatnonzero(g.mask("train") & (g.labels >= 0))
    if rows.size == 0:
        raise DataError(f"domain {task.domain_id}: no labeled training nodes")
    return rows


def _refit_last_only(x, y_local, lam: float, blocks: tuple[ClassBlock, ...]) -> RidgeState:
    """Ablation classifier: batch ridge on the newest domain only.

    Targets are zero-padded into the full class space so the state keeps
    every registered block, but the fit sees no earlier data.
    """
    total = sum(b.width for b in blocks)
    y = np.zeros((y_local.shape[0], total), dtype=np.float64)
    offset = total - y_local.shape[1]
    y[:, offset:] = y_local
    w = ridge_solve_batch(x, y, lam)
    h = x.shape[1]
    m = spd_solve(x.T @ x + lam * np.eye(h), np.eye(h))
    m = (m + m.T) / 2.0
    w = np.ascontiguousarray(w)
    w.flags.writeable = False
    m.flags.writeable = False
    return RidgeState(w=w, m=m, lam=float(lam), blocks=blocks)


def _finetune_backbone(
    task: DomainTask,
    params: BackboneParams,
    prototypes: PrototypeSet,
    cfg: AdapterTrainConfig,
) -> np.ndarray:
    """Ablation trainer: update the shared backbone itself (no adapter)."""
    from .graphs import augment  # local import mirrors train_adapter's usage

    g = task.graph
    rows = _train_labeled_rows(task)
    labels = g.labels[rows]
    ahat = normalized_adjacency(g)
    epoch_seeds = rng(cfg.seed, f"finetune-domain-{task.domain_id}")
    opt = Adam({"w1": params.w1, "w2": params.w2}, lr=cfg.lr, weight_decay=cfg.weight_decay)

    losses = []
    for _ in range(cfg.epochs):
        aug = augment(g, cfg.mask_rate, cfg.drop_rate, seed=int(epoch_seeds.integers(2**63)))
        ahat_aug = normalized_adjacency(aug)
        x, tape = forward(ahat, g.features, params)
        x_aug, tape_aug = forward(ahat_aug, aug.features, params)
        report = total_loss(
            x[rows], x_aug[rows], labels, prototypes, cfg.gamma1, cfg.gamma2, cfg.epsilon
        )
        losses.append(report.total)
        d_x = np.zeros_like(x)
        d_x[rows] = report.grad_x
        d_x_aug = np.zeros_like(x_aug)
        d_x_aug[rows] = report.grad_x_aug
        g1, _ = backward(tape, d_x)
        g2, _ = backward(tape_aug, d_x_aug)
        opt.step({"w1": g1.w1 + g2.w1, "w2": g1.w2 + g2.w2})
    return np.asarray(losses)


def _discriminate_graph(art: RunArtifacts, graph: Graph) -> tuple[int, dict[int, float]]:
    """Match a graph to its domain through per-candidate alignment.

    Each registered domain aligns the raw features with its own stored
    aligner before projection, so domains with different raw widths can
    coexist; candidates whose aligner expects a different width are
    skipped.
    """
    scores: dict[int, float] = {}
    chosen = None
    best = np.inf
    for k in range(art.num_domains):
        aligner = art.aligners[k]
        if aligner.in_dim != graph.feature_dim:
            continue
        fhat = random_projection(_aligned(graph, aligner), art.projection)
        proto = domain_prototype(fhat)
        d2 = float(np.sum((proto - art.domain_protos[k].vector) ** 2))
        scores[k] = d2
        if d2 < best:
            best = d2
            chosen = k
    if chosen is None:
        raise DataError(
            f"no registered domain accepts feature width {graph.feature_dim}; "
            f"known widths: {sorted({a.in_dim for a in art.aligners})}"
        )
    return chosen, scores


def embed(art: RunArtifacts, graph: Graph, domain_id: int) -> np.ndarray:
    """Embed a graph under one domain's aligner and frozen adapter.

    The single embedding path shared by training-time bookkeeping and
    inference, so recomputed embeddings are bit-identical to stored ones.
    """
    aligner = art.aligners[domain_id]
    if aligner.in_dim != graph.feature_dim:
        raise DataError(
            f"domain {domain_id} expects feature width {aligner.in_dim}, got {graph.feature_dim}"
        )
    feats = aligner.apply(graph.features)
    ahat = normalized_adjacency(graph)
    adapter = art.adapters.get(domain_id) if domain_id in art.adapters else None
    x, _ = forward(ahat, feats, art.backbone, adapter)
    return x


def _infer_artifacts(art: RunArtifacts, graph: Graph, force_domain: int | None = None) -> InferenceResult:
    if graph.num_nodes == 0:
        raise DataError("cannot infer on an empty graph")
    if art.ridge is None:
        raise DataError("artifacts hold no trained classifier")
    if force_domain is not None:
        if not 0 <= force_domain < art.num_domains:
            raise ValueError(f"forced domain {force_domain} is not registered")
        chosen, scores = int(force_domain), {}
    else:
        chosen, scores = _discriminate_graph(art, graph)
    x = embed(art, graph, chosen)
    probs, classes = predict(art.ridge, x)
    return InferenceResult(domain_id=chosen, classes=classes, probs=probs, scores=scores)


def _test_accuracy(graph: Graph, classes: np.ndarray) -> float:
    mask = graph.mask("test") & (graph.labels >= 0)
    if not np.any(mask):
        raise DataError("graph has no labeled test nodes to evaluate")
    return float(np.mean(classes[mask] == graph.labels[mask]))


def run_sequence(config: RunConfig, oracle_domains: bool = False) -> RunReport:
    """Execute the full incremental sequence and persist everything.

    Evaluation after each domain routes through domain discrimination
    unless ``oracle_domains`` is set, in which case the true domain id is
    supplied (ablation aid; reported AA/AF then exclude discrimination
    errors).
    """
    config.validate()
    if not config.out_dir:
        raise ConfigError("out_dir must be set for a sequence run")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    lock = FileLock(out / ".lock")
    try:
        lock.acquire(timeout=0)
    except Timeout as exc:
        raise DataError(f"{out}: run directory is locked by another runner") from exc
    try:
        return _run_locked(config, out, oracle_domains)
    finally:
        lock.release()


def _run_locked(config: RunConfig, out: Path, oracle_domains: bool) -> RunReport:
    t_start = time.perf_counter()
    tasks, dataset_paths = _resolve_tasks(config, out)

    projection = init_projection(config.dbar, config.projection_dim, config.seed)

    aligner0 = fit_aligner(tasks[0].graph.features, config.dbar)
    pre_cfg = PretrainConfig(
        hidden=config.hidden,
        epochs=config.epochs,
        lr=config.lr,
        weight_decay=config.weight_decay,
        seed=config.seed,
    )
    t0 = time.perf_counter()
    backbone, _ = pretrain_link_prediction(_aligned(tasks[0].graph, aligner0), pre_cfg)
    pretrain_seconds = time.perf_counter() - t0

    art = RunArtifacts(
        config=config,
        backbone=backbone,
        projection=projection,
        adapters=AdapterRegistry(),
        dataset_paths=dataset_paths,
    )
    train_cfg = AdapterTrainConfig(
        rank=config.rank,
        epochs=config.epochs,
        lr=config.lr,
        weight_decay=config.weight_decay,
        gamma1=config.gamma1,
        gamma2=config.gamma2,
        epsilon=config.epsilon,
        mask_rate=config.mask_rate,
        drop_rate=config.drop_rate,
        seed=config.seed,
    )

    shared_backbone = backbone.copy_trainable() if config.ablation == "no_peft" else None
    if shared_backbone is not None:
        art.backbone = shared_backbone

    matrix = AccuracyMatrix()
    confusion = [[0] * len(tasks) for _ in tasks]
    per_domain_seconds = []

    for task in tasks:
        t_dom = time.perf_counter()
        try:
            aligner = aligner0 if task.domain_id == 0 else fit_aligner(task.graph.features, config.dbar)
            art.aligners.append(aligner)
            aligned_task = DomainTask(task.domain_id, _aligned(task.graph, aligner), task.class_block)

            if config.ablation == "no_peft":
                _finetune_backbone(aligned_task, shared_backbone, art.prototypes, train_cfg)
            else:
                adapter, _ = train_adapter(aligned_task, art.backbone, art.prototypes, train_cfg)
                art.adapters.add(adapter)

            x = embed(art, task.graph, task.domain_id)
            art.embeddings.append(x)

            rows = _train_labeled_rows(aligned_task)
            start, stop = task.class_block
            y_local = one_hot(aligned_task.graph.labels[rows] - start, stop - start)

            art.prototypes.extend(
                extract_prototypes(
                    x[rows],
                    aligned_task.graph.labels[rows],
                    config.dbscan_eps,
                    config.dbscan_min_pts,
                    domain_id=task.domain_id,
                )
            )

            if config.ablation == "no_kp":
                blocks = (art.ridge.blocks if art.ridge is not None else ()) + (
                    ClassBlock(task.domain_id, start, stop),
                )
                art.ridge = _refit_last_only(x[rows], y_local, config.lam, blocks)
            elif art.ridge is None:
                art.ridge = init_state(x[rows], y_local, config.lam, domain_id=task.domain_id, class_start=start)
            else:
                art.ridge = update_state(art.ridge, x[rows], y_local, domain_id=task.domain_id, class_start=start)

            fhat = random_projection(aligned_task.graph, projection)
            art.domain_protos.append(DomainPrototype(domain_id=task.domain_id, vector=domain_prototype(fhat)))

            row = []
            for past in tasks[: task.domain_id + 1]:
                forced = past.domain_id if oracle_domains else None
                result = _infer_artifacts(art, past.graph, force_domain=forced)
                confusion[past.domain_id][result.domain_id] += 1
                row.append(_test_accuracy(past.graph, result.classes))
            matrix.append_row(row)
        except (ValueError, DataError, ConfigError) as exc:
            raise type(exc)(f"domain {task.domain_id}: {exc}") from exc
        per_domain_seconds.append(time.perf_counter() - t_dom)

    aa, af = metrics(matrix)
    report = RunReport(
        matrix=matrix,
        average_accuracy=aa,
        average_forgetting=af,
        confusion=confusion,
        config=config,
        blocks=art.ridge.blocks,
        oracle_domains=oracle_domains,
        timings={
            "pretrain_seconds": pretrain_seconds,
            "per_domain_seconds": per_domain_seconds,
            "total_seconds": time.perf_counter() - t_start,
        },
    )
    save_checkpoint(art, out / _CHECKPOINT)
    _write_report_files(report, out)
    return report


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _write_report_files(report: RunReport, out: Path) -> None:
    (out / "report.json").write_bytes(_json_bytes(report.to_dict()))
    (out / "timings.json").write_bytes(_json_bytes(report.timings))

    lines = ["after_domain," + ",".join(f"domain_{j}" for j in range(report.matrix.num_domains))]
    for i, row in enumerate(report.matrix.rows):
        cells = [repr(v) for v in row] + [""] * (report.matrix.num_domains - len(row))
        lines.append(f"{i}," + ",".join(cells))
    (out / "matrix.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    from .figures import render_figures  # deferred: pulls in matplotlib

    render_figures(report, out / "figures")


def save_checkpoint(art: RunArtifacts, path) -> None:
    """Persist artifacts; the same artifacts always produce identical bytes."""
    if art.ridge is None:
        raise ValueError("cannot checkpoint an unfinished run (no classifier state)")
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    write_matrix(root / "backbone_w1.gkmx", art.backbone.w1)
    write_matrix(root / "backbone_w2.gkmx", art.backbone.w2)
    for k in art.adapters.ids():
        a = art.adapters.get(k)
        for name, m in (("down0", a.down[0]), ("up0", a.up[0]), ("down1", a.down[1]), ("up1", a.up[1])):
            write_matrix(root / f"adapter_{k}_{name}.gkmx", m)
    for k, aligner in enumerate(art.aligners):
        if aligner.basis is not None:
            write_matrix(root / f"aligner_{k}.gkmx", aligner.basis)
    write_matrix(root / "ridge_w.gkmx", art.ridge.w)
    write_matrix(root / "ridge_m.gkmx", art.ridge.m)
    if len(art.prototypes):
        write_matrix(root / "prototypes.gkmx", art.prototypes.vectors())
    if art.domain_protos:
        write_matrix(root / "domain_protos.gkmx", np.stack([p.vector for p in art.domain_protos]))
    for k, x in enumerate(art.embeddings):
        write_matrix(root / f"embeddings_{k}.gkmx", x)

    manifest = {
        "format_version": MANIFEST_VERSION,
        "config": art.config.to_dict(),
        "projection": {
            "seed": art.projection.seed,
            "in_dim": art.projection.in_dim,
            "out_dim": art.projection.out_dim,
        },
        "lambda": art.ridge.lam,
        "class_blocks": [dataclasses.asdict(b) for b in art.ridge.blocks],
        "aligners": [
            {"in_dim": a.in_dim, "out_dim": a.out_dim, "kind": "pad" if a.basis is None else "svd"}
            for a in art.aligners
        ],
        "adapter_domains": art.adapters.ids(),
        "adapter_rank": art.config.rank,
        "prototype_tags": [
            {"domain_id": p.domain_id, "cluster_id": p.cluster_id} for p in art.prototypes
        ],
        "dataset_paths": art.dataset_paths,
        "num_domains": art.num_domains,
        "ablation": art.config.ablation,
    }
    (root / _MANIFEST).write_bytes(_json_bytes(manifest))


def _manifest_of(path: Path) -> dict:
    manifest_path = path / _MANIFEST
    if not manifest_path.is_file():
        raise DataError(f"{manifest_path}: checkpoint manifest not found")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: invalid JSON ({exc})") from exc
    version = manifest.get("format_version")
    if version != MANIFEST_VERSION:
        raise DataError(f"{manifest_path}: unsupported manifest version {version}, expected {MANIFEST_VERSION}")
    return manifest


def _checkpoint_dir(path) -> Path:
    """Accept either a run directory or its checkpoint subdirectory."""
    root = Path(path)
    if (root / _MANIFEST).is_file():
        return root
    if (root / _CHECKPOINT / _MANIFEST).is_file():
        return root / _CHECKPOINT
    raise DataError(f"{root}: no checkpoint manifest found")


def load_checkpoint(path) -> RunArtifacts:
    """Rebuild run artifacts from disk, bit-exactly."""
    root = _checkpoint_dir(path)
    manifest = _manifest_of(root)

    config = RunConfig(
        **{**manifest["config"], "datasets": tuple(manifest["config"]["datasets"])}
    )
    backbone = BackboneParams(
        w1=read_matrix(root / "backbone_w1.gkmx"),
        w2=read_matrix(root / "backbone_w2.gkmx"),
        frozen=True,
    )
    proj_info = manifest["projection"]
    projection = init_projection(proj_info["in_dim"], proj_info["out_dim"], proj_info["seed"])

    adapters = AdapterRegistry()
    for k in manifest["adapter_domains"]:
        adapter = LoraAdapter(
            domain_id=k,
            rank=manifest["adapter_rank"],
            down=(read_matrix(root / f"adapter_{k}_down0.gkmx"), read_matrix(root / f"adapter_{k}_down1.gkmx")),
            up=(read_matrix(root / f"adapter_{k}_up0.gkmx"), read_matrix(root / f"adapter_{k}_up1.gkmx")),
            frozen=True,
        )
        adapters.add(adapter)

    aligners = []
    for k, info in enumerate(manifest["aligners"]):
        basis = read_matrix(root / f"aligner_{k}.gkmx") if info["kind"] == "svd" else None
        aligners.append(FeatureAligner(in_dim=info["in_dim"], out_dim=info["out_dim"], basis=basis))

    blocks = tuple(ClassBlock(**b) for b in manifest["class_blocks"])
    ridge = RidgeState(
        w=read_matrix(root / "ridge_w.gkmx"),
        m=read_matrix(root / "ridge_m.gkmx"),
        lam=manifest["lambda"],
        blocks=blocks,
    )

    prototypes = PrototypeSet()
    tags = manifest["prototype_tags"]
    if tags:
        vectors = read_matrix(root / "prototypes.gkmx")
        prototypes.extend(
            Prototype(domain_id=t["domain_id"], cluster_id=t["cluster_id"], vector=vectors[i])
            for i, t in enumerate(tags)
        )

    domain_protos = []
    if manifest["num_domains"]:
        vectors = read_matrix(root / "domain_protos.gkmx")
        domain_protos = [DomainPrototype(domain_id=k, vector=vectors[k]) for k in range(manifest["num_domains"])]

    embeddings = [read_matrix(root / f"embeddings_{k}.gkmx") for k in range(manifest["num_domains"])]

    return RunArtifacts(
        config=config,
        backbone=backbone,
        projection=projection,
        adapters=adapters,
        aligners=aligners,
        prototypes=prototypes,
        domain_protos=domain_protos,
        ridge=ridge,
        embeddings=embeddings,
        dataset_paths=list(manifest["dataset_paths"]),
    )


def load_run_tasks(path) -> list[DomainTask]:
    """Reload the run's domain sequence from its recorded dataset paths."""
    root = _checkpoint_dir(path)
    manifest = _manifest_of(root)
    run_dir = root.parent if root.name == _CHECKPOINT else root
    tasks = []
    for i, rel in enumerate(manifest["dataset_paths"]):
        candidate = run_dir / rel
        source = candidate if candidate.is_dir() else Path(rel)
        g = load_dataset(source)
        block = manifest["class_blocks"][i]
        tasks.append(_task_from_local(g, block["domain_id"], block["start"], block["stop"] - block["start"]))
    return tasks


def infer(graph: Graph, artifact_dir, force_domain: int | None = None) -> InferenceResult:
    """Classify one graph of unknown domain against a finished run.

    Discriminates the domain (unless ``force_domain`` is given), embeds
    the graph with that domain's aligner and frozen adapter, and applies
    the ridge classifier.
    """
    art = load_checkpoint(artifact_dir)
    return _infer_artifacts(art, graph, force_domain=force_domain)
