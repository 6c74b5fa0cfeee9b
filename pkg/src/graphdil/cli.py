"""Command-line interface.

Subcommands: pretrain, run, eval, discriminate, export-embeddings,
report.  Exit codes: 0 success, 2 config error, 3 data error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import ConfigError, DataError, GraphDilError, NumericalError
from .datasets import load_dataset

__all__ = ["build_parser", "main"]


def _cmd_pretrain(args) -> int:
    from .container import write_matrix
    from .harness import _resolve_tasks, _aligned, _json_bytes
    from .backbone import PretrainConfig, pretrain_link_prediction
    from .graphs import fit_aligner

    config = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tasks, _ = _resolve_tasks(config, out)
    aligner = fit_aligner(tasks[0].graph.features, config.dbar)
    cfg = PretrainConfig(
        hidden=config.hidden,
        epochs=config.epochs,
        lr=config.lr,
        weight_decay=config.weight_decay,
        seed=config.seed,
    )
    params, losses = pretrain_link_prediction(_aligned(tasks[0].graph, aligner), cfg)
    write_matrix(out / "backbone_w1.gkmx", params.w1)
    write_matrix(out / "backbone_w2.gkmx", params.w2)
    if aligner.basis is not None:
        write_matrix(out / "aligner_0.gkmx", aligner.basis)
    summary = {
        "epochs": config.epochs,
        "first_loss": float(losses[0]) if losses.size else None,
        "final_loss": float(losses[-1]) if losses.size else None,
        "hidden": config.hidden,
        "dbar": config.dbar,
        "seed": config.seed,
    }
    (out / "pretrain.json").write_bytes(_json_bytes(summary))
    if losses.size:
        print(f"pretraining loss: {losses[0]:.6f} -> {losses[-1]:.6f} over {losses.size} epochs")
    print(f"backbone written to {out}")
    return 0


def _cmd_run(args) -> int:
    import dataclasses

    from .harness import run_sequence

    config = load_config(args.config)
    if args.out:
        config = dataclasses.replace(config, out_dir=args.out)
    report = run_sequence(config, oracle_domains=args.oracle_domains)
    print(f"domains: {report.matrix.num_domains}")
    print(f"average accuracy:   {report.average_accuracy:.4f}")
    print(f"average forgetting: {report.average_forgetting:+.4f}")
    print(f"artifacts and report in {config.out_dir}")
    return 0


def _cmd_eval(args) -> int:
    from .harness import infer, load_checkpoint, _infer_artifacts

    art = load_checkpoint(args.artifacts)
    g = load_dataset(args.dataset)
    result = _infer_artifacts(art, g, force_domain=args.force_domain)
    block = next(b for b in art.ridge.blocks if b.domain_id == result.domain_id)
    print(f"discriminated domain: {result.domain_id}")
    if g.labels is not None:
        global_labels = np.where(g.labels >= 0, g.labels + block.start, -1)
        for tag in ("train", "val", "test"):
            mask = g.mask(tag) & (global_labels >= 0)
            if np.any(mask):
                acc = float(np.mean(result.classes[mask] == global_labels[mask]))
                print(f"accuracy[{tag}]: {acc:.4f} ({int(mask.sum())} nodes)")
    return 0


def _cmd_discriminate(args) -> int:
    from .harness import load_checkpoint, _discriminate_graph

    art = load_checkpoint(args.artifacts)
    g = load_dataset(args.dataset)
    chosen, scores = _discriminate_graph(art, g)
    for k in sorted(scores):
        marker = " <- chosen" if k == chosen else ""
        print(f"domain {k}: squared distance {scores[k]:.6e}{marker}")
    print(f"discriminated domain: {chosen}")
    return 0


def _cmd_export_embeddings(args) -> int:
    from .harness import load_checkpoint, load_run_tasks

    art = load_checkpoint(args.artifacts)
    k = args.domain
    if not 0 <= k < art.num_domains:
        raise DataError(f"domain {k} not in this run (0..{art.num_domains - 1})")
    tasks = load_run_tasks(args.artifacts)
    g = tasks[k].graph
    x = art.embeddings[k]
    out = Path(args.out)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        dims = ",".join(f"e{j}" for j in range(x.shape[1]))
        fh.write(f"node_id,label,split,{dims}\n")
        for i in range(g.num_nodes):
            label = int(g.labels[i]) if g.labels is not None else -1
            values = ",".join(repr(float(v)) for v in x[i])
            fh.write(f"{i},{label},{g.split[i]},{values}\n")
    print(f"wrote {g.num_nodes} embeddings of domain {k} to {out}")
    return 0


def _cmd_report(args) -> int:
    from .harness import AccuracyMatrix, RunReport, _checkpoint_dir
    from .config import RunConfig
    from .ridge import ClassBlock

    run_dir = _checkpoint_dir(args.artifacts)
    run_dir = run_dir.parent if run_dir.name == "checkpoint" else run_dir
    report_path = run_dir / "report.json"
    if not report_path.is_file():
        raise DataError(f"{report_path}: report not found")
    data = json.loads(report_path.read_text(encoding="utf-8"))

    print(f"average accuracy:   {data['average_accuracy']:.4f}")
    print(f"average forgetting: {data['average_forgetting']:+.4f}")
    print("accuracy matrix (rows: after learning domain i):")
    for i, row in enumerate(data["accuracy_matrix"]):
        cells = "  ".join(f"{v:.3f}" for v in row)
        print(f"  after {i}: {cells}")
    confusion = data["domain_confusion"]
    total = sum(sum(r) for r in confusion)
    correct = sum(confusion[i][i] for i in range(len(confusion)))
    if total:
        print(f"domain discrimination accuracy: {correct / total:.4f} ({correct}/{total})")

    report = RunReport(
        matrix=AccuracyMatrix(data["accuracy_matrix"]),
        average_accuracy=data["average_accuracy"],
        average_forgetting=data["average_forgetting"],
        confusion=confusion,
        config=RunConfig(**{**data["config"], "datasets": tuple(data["config"]["datasets"])}),
        blocks=tuple(ClassBlock(**b) for b in data["class_blocks"]),
        oracle_domains=data["oracle_domains"],
        timings={},
    )
    from .figures import render_figures

    paths = render_figures(report, run_dir / "figures")
    print("figures: " + ", ".join(str(p) for p in paths))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphdil",
        description="Domain-incremental graph learning runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pretrain", help="pretrain the backbone on the first domain")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_pretrain)

    p = sub.add_parser("run", help="run the full incremental sequence")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="")
    p.add_argument("--oracle-domains", action="store_true",
                   help="evaluate with true domain ids instead of discrimination")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("eval", help="evaluate a dataset against a finished run")
    p.add_argument("--artifacts", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--force-domain", type=int, default=None,
                   help="bypass discrimination with a fixed domain id")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("discriminate", help="report per-domain prototype distances")
    p.add_argument("--artifacts", required=True)
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=_cmd_discriminate)

    p = sub.add_parser("export-embeddings", help="dump one domain's embeddings as CSV")
    p.add_argument("--artifacts", required=True)
    p.add_argument("--domain", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export_embeddings)

    p = sub.add_parser("report", help="print AA/AF and the matrix, refresh figures")
    p.add_argument("--artifacts", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return NumericalError.exit_code
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DataError.exit_code
    except GraphDilError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return GraphDilError.exit_code
    except ValueError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
