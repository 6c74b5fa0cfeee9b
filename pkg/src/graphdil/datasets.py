"""Dataset directory persistence.

Layout (UTF-8 text, LF line endings):

    meta.json   {"num_nodes": N, "feature_dim": d, "num_classes": C, "name": str}
    nodes.tsv   node_id \\t label-or-"-" \\t split \\t f1 ... \\t fd
    edges.tsv   src \\t dst        (src < dst, sorted)

Node ids are 0-based and dense.  Feature values are written with
shortest round-trip formatting, so save followed by load is bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .graphs import SPLITS, Graph

__all__ = ["dataset_num_classes", "load_dataset", "save_dataset"]

_META = "meta.json"
_NODES = "nodes.tsv"
_EDGES = "edges.tsv"


def save_dataset(g: Graph, path, name: str | None = None) -> None:
    """Write a graph as a dataset directory (created if missing)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    if g.labels is None:
        num_classes = 0
    else:
        present = g.labels[g.labels >= 0]
        num_classes = int(present.max()) + 1 if present.size else 0
    meta = {
        "num_nodes": g.num_nodes,
        "feature_dim": g.feature_dim,
        "num_classes": num_classes,
        "name": name if name is not None else root.name,
    }
    (root / _META).write_text(json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8")

    with open(root / _NODES, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(g.num_nodes):
            label = "-"
            if g.labels is not None and g.labels[i] >= 0:
                label = str(int(g.labels[i]))
            feats = "\t".join(repr(float(v)) for v in g.features[i])
            fh.write(f"{i}\t{label}\t{g.split[i]}\t{feats}\n")

    with open(root / _EDGES, "w", encoding="utf-8", newline="\n") as fh:
        for src, dst in g.edges:
            fh.write(f"{src}\t{dst}\n")


def _require(path: Path) -> Path:
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    return path


def dataset_num_classes(path) -> int:
    """Read the declared class count without loading the whole dataset."""
    meta_path = _require(Path(path) / _META)
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{meta_path}: invalid JSON ({exc})") from exc
    return _meta_int(meta, "num_classes", meta_path)


def _meta_int(meta: dict, key: str, path: Path) -> int:
    if key not in meta:
        raise DataError(f"{path}: missing key {key!r}")
    value = meta[key]
    if not isinstance(value, int) or value < 0:
        raise DataError(f"{path}: key {key!r} must be a nonnegative integer, got {value!r}")
    return value


def load_dataset(path) -> Graph:
    """Load a dataset directory, validating it against its meta file.

    Parse failures raise :class:`DataError` naming the offending file and
    line.
    """
    root = Path(path)
    if not root.is_dir():
        raise DataError(f"{root}: dataset directory not found")

    meta_path = _require(root / _META)
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{meta_path}: invalid JSON ({exc})") from exc
    num_nodes = _meta_int(meta, "num_nodes", meta_path)
    feature_dim = _meta_int(meta, "feature_dim", meta_path)
    num_classes = _meta_int(meta, "num_classes", meta_path)

    nodes_path = _require(root / _NODES)
    features = np.zeros((num_nodes, feature_dim), dtype=np.float64)
    labels = np.full(num_nodes, -1, dtype=np.int64)
    split = np.full(num_nodes, "train", dtype="<U5")
    with open(nodes_path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if len(lines) != num_nodes:
        raise DataError(f"{nodes_path}: expected {num_nodes} rows, found {len(lines)}")
    for lineno, line in enumerate(lines, start=1):
        parts = line.split("\t")
        if len(parts) != 3 + feature_dim:
            raise DataError(
                f"{nodes_path}:{lineno}: expected {3 + feature_dim} fields, found {len(parts)}"
            )
        i = lineno - 1
        if parts[0] != str(i):
            raise DataError(f"{nodes_path}:{lineno}: node ids must be dense, expected {i}, got {parts[0]!r}")
        if parts[1] != "-":
            try:
                label = int(parts[1])
            except ValueError as exc:
                raise DataError(f"{nodes_path}:{lineno}: bad label {parts[1]!r}") from exc
            if not 0 <= label < num_classes:
                raise DataError(
                    f"{nodes_path}:{lineno}: label {label} outside declared range [0, {num_classes})"
                )
            labels[i] = label
        if parts[2] not in SPLITS:
            raise DataError(f"{nodes_path}:{lineno}: bad split tag {parts[2]!r}")
        split[i] = parts[2]
        try:
            features[i] = [float(v) for v in parts[3:]]
        except ValueError as exc:
            raise DataError(f"{nodes_path}:{lineno}: bad feature value ({exc})") from exc

    edges_path = _require(root / _EDGES)
    with open(edges_path, encoding="utf-8") as fh:
        edge_lines = fh.read().splitlines()
    edges = np.zeros((len(edge_lines), 2), dtype=np.int64)
    for lineno, line in enumerate(edge_lines, start=1):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{edges_path}:{lineno}: expected 2 fields, found {len(parts)}")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise DataError(f"{edges_path}:{lineno}: bad edge endpoints ({exc})") from exc
        if not 0 <= src < num_nodes or not 0 <= dst < num_nodes:
            raise DataError(
                f"{edges_path}:{lineno}: edge ({src}, {dst}) references a node outside "
                f"[0, {num_nodes})"
            )
        if src >= dst:
            raise DataError(f"{edges_path}:{lineno}: edges must satisfy src < dst, got ({src}, {dst})")
        edges[lineno - 1] = (src, dst)

    has_labels = bool(np.any(labels >= 0))
    return Graph(num_nodes, edges, features, labels if has_labels else None, split)
