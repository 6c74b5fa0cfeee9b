"""Run configuration: fields, validation, and the flat key-value format.

Config files are plain text, one ``key = value`` per line, ``#`` starts
a comment.  Keys map one-to-one onto :class:`RunConfig` fields (the file
key for ``lam`` is ``lambda``); unknown keys are an error.  A run uses
either a comma-separated ``datasets`` list or the ``synth_*`` generator
block, never both.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

__all__ = ["RunConfig", "load_config", "parse_config"]

ABLATIONS = ("none", "no_kp", "no_peft")


@dataclass(frozen=True)
class RunConfig:
    """Everything a sequence run depends on, seed included."""

    dbar: int = 64  # unified feature width after alignment
    hidden: int = 64
    rank: int = 16
    gamma1: float = 1.0
    gamma2: float = 0.1
    epsilon: float = 1e-8
    lam: float = 1.0
    epochs: int = 200
    lr: float = 5e-2
    weight_decay: float = 5e-4
    mask_rate: float = 0.1
    drop_rate: float = 0.1
    dbscan_eps: float | None = None  # None = auto (median 4-NN distance)
    dbscan_min_pts: int = 4
    projection_dim: int = 2048
    seed: int = 0
    datasets: tuple[str, ...] = ()
    synth_domains: int = 0
    synth_classes_per_domain: int = 3
    synth_nodes_per_class: int = 60
    synth_p_in: float = 0.2
    synth_p_out: float = 0.02
    synth_feature_dim: int = 96
    synth_mean_separation: float = 5.0
    out_dir: str = ""
    ablation: str = "none"

    def validate(self) -> "RunConfig":
        for name in ("dbar", "hidden", "rank", "dbscan_min_pts", "projection_dim"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("gamma1", "gamma2"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("mask_rate", "drop_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {getattr(self, name)}")
        if not self.lam > 0:
            raise ConfigError(f"lambda must be positive, got {self.lam}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if self.dbscan_eps is not None and not self.dbscan_eps > 0:
            raise ConfigError(f"dbscan_eps must be positive or auto, got {self.dbscan_eps}")
        if self.ablation not in ABLATIONS:
            raise ConfigError(f"ablation must be one of {ABLATIONS}, got {self.ablation!r}")
        has_datasets = len(self.datasets) > 0
        has_synth = self.synth_domains > 0
        if has_datasets == has_synth:
            raise ConfigError("configure exactly one of: datasets, synth_domains >= 1")
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["datasets"] = list(self.datasets)
        return d


_KEY_TO_FIELD = {f.name: f.name for f in dataclasses.fields(RunConfig)}
_KEY_TO_FIELD["lambda"] = "lam"
del _KEY_TO_FIELD["lam"]

_INT_FIELDS = {
    "dbar",
    "hidden",
    "rank",
    "epochs",
    "dbscan_min_pts",
    "projection_dim",
    "seed",
    "synth_domains",
    "synth_classes_per_domain",
    "synth_nodes_per_class",
    "synth_feature_dim",
}
_FLOAT_FIELDS = {
    "gamma1",
    "gamma2",
    "epsilon",
    "lam",
    "lr",
    "weight_decay",
    "mask_rate",
    "drop_rate",
    "synth_p_in",
    "synth_p_out",
    "synth_mean_separation",
}


def _convert(key: str, field: str, raw: str):
    try:
        if field in _INT_FIELDS:
            return int(raw)
        if field in _FLOAT_FIELDS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: cannot parse {raw!r} ({exc})") from exc
    if field == "dbscan_eps":
        if raw.lower() == "auto":
            return None
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"key {key!r}: expected a number or 'auto', got {raw!r}") from exc
    if field == "datasets":
        return tuple(p.strip() for p in raw.split(",") if p.strip())
    return raw  # out_dir, ablation


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _KEY_TO_FIELD:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        field = _KEY_TO_FIELD[key]
        if field in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[field] = _convert(key, field, raw)
    return RunConfig(**values).validate()


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: config file not found")
    return parse_config(path.read_text(encoding="utf-8"), source=str(path))
