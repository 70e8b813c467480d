"""Run configuration: every training/inference hyperparameter plus paths.

Config files are flat `key = value` text; CLI `--set key=value` flags
override file values. The shipped defaults mirror the reference full-scale
setup. Note that loss_weight=1.0 trains only the relation-selection
objective; runs that must learn entity boundaries should set e.g. 0.5.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


@dataclass
class RunConfig:
    # paths
    corpus: str = ""
    splits_dir: str = "splits"
    checkpoint_dir: str = "checkpoints/run"
    # training
    batch_size: int = 16
    max_epochs: int = 10
    learning_rate: float = 5e-5
    weight_decay: float = 0.01
    early_stopping_patience: int = 4
    warmup_ratio: float = 0.2
    loss_weight: float = 1.0
    seed: int = 0
    device: str = "cpu"
    # model / decoding
    max_span_length: int = 15
    max_sequence_length: int = 100
    relation_threshold: float = 0.5
    boundary_threshold: float = 0.4
    group_size: int = 5
    max_triplets: int = 4
    # encoder
    encoder: str = "tiny"
    dropout: float = 0.0
    hidden: int = 16
    layers: int = 2
    heads: int = 2
    decoder_heads: int = 2
    vocab_size: int = 32768
    piece_chars: int = 5
    hf_model: str = "bert-base-uncased"
    freeze_word_embeddings: bool = True
    # splitting
    m: int = 5
    n_folds: int = 5
    fold_seeds: str = "0,1,2,3,4"

    def validate(self) -> "RunConfig":
        for name in ("relation_threshold", "boundary_threshold", "warmup_ratio", "loss_weight", "dropout"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        for name in (
            "batch_size", "max_epochs", "early_stopping_patience", "max_span_length",
            "max_sequence_length", "group_size", "max_triplets", "hidden", "layers",
            "heads", "decoder_heads", "vocab_size", "m", "n_folds",
        ):
            value = getattr(self, name)
            if value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ConfigError(f"weight_decay must be non-negative, got {self.weight_decay}")
        if self.encoder not in ("tiny", "hf"):
            raise ConfigError(f"encoder must be 'tiny' or 'hf', got {self.encoder!r}")
        if len(self.seeds_list()) != self.n_folds:
            raise ConfigError(
                f"fold_seeds lists {len(self.seeds_list())} seeds but n_folds={self.n_folds}"
            )
        return self

    def seeds_list(self) -> list[int]:
        return [int(s) for s in str(self.fold_seeds).split(",") if s.strip() != ""]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    if name not in _FIELDS:
        raise ConfigError(f"unknown config key: {name!r}")
    kind = _FIELDS[name]
    raw = raw.strip()
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    if kind == "bool":
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{name} expects a boolean, got {raw!r}")
    return raw


def read_config_file(path: str | Path) -> dict:
    """Parse a flat key = value config file; '#' starts a comment."""
    values: dict = {}
    for line_number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{line_number}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    return values


def load_run_config(
    path: str | Path | None = None, overrides: dict | None = None
) -> RunConfig:
    """Defaults, then file values, then overrides; validated."""
    values: dict = {}
    if path is not None:
        values.update(read_config_file(path))
    for key, raw in (overrides or {}).items():
        values[key] = _coerce(key, str(raw))
    return RunConfig(**values).validate()


def merge_config(base: dict, overrides: dict | None = None) -> RunConfig:
    """Rebuild a config from a stored dict (e.g. a checkpoint's run record)
    plus string-valued overrides."""
    values = dict(base)
    for key, raw in (overrides or {}).items():
        values[key] = _coerce(key, str(raw))
    unknown = set(values) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**values).validate()


def write_config_file(config: RunConfig, path: str | Path) -> None:
    lines = [f"{name} = {value}" for name, value in config.to_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n")
