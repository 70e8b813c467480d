"""Model assembly and checkpoint IO.

`TripletExtractor` wires an encoder, the selection head, and the boundary
decoder together. Checkpoints are directories holding the weights, the model
and run configuration, the build seed, and the best validation record.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .augment import AugmentedGroup
from .decoder import BoundaryDecoder
from .encoder import ContextualRepr, HFEncoder, TinyEncoder
from .errors import ConfigError
from .selector import RelationDecision, SelectionHead, filter_rows
from .tokenization import HashTokenizer, HFTokenizer, WordTokenizer

WEIGHTS_FILE = "weights.pt"
CONFIG_FILE = "config.json"
BEST_FILE = "best.json"


@dataclass
class ModelConfig:
    encoder: str = "tiny"            # "tiny" or "hf"
    hidden: int = 16
    layers: int = 2
    heads: int = 2
    vocab_size: int = 32768
    piece_chars: int = 5
    max_sequence_length: int = 100
    max_triplets: int = 4
    decoder_heads: int = 2
    dropout: float = 0.0
    hf_model: str = "bert-base-uncased"
    freeze_word_embeddings: bool = True
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
        return cls(**payload)


class TripletExtractor(nn.Module):
    def __init__(self, encoder: nn.Module, selector: SelectionHead, decoder: BoundaryDecoder):
        super().__init__()
        self.encoder = encoder
        self.selector = selector
        self.decoder = decoder

    def encode(self, group: AugmentedGroup) -> ContextualRepr:
        return self.encoder.encode(group)

    def select(self, rep: ContextualRepr) -> torch.Tensor:
        return self.selector(rep.cls)

    def decode_kept(
        self,
        group: AugmentedGroup,
        rep: ContextualRepr,
        decision: RelationDecision,
        return_attention: bool = False,
    ):
        filtered, kept = filter_rows(rep.values, decision.mask)
        assert kept == decision.kept_indices
        attn_mask = group.attention_mask[kept].bool()
        pos_mask = group.boundary_position_mask()[None].expand(len(kept), -1)
        return self.decoder.decode(filtered, attn_mask, pos_mask, return_attention)

    @torch.no_grad()
    def infer_group(
        self, group: AugmentedGroup, relation_threshold: float, return_attention: bool = False
    ):
        was_training = self.training
        self.eval()
        try:
            rep = self.encode(group)
            probs = self.select(rep)
            decision = RelationDecision.from_probs(probs, "infer", threshold=relation_threshold)
            if return_attention:
                boundaries, attention = self.decode_kept(group, rep, decision, return_attention=True)
                return decision, boundaries, attention
            boundaries = self.decode_kept(group, rep, decision)
        finally:
            if was_training:
                self.train()
        return decision, boundaries


def build_tokenizer(config: ModelConfig) -> WordTokenizer:
    if config.encoder == "tiny":
        return HashTokenizer(vocab_size=config.vocab_size, piece_chars=config.piece_chars)
    if config.encoder == "hf":
        return HFTokenizer.from_pretrained(config.hf_model)
    raise ConfigError(f"unknown encoder kind: {config.encoder!r}")


def build_model(config: ModelConfig) -> TripletExtractor:
    """Construct the model with all trainable parameters drawn from the
    configured seed, so a build is replayable from its checkpoint config."""
    torch.manual_seed(config.seed)
    if config.encoder == "tiny":
        encoder = TinyEncoder(
            vocab_size=config.vocab_size,
            hidden=config.hidden,
            layers=config.layers,
            heads=config.heads,
            max_len=config.max_sequence_length,
            dropout=config.dropout,
        )
        hidden = config.hidden
    elif config.encoder == "hf":
        encoder = HFEncoder.from_pretrained(
            config.hf_model, freeze_word_embeddings=config.freeze_word_embeddings
        )
        hidden = encoder.hidden_size
    else:
        raise ConfigError(f"unknown encoder kind: {config.encoder!r}")
    selector = SelectionHead(hidden)
    decoder = BoundaryDecoder(hidden, queries=config.max_triplets, heads=config.decoder_heads)
    return TripletExtractor(encoder, selector, decoder)


def save_checkpoint(
    directory: str | Path,
    model: TripletExtractor,
    model_config: ModelConfig,
    run_config: dict | None = None,
    best: dict | None = None,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), directory / WEIGHTS_FILE)
    payload = {"model": model_config.to_dict(), "run": run_config or {}, "seed": model_config.seed}
    (directory / CONFIG_FILE).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    if best is not None:
        (directory / BEST_FILE).write_text(json.dumps(best, indent=2, sort_keys=True) + "\n")
    return directory


def load_checkpoint(directory: str | Path) -> tuple[TripletExtractor, ModelConfig, dict]:
    """Load (model, model config, extras) from a checkpoint directory.

    Extras carry the stored run config and, when present, the best-score
    record.
    """
    directory = Path(directory)
    config_path = directory / CONFIG_FILE
    weights_path = directory / WEIGHTS_FILE
    if not config_path.exists() or not weights_path.exists():
        raise FileNotFoundError(f"checkpoint directory {directory} is missing {CONFIG_FILE} or {WEIGHTS_FILE}")
    payload = json.loads(config_path.read_text())
    model_config = ModelConfig.from_dict(payload["model"])
    model = build_model(model_config)
    state = torch.load(weights_path, map_location="cpu", weights_only=True)
    try:
        model.load_state_dict(state)
    except RuntimeError as exc:
        raise ConfigError(f"checkpoint weights do not match the stored config: {exc}") from exc
    model.eval()
    extras = {"run": payload.get("run", {}), "seed": payload.get("seed")}
    best_path = directory / BEST_FILE
    if best_path.exists():
        extras["best"] = json.loads(best_path.read_text())
    return model, model_config, extras
