"""Contextual sentence encoders.

Two interchangeable implementations sit behind the same `encode` contract:
`TinyEncoder`, a small trainable bidirectional transformer used for tests and
desk-scale runs, and `HFEncoder`, an adapter over a Hugging Face model for
full-scale training with a pretrained backbone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import torch
from torch import nn

from .attention import MultiHeadAttention
from .augment import AugmentedGroup


@dataclass
class ContextualRepr:
    values: torch.Tensor  # (G, l, d)

    @property
    def cls(self) -> torch.Tensor:
        return self.values[:, 0, :]

    @property
    def hidden_size(self) -> int:
        return self.values.shape[-1]


@runtime_checkable
class Encoder(Protocol):
    hidden_size: int

    def encode(self, group: AugmentedGroup) -> ContextualRepr: ...


class _EncoderBlock(nn.Module):
    def __init__(self, hidden: int, heads: int, dropout: float = 0.0):
        super().__init__()
        self.attn = MultiHeadAttention(hidden, heads)
        self.ln1 = nn.LayerNorm(hidden)
        self.ff = nn.Sequential(
            nn.Linear(hidden, 4 * hidden),
            nn.GELU(),
            nn.Linear(4 * hidden, hidden),
        )
        self.ln2 = nn.LayerNorm(hidden)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x, key_mask, return_weights=False):
        if return_weights:
            attn_out, weights = self.attn(x, x, key_mask, return_weights=True)
        else:
            attn_out = self.attn(x, x, key_mask)
            weights = None
        x = self.ln1(x + self.dropout(attn_out))
        x = self.ln2(x + self.dropout(self.ff(x)))
        return (x, weights) if return_weights else x


class TinyEncoder(nn.Module):
    """Small bidirectional transformer with learned positional and segment
    embeddings. Big enough to memorize toy corpora, small enough for
    finite-difference gradient checks in float64."""

    def __init__(
        self,
        vocab_size: int,
        hidden: int = 16,
        layers: int = 2,
        heads: int = 2,
        max_len: int = 100,
        dropout: float = 0.0,
    ):
        super().__init__()
        self.vocab_size = vocab_size
        self.hidden_size = hidden
        self.max_len = max_len
        self.token_emb = nn.Embedding(vocab_size, hidden)
        self.pos_emb = nn.Embedding(max_len, hidden)
        self.seg_emb = nn.Embedding(2, hidden)
        self.ln_in = nn.LayerNorm(hidden)
        self.emb_dropout = nn.Dropout(dropout)
        self.blocks = nn.ModuleList(
            _EncoderBlock(hidden, heads, dropout) for _ in range(layers)
        )
        nn.init.normal_(self.token_emb.weight, std=0.02)
        nn.init.normal_(self.pos_emb.weight, std=0.02)
        nn.init.normal_(self.seg_emb.weight, std=0.02)

    def forward(
        self,
        token_ids: torch.Tensor,
        segment_ids: torch.Tensor,
        attention_mask: torch.Tensor,
        return_attention: bool = False,
    ):
        if int(token_ids.max()) >= self.vocab_size or int(token_ids.min()) < 0:
            raise ValueError(
                f"token id out of vocabulary (vocab_size={self.vocab_size})"
            )
        if token_ids.shape[1] > self.max_len:
            raise ValueError(f"sequence length {token_ids.shape[1]} exceeds max_len={self.max_len}")
        positions = torch.arange(token_ids.shape[1], device=token_ids.device)
        x = self.token_emb(token_ids) + self.pos_emb(positions)[None] + self.seg_emb(segment_ids)
        x = self.emb_dropout(self.ln_in(x))
        key_mask = attention_mask.bool()
        attentions = []
        for block in self.blocks:
            if return_attention:
                x, weights = block(x, key_mask, return_weights=True)
                attentions.append(weights)
            else:
                x = block(x, key_mask)
        if return_attention:
            return x, attentions
        return x

    def encode(self, group: AugmentedGroup) -> ContextualRepr:
        values = self.forward(group.token_ids, group.segment_ids, group.attention_mask)
        return ContextualRepr(values=values)


class HFEncoder(nn.Module):
    """Adapter over a Hugging Face bidirectional transformer.

    The pretrained word-embedding table is frozen by default; everything else
    stays trainable.
    """

    def __init__(self, model, freeze_word_embeddings: bool = True):
        super().__init__()
        self.model = model
        self.hidden_size = model.config.hidden_size
        self.vocab_size = model.config.vocab_size
        if freeze_word_embeddings:
            self.model.get_input_embeddings().weight.requires_grad_(False)

    @classmethod
    def from_pretrained(cls, name_or_path: str, freeze_word_embeddings: bool = True) -> "HFEncoder":
        from transformers import AutoModel

        return cls(AutoModel.from_pretrained(name_or_path), freeze_word_embeddings)

    @classmethod
    def from_config(cls, config_kwargs: dict, freeze_word_embeddings: bool = False) -> "HFEncoder":
        """Randomly initialized backbone from a config; used in tests where
        downloading weights is not an option."""
        from transformers import BertConfig, BertModel

        return cls(BertModel(BertConfig(**config_kwargs)), freeze_word_embeddings)

    def forward(self, token_ids, segment_ids, attention_mask):
        if int(token_ids.max()) >= self.vocab_size or int(token_ids.min()) < 0:
            raise ValueError(f"token id out of vocabulary (vocab_size={self.vocab_size})")
        out = self.model(
            input_ids=token_ids,
            attention_mask=attention_mask,
            token_type_ids=segment_ids,
        )
        return out.last_hidden_state

    def encode(self, group: AugmentedGroup) -> ContextualRepr:
        values = self.forward(group.token_ids, group.segment_ids, group.attention_mask)
        return ContextualRepr(values=values)
