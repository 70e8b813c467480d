"""Entity boundary decoding over the filtered relation rows.

A bank of learned query embeddings passes through one self-attention layer,
then cross-attends to each surviving relation's sequence states. Four heads
score every sequence position and produce softmax distributions for head
start/end and tail start/end. Distributions are restricted to the sentence
subtokens plus position 0, which doubles as the no-span sentinel for queries
with nothing to predict.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .attention import MultiHeadAttention

HEAD_START, HEAD_END, TAIL_START, TAIL_END = range(4)
BOUNDARY_NAMES = ("head_start", "head_end", "tail_start", "tail_end")
NULL_POSITION = 0


@dataclass
class BoundarySet:
    """Per kept relation row, per query: four position distributions.

    probs has shape (rows, queries, 4, sequence_length); each length-l slice
    sums to 1 and is zero outside the allowed positions.
    """

    probs: torch.Tensor

    @property
    def rows(self) -> int:
        return self.probs.shape[0]

    @property
    def queries(self) -> int:
        return self.probs.shape[1] if self.probs.ndim == 4 else 0


class _BoundaryHead(nn.Module):
    """Scores every position from the query state and the position state:
    softmax over FFN(GELU(h W_q + H W_s))."""

    def __init__(self, hidden: int):
        super().__init__()
        self.query_proj = nn.Linear(hidden, hidden)
        self.state_proj = nn.Linear(hidden, hidden)
        self.ffn = nn.Linear(hidden, 1)

    def forward(self, queries: torch.Tensor, states: torch.Tensor, position_mask: torch.Tensor):
        # queries (R, N, d), states (R, l, d), position_mask (R, l) bool
        mixed = self.query_proj(queries)[:, :, None, :] + self.state_proj(states)[:, None, :, :]
        logits = self.ffn(torch.nn.functional.gelu(mixed)).squeeze(-1)  # (R, N, l)
        logits = logits.masked_fill(~position_mask[:, None, :], float("-inf"))
        return torch.softmax(logits, dim=-1)


class BoundaryDecoder(nn.Module):
    def __init__(self, hidden: int, queries: int, heads: int = 2):
        super().__init__()
        self.hidden = hidden
        self.num_queries = queries
        self.query_emb = nn.Parameter(torch.empty(queries, hidden))
        nn.init.normal_(self.query_emb, std=0.02)
        self.self_attn = MultiHeadAttention(hidden, heads)
        self.ln_self = nn.LayerNorm(hidden)
        self.cross_attn = MultiHeadAttention(hidden, heads)
        self.ln_cross = nn.LayerNorm(hidden)
        self.boundary_heads = nn.ModuleList(_BoundaryHead(hidden) for _ in range(4))

    def decode(
        self,
        filtered: torch.Tensor,        # (R, l, d) kept relation rows
        attention_mask: torch.Tensor,  # (R, l) bool/long, real tokens
        position_mask: torch.Tensor,   # (R, l) bool, allowed boundary positions
        return_attention: bool = False,
    ):
        if filtered.shape[0] == 0:
            empty = filtered.new_zeros((0, self.num_queries, 4, filtered.shape[1]))
            return (BoundarySet(empty), {}) if return_attention else BoundarySet(empty)
        r = filtered.shape[0]
        q = self.query_emb[None].expand(r, -1, -1)
        if return_attention:
            self_out, self_w = self.self_attn(q, q, return_weights=True)
        else:
            self_out = self.self_attn(q, q)
        q = self.ln_self(q + self_out)
        key_mask = attention_mask.bool()
        if return_attention:
            cross_out, cross_w = self.cross_attn(q, filtered, key_mask, return_weights=True)
        else:
            cross_out = self.cross_attn(q, filtered, key_mask)
        h_out = self.ln_cross(q + cross_out)

        probs = torch.stack(
            [head(h_out, filtered, position_mask) for head in self.boundary_heads], dim=2
        )  # (R, N, 4, l)
        result = BoundarySet(probs)
        if return_attention:
            return result, {"self": self_w, "cross": cross_w}
        return result
