"""Minimal multi-head attention shared by the tiny encoder and the boundary
decoder. Masked key positions get exactly zero attention weight, so padding
cannot leak into real positions."""

from __future__ import annotations

import math

import torch
from torch import nn


class MultiHeadAttention(nn.Module):
    def __init__(self, hidden: int, heads: int):
        super().__init__()
        if hidden % heads != 0:
            raise ValueError(f"hidden={hidden} not divisible by heads={heads}")
        self.hidden = hidden
        self.heads = heads
        self.head_dim = hidden // heads
        self.q_proj = nn.Linear(hidden, hidden)
        self.k_proj = nn.Linear(hidden, hidden)
        self.v_proj = nn.Linear(hidden, hidden)
        self.out_proj = nn.Linear(hidden, hidden)

    def forward(
        self,
        queries: torch.Tensor,          # (B, Lq, d)
        keys: torch.Tensor,             # (B, Lk, d)
        key_mask: torch.Tensor | None = None,  # (B, Lk) bool, True = attend
        return_weights: bool = False,
    ):
        b, lq, _ = queries.shape
        lk = keys.shape[1]
        q = self.q_proj(queries).view(b, lq, self.heads, self.head_dim).transpose(1, 2)
        k = self.k_proj(keys).view(b, lk, self.heads, self.head_dim).transpose(1, 2)
        v = self.v_proj(keys).view(b, lk, self.heads, self.head_dim).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        if key_mask is not None:
            scores = scores.masked_fill(~key_mask[:, None, None, :], float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        out = (weights @ v).transpose(1, 2).reshape(b, lq, self.hidden)
        out = self.out_proj(out)
        if return_weights:
            return out, weights
        return out
