"""Candidate relation selection head and the relation filter.

Each row's [CLS] state is pooled through a tanh layer and scored with a
sigmoid, giving an independent keep-probability per candidate. The filter
then drops rows below the threshold (or keeps exactly the gold rows during
training).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn


class SelectionHead(nn.Module):
    def __init__(self, hidden: int):
        super().__init__()
        self.pool = nn.Linear(hidden, hidden)
        self.scorer = nn.Linear(hidden, 1)

    def forward(self, cls_states: torch.Tensor) -> torch.Tensor:
        """(G, d) CLS states -> (G,) probabilities in (0, 1)."""
        if not torch.isfinite(cls_states).all():
            raise ValueError("non-finite CLS representation passed to selection head")
        pooled = torch.tanh(self.pool(cls_states))
        return torch.sigmoid(self.scorer(pooled)).squeeze(-1)


def make_mask(
    probs: torch.Tensor,
    mode: str,
    gold_mask: torch.Tensor | None = None,
    threshold: float = 0.5,
) -> torch.Tensor:
    """Boolean keep-mask over candidates.

    Training uses the gold relations directly; inference thresholds the
    probabilities (ties at the threshold are kept).
    """
    if mode == "train":
        if gold_mask is None:
            raise ValueError("train mode requires a gold mask")
        return gold_mask.bool()
    if mode == "infer":
        return probs >= threshold
    raise ValueError(f"unknown mode: {mode!r}")


def filter_rows(values: torch.Tensor, mask: torch.Tensor) -> tuple[torch.Tensor, list[int]]:
    """Pure row selection: rows of `values` where mask is set, original order
    and values preserved bit-for-bit."""
    if mask.shape[0] != values.shape[0]:
        raise ValueError("mask length does not match row count")
    kept = [i for i, keep in enumerate(mask.tolist()) if keep]
    return values[kept], kept


@dataclass
class RelationDecision:
    probs: torch.Tensor          # (G,)
    mask: torch.Tensor           # (G,) bool
    kept_indices: list[int] = field(default_factory=list)

    @classmethod
    def from_probs(
        cls,
        probs: torch.Tensor,
        mode: str,
        gold_mask: torch.Tensor | None = None,
        threshold: float = 0.5,
    ) -> "RelationDecision":
        mask = make_mask(probs, mode, gold_mask, threshold)
        kept = [i for i, keep in enumerate(mask.tolist()) if keep]
        return cls(probs=probs, mask=mask, kept_indices=kept)

    @property
    def kept_count(self) -> int:
        return len(self.kept_indices)
