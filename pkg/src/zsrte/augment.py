"""Candidate sampling and construction of relation-augmented token groups.

Each instance expands into one row per candidate relation:

    [CLS] sentence subtokens [SEP] relation subtokens [SEP]

All rows of a group share the same sentence subtokens and differ only in the
relation part. Sentence and relation are told apart by segment ids (0/1).
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Sequence

import torch

from .corpus import Instance, RelationLabel
from .errors import ConfigError
from .tokenization import WordTokenizer

logger = logging.getLogger(__name__)


@dataclass
class AugmentedGroup:
    instance_id: str
    token_ids: torch.Tensor      # (G, l) long
    segment_ids: torch.Tensor    # (G, l) long, 1 on relation text and its trailing marker
    attention_mask: torch.Tensor # (G, l) long, 1 on real tokens
    candidates: list[RelationLabel]
    gold_mask: torch.Tensor      # (G,) float, 1.0 where the candidate is a gold relation
    word_alignment: dict[int, tuple[int, int]]  # word index -> (first, last) subtoken position
    sentence_token_count: int    # sentence occupies positions 1..sentence_token_count

    @property
    def group_size(self) -> int:
        return self.token_ids.shape[0]

    @property
    def max_len(self) -> int:
        return self.token_ids.shape[1]

    def boundary_position_mask(self) -> torch.Tensor:
        """Positions boundary heads may point at: the no-span sentinel at 0
        plus the sentence subtokens."""
        mask = torch.zeros(self.max_len, dtype=torch.bool)
        mask[0 : self.sentence_token_count + 1] = True
        return mask

    def subtoken_to_word(self) -> dict[int, int]:
        inverse: dict[int, int] = {}
        for word, (first, last) in self.word_alignment.items():
            for pos in range(first, last + 1):
                inverse[pos] = word
        return inverse

    def to(self, device) -> "AugmentedGroup":
        return AugmentedGroup(
            instance_id=self.instance_id,
            token_ids=self.token_ids.to(device),
            segment_ids=self.segment_ids.to(device),
            attention_mask=self.attention_mask.to(device),
            candidates=self.candidates,
            gold_mask=self.gold_mask.to(device),
            word_alignment=self.word_alignment,
            sentence_token_count=self.sentence_token_count,
        )


def sample_candidates(
    instance: Instance,
    label_pool: Sequence[RelationLabel],
    group_size: int,
    rng: random.Random,
) -> list[RelationLabel]:
    """Training-time candidates: all gold relations plus sampled irrelevant
    ones, shuffled so row position carries no label signal."""
    golds = instance.gold_relations()
    if len(golds) > group_size:
        raise ConfigError(
            f"instance {instance.id} has {len(golds)} distinct relations; "
            f"increase group_size (currently {group_size})"
        )
    gold_texts = {lab.text for lab in golds}
    pool = [lab for lab in label_pool if lab.text not in gold_texts]
    needed = group_size - len(golds)
    if needed > len(pool):
        raise ConfigError(
            f"label pool too small: need {needed} irrelevant relations, have {len(pool)}"
        )
    candidates = golds + rng.sample(pool, needed)
    rng.shuffle(candidates)
    return candidates


def all_candidates(unseen_labels: Sequence[RelationLabel]) -> list[RelationLabel]:
    """Validation/test-time candidates: the full unseen label set in ascending
    label-id order (the fixed, documented order)."""
    if not unseen_labels:
        raise ConfigError("candidate label set is empty")
    return sorted(unseen_labels, key=lambda lab: (lab.id, lab.text))


def build_group(
    instance: Instance,
    candidates: Sequence[RelationLabel],
    tokenizer: WordTokenizer,
    max_len: int,
) -> AugmentedGroup:
    return build_group_from_words(
        list(instance.words),
        candidates,
        tokenizer,
        max_len,
        gold_texts=instance.relation_texts(),
        instance_id=instance.id,
    )


def build_group_from_words(
    words: Sequence[str],
    candidates: Sequence[RelationLabel],
    tokenizer: WordTokenizer,
    max_len: int,
    gold_texts: set[str] | frozenset[str] = frozenset(),
    instance_id: str = "",
) -> AugmentedGroup:
    """Build the (G, max_len) token group for one sentence.

    When a row would exceed max_len, sentence subtokens are dropped from the
    tail (at a word boundary) and the relation text is kept intact; the
    shared sentence budget uses the longest candidate so all rows keep
    identical sentence tokens.
    """
    if not candidates:
        raise ConfigError("cannot build a group with no candidate relations")
    if not words:
        raise ValueError("sentence has no words")

    word_pieces = [tokenizer.word_ids(w) for w in words]
    if sum(len(p) for p in word_pieces) == 0:
        raise ValueError("sentence tokenizes to zero subtokens")
    relation_pieces = [tokenizer.text_ids(c.text) for c in candidates]

    overhead = 3 + max(len(r) for r in relation_pieces)  # CLS + 2x SEP + longest relation
    budget = max_len - overhead
    if budget < 1:
        raise ValueError(
            f"max_len={max_len} leaves no room for sentence tokens next to the longest relation"
        )

    alignment: dict[int, tuple[int, int]] = {}
    sentence_ids: list[int] = []
    cursor = 1  # position 0 is CLS
    kept_words = 0
    for idx, pieces in enumerate(word_pieces):
        if len(sentence_ids) + len(pieces) > budget:
            break
        alignment[idx] = (cursor, cursor + len(pieces) - 1)
        sentence_ids.extend(pieces)
        cursor += len(pieces)
        kept_words += 1
    if kept_words < len(words):
        logger.warning(
            "instance %s: sentence truncated from %d to %d words to fit max_len=%d",
            instance_id, len(words), kept_words, max_len,
        )

    sent_count = len(sentence_ids)
    rows, segments, masks = [], [], []
    for rel_ids in relation_pieces:
        ids = [tokenizer.cls_id] + sentence_ids + [tokenizer.sep_id] + rel_ids + [tokenizer.sep_id]
        seg = [0] * (sent_count + 2) + [1] * (len(rel_ids) + 1)
        att = [1] * len(ids)
        pad = max_len - len(ids)
        rows.append(ids + [tokenizer.pad_id] * pad)
        segments.append(seg + [0] * pad)
        masks.append(att + [0] * pad)

    gold = torch.tensor(
        [1.0 if c.text in gold_texts else 0.0 for c in candidates], dtype=torch.float32
    )
    return AugmentedGroup(
        instance_id=instance_id,
        token_ids=torch.tensor(rows, dtype=torch.long),
        segment_ids=torch.tensor(segments, dtype=torch.long),
        attention_mask=torch.tensor(masks, dtype=torch.long),
        candidates=list(candidates),
        gold_mask=gold,
        word_alignment=alignment,
        sentence_token_count=sent_count,
    )
