"""Triplet assembly from relation decisions and boundary distributions.

For every surviving relation and every query, the four per-head argmax
positions form a candidate quadruple. Quadruples pointing entirely at the
no-span sentinel are dropped, the remaining ones pass four validity checks
(ordering, sentence range, span length, probability mass), and survivors are
mapped back to word spans and deduplicated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import torch

from .augment import AugmentedGroup, all_candidates, build_group_from_words
from .corpus import RelationLabel
from .decoder import HEAD_END, HEAD_START, NULL_POSITION, TAIL_END, TAIL_START, BoundarySet
from .selector import RelationDecision


@dataclass(frozen=True)
class DecodedBoundary:
    head_start: int
    head_end: int
    tail_start: int
    tail_end: int
    score: float


@dataclass(frozen=True)
class PredictedTriplet:
    head: tuple[int, int]   # inclusive word span
    tail: tuple[int, int]
    relation: RelationLabel
    score: float

    def key(self) -> tuple:
        return (self.head, self.tail, self.relation.text)


def decode_quadruples(row_probs: torch.Tensor) -> list[DecodedBoundary]:
    """Per-query argmax quadruples with their probability product; row_probs
    has shape (N, 4, l)."""
    indices = row_probs.argmax(dim=-1)                       # (N, 4)
    values = row_probs.max(dim=-1).values                    # (N, 4)
    out = []
    for j in range(row_probs.shape[0]):
        hs, he, ts, te = (int(indices[j, k]) for k in (HEAD_START, HEAD_END, TAIL_START, TAIL_END))
        score = float(values[j].prod())
        out.append(DecodedBoundary(hs, he, ts, te, score))
    return out


def _spans_valid(
    quad: DecodedBoundary,
    sentence_token_count: int,
    max_span_length: int,
    boundary_threshold: float,
) -> bool:
    spans = ((quad.head_start, quad.head_end), (quad.tail_start, quad.tail_end))
    for start, end in spans:
        if start > end:                               # ordering
            return False
        if start < 1 or end > sentence_token_count:   # inside the actual sentence
            return False
        if end - start + 1 > max_span_length:         # span length cap
            return False
    return quad.score >= boundary_threshold           # probability mass


def extract(
    decision: RelationDecision,
    boundaries: BoundarySet,
    group: AugmentedGroup,
    boundary_threshold: float,
    max_span_length: int,
) -> list[PredictedTriplet]:
    """Apply the validity criteria and emit deduplicated word-span triplets,
    scored by boundary probability times relation probability."""
    if boundaries.rows != len(decision.kept_indices):
        raise ValueError("boundary rows do not match the kept relation indices")
    to_word = group.subtoken_to_word()
    best: dict[tuple, PredictedTriplet] = {}
    for row, cand_idx in enumerate(decision.kept_indices):
        relation = group.candidates[cand_idx]
        rel_prob = float(decision.probs[cand_idx])
        for quad in decode_quadruples(boundaries.probs[row]):
            if (
                quad.head_start == NULL_POSITION
                and quad.head_end == NULL_POSITION
                and quad.tail_start == NULL_POSITION
                and quad.tail_end == NULL_POSITION
            ):
                continue
            if not _spans_valid(
                quad, group.sentence_token_count, max_span_length, boundary_threshold
            ):
                continue
            subtokens = (quad.head_start, quad.head_end, quad.tail_start, quad.tail_end)
            if any(pos not in to_word for pos in subtokens):
                continue
            triplet = PredictedTriplet(
                head=(to_word[quad.head_start], to_word[quad.head_end]),
                tail=(to_word[quad.tail_start], to_word[quad.tail_end]),
                relation=relation,
                score=quad.score * rel_prob,
            )
            existing = best.get(triplet.key())
            if existing is None or triplet.score > existing.score:
                best[triplet.key()] = triplet
    return sorted(
        best.values(), key=lambda t: (-t.score, t.relation.id, t.head[0], t.tail[0])
    )


def top1(triplets: Sequence[PredictedTriplet]) -> PredictedTriplet | None:
    """Highest-scoring triplet; ties break toward the smallest
    (relation id, head start, tail start)."""
    if not triplets:
        return None
    return min(triplets, key=lambda t: (-t.score, t.relation.id, t.head[0], t.tail[0]))


@dataclass
class InferenceResult:
    decision: RelationDecision
    triplets: list[PredictedTriplet]
    candidates: list[RelationLabel]

    def selected_texts(self) -> set[str]:
        return {self.candidates[i].text for i in self.decision.kept_indices}


def run_inference(
    model,
    tokenizer,
    sentences: Iterable[tuple[str, Sequence[str]]],
    labels: Sequence[RelationLabel],
    max_sequence_length: int,
    relation_threshold: float,
    boundary_threshold: float,
    max_span_length: int,
) -> dict[str, InferenceResult]:
    """Run selection + boundary decoding over (id, words) sentences against a
    candidate label set."""
    candidates = all_candidates(labels)
    results: dict[str, InferenceResult] = {}
    for sentence_id, words in sentences:
        group = build_group_from_words(
            words, candidates, tokenizer, max_sequence_length, instance_id=sentence_id
        )
        decision, boundaries = model.infer_group(group, relation_threshold)
        triplets = extract(decision, boundaries, group, boundary_threshold, max_span_length)
        results[sentence_id] = InferenceResult(decision, triplets, candidates)
    return results


def predictions_to_records(results: Mapping[str, InferenceResult]) -> list[dict]:
    records = []
    for sentence_id in sorted(results):
        res = results[sentence_id]
        records.append(
            {
                "id": sentence_id,
                "triplets": [
                    {
                        "head": list(t.head),
                        "tail": list(t.tail),
                        "label": t.relation.text,
                        "score": t.score,
                    }
                    for t in res.triplets
                ],
                "relations": [
                    {
                        "label": res.candidates[i].text,
                        "probability": float(res.decision.probs[i]),
                        "selected": bool(res.decision.mask[i]),
                    }
                    for i in range(len(res.candidates))
                ],
            }
        )
    return records


def write_predictions(path: str | Path, results: Mapping[str, InferenceResult]) -> None:
    with Path(path).open("w", encoding="utf-8") as f:
        for record in predictions_to_records(results):
            f.write(json.dumps(record, ensure_ascii=False) + "\n")


def dump_attention(
    path: str | Path,
    model,
    tokenizer,
    sentences: Iterable[tuple[str, Sequence[str]]],
    labels: Sequence[RelationLabel],
    max_sequence_length: int,
    relation_threshold: float,
) -> None:
    """Diagnostic dump of the boundary decoder's attention (and, when the
    encoder exposes it, the last encoder layer's self-attention) as JSON."""
    candidates = all_candidates(labels)
    records = []
    for sentence_id, words in sentences:
        group = build_group_from_words(
            words, candidates, tokenizer, max_sequence_length, instance_id=sentence_id
        )
        decision, _, attention = model.infer_group(
            group, relation_threshold, return_attention=True
        )
        record: dict = {
            "id": sentence_id,
            "kept_relations": [candidates[i].text for i in decision.kept_indices],
        }
        if attention:
            record["decoder_self"] = attention["self"].tolist()
            record["decoder_cross"] = attention["cross"].tolist()
        encoder = getattr(model, "encoder", None)
        if hasattr(encoder, "blocks"):  # tiny encoder exposes layer attention
            with torch.no_grad():
                _, layers = encoder.forward(
                    group.token_ids, group.segment_ids, group.attention_mask,
                    return_attention=True,
                )
            record["encoder_last_layer"] = layers[-1].tolist()
        records.append(record)
    Path(path).write_text(json.dumps(records) + "\n", encoding="utf-8")
