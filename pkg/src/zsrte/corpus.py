"""Sentence/triplet data model, JSONL ingestion, and seen/unseen label splitting.

The JSONL record schema is documented in docs/schema.md. Entity spans use
inclusive word indices on both ends.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, CorpusFormatError, SpanValidationError

logger = logging.getLogger(__name__)

VALIDATION_LABEL_COUNT = 5


@dataclass(frozen=True, order=True)
class RelationLabel:
    id: int
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("relation label text must be non-empty")


@dataclass(frozen=True)
class Triplet:
    head: tuple[int, int]
    tail: tuple[int, int]
    relation: RelationLabel


@dataclass(frozen=True)
class Instance:
    id: str
    words: tuple[str, ...]
    triplets: tuple[Triplet, ...]

    def relation_texts(self) -> set[str]:
        return {t.relation.text for t in self.triplets}

    def gold_relations(self) -> list[RelationLabel]:
        """Distinct gold relations in first-occurrence order."""
        seen: dict[str, RelationLabel] = {}
        for t in self.triplets:
            seen.setdefault(t.relation.text, t.relation)
        return list(seen.values())


@dataclass(frozen=True)
class ZeroShotSplit:
    fold_seed: int
    seen_labels: tuple[RelationLabel, ...]
    validation_labels: tuple[RelationLabel, ...]
    unseen_labels: tuple[RelationLabel, ...]
    train: tuple[Instance, ...]
    validation: tuple[Instance, ...]
    test: tuple[Instance, ...]


def _parse_span(raw, word_count: int, line_number: int, field: str) -> tuple[int, int]:
    if not isinstance(raw, list) or not raw or not all(isinstance(i, int) for i in raw):
        raise CorpusFormatError(line_number, f"{field} must be a non-empty list of word indices")
    if raw != list(range(raw[0], raw[-1] + 1)):
        raise CorpusFormatError(line_number, f"{field} indices must be consecutive and ascending, got {raw}")
    start, end = raw[0], raw[-1]
    if not (0 <= start <= end < word_count):
        raise SpanValidationError(
            f"line {line_number}: {field} span ({start}, {end}) out of range for {word_count} words"
        )
    return start, end


def load_corpus(path: str | Path, format: str = "jsonl") -> tuple[list[Instance], list[RelationLabel]]:
    """Load instances and the deduplicated label set from a JSONL corpus file.

    Labels are assigned ids by sorted text order, so the same label set always
    maps to the same ids regardless of record order.
    """
    if format != "jsonl":
        raise ConfigError(f"unsupported corpus format: {format}")
    path = Path(path)
    raw_records: list[tuple[str, list[str], list[tuple[tuple[int, int], tuple[int, int], str]]]] = []
    label_texts: set[str] = set()
    with path.open(encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(line_number, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(line_number, "record must be a JSON object")
            words = record.get("tokens")
            if not isinstance(words, list) or not words or not all(isinstance(w, str) for w in words):
                raise CorpusFormatError(line_number, "'tokens' must be a non-empty list of strings")
            triplets = record.get("triplets")
            if not isinstance(triplets, list) or not triplets:
                raise CorpusFormatError(line_number, "'triplets' must be a non-empty list")
            parsed = []
            for t in triplets:
                if not isinstance(t, dict):
                    raise CorpusFormatError(line_number, "triplet entries must be objects")
                label = t.get("label")
                if not isinstance(label, str) or not label:
                    raise CorpusFormatError(line_number, "triplet 'label' must be a non-empty string")
                head = _parse_span(t.get("head"), len(words), line_number, "head")
                tail = _parse_span(t.get("tail"), len(words), line_number, "tail")
                parsed.append((head, tail, label))
                label_texts.add(label)
            instance_id = str(record.get("id", line_number - 1))
            raw_records.append((instance_id, words, parsed))

    labels = [RelationLabel(i, text) for i, text in enumerate(sorted(label_texts))]
    by_text = {lab.text: lab for lab in labels}
    instances = [
        Instance(
            id=instance_id,
            words=tuple(words),
            triplets=tuple(Triplet(head, tail, by_text[label]) for head, tail, label in parsed),
        )
        for instance_id, words, parsed in raw_records
    ]
    return instances, labels


def make_splits(
    instances: Sequence[Instance],
    labels: Sequence[RelationLabel],
    m: int,
    n_folds: int,
    seeds: Sequence[int],
    validation_label_count: int = VALIDATION_LABEL_COUNT,
) -> list[ZeroShotSplit]:
    """Partition labels into seen/validation/unseen sets and assign instances.

    Per fold: m unseen test labels and `validation_label_count` validation
    labels are sampled by the fold seed; the remainder is seen. An instance
    joins a partition only if all of its triplet relations fall inside that
    partition's label set; instances straddling partitions are dropped.
    """
    if len(seeds) != n_folds:
        raise ConfigError(f"expected {n_folds} seeds, got {len(seeds)}")
    if m < 1:
        raise ConfigError("m must be at least 1")
    if m + validation_label_count > len(labels):
        raise ConfigError(
            f"m={m} plus {validation_label_count} validation labels exceeds the "
            f"label set size {len(labels)}"
        )
    ordered = sorted(labels, key=lambda lab: lab.text)
    splits = []
    for seed in seeds:
        rng = random.Random(seed)
        unseen = rng.sample(ordered, m)
        remaining = [lab for lab in ordered if lab not in unseen]
        validation = rng.sample(remaining, validation_label_count)
        seen = [lab for lab in remaining if lab not in validation]

        seen_texts = {lab.text for lab in seen}
        val_texts = {lab.text for lab in validation}
        unseen_texts = {lab.text for lab in unseen}

        train_set, val_set, test_set = [], [], []
        dropped = 0
        for inst in instances:
            texts = inst.relation_texts()
            if texts <= seen_texts:
                train_set.append(inst)
            elif texts <= val_texts:
                val_set.append(inst)
            elif texts <= unseen_texts:
                test_set.append(inst)
            else:
                dropped += 1
        if dropped:
            logger.info("fold seed %d: dropped %d instances mixing label partitions", seed, dropped)
        splits.append(
            ZeroShotSplit(
                fold_seed=seed,
                seen_labels=tuple(seen),
                validation_labels=tuple(validation),
                unseen_labels=tuple(unseen),
                train=tuple(train_set),
                validation=tuple(val_set),
                test=tuple(test_set),
            )
        )
    return splits


def split_to_manifest(split: ZeroShotSplit) -> dict:
    return {
        "fold_seed": split.fold_seed,
        "seen_labels": sorted(lab.text for lab in split.seen_labels),
        "validation_labels": sorted(lab.text for lab in split.validation_labels),
        "unseen_labels": sorted(lab.text for lab in split.unseen_labels),
        "train_ids": [inst.id for inst in split.train],
        "validation_ids": [inst.id for inst in split.validation],
        "test_ids": [inst.id for inst in split.test],
    }


def write_manifest(split: ZeroShotSplit, path: str | Path) -> None:
    """Write a split manifest; byte-identical output for identical splits."""
    payload = json.dumps(split_to_manifest(split), sort_keys=True, indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def read_manifest(
    path: str | Path,
    instances: Sequence[Instance],
    labels: Sequence[RelationLabel],
) -> ZeroShotSplit:
    """Rebuild a ZeroShotSplit from a manifest plus the corpus it indexes."""
    manifest = json.loads(Path(path).read_text(encoding="utf-8"))
    by_text = {lab.text: lab for lab in labels}
    by_id = {inst.id: inst for inst in instances}

    def pick_labels(texts: Iterable[str]) -> tuple[RelationLabel, ...]:
        missing = [t for t in texts if t not in by_text]
        if missing:
            raise ConfigError(f"manifest labels not present in corpus: {missing}")
        return tuple(by_text[t] for t in texts)

    def pick_instances(ids: Iterable[str]) -> tuple[Instance, ...]:
        missing = [i for i in ids if i not in by_id]
        if missing:
            raise ConfigError(f"manifest instance ids not present in corpus: {missing[:5]}")
        return tuple(by_id[i] for i in ids)

    return ZeroShotSplit(
        fold_seed=int(manifest["fold_seed"]),
        seen_labels=pick_labels(manifest["seen_labels"]),
        validation_labels=pick_labels(manifest["validation_labels"]),
        unseen_labels=pick_labels(manifest["unseen_labels"]),
        train=pick_instances(manifest["train_ids"]),
        validation=pick_instances(manifest["validation_ids"]),
        test=pick_instances(manifest["test_ids"]),
    )
