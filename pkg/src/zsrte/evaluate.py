"""Scoring: single-triplet accuracy, multi-triplet micro precision/recall/F1,
relation-selection scores, fold averaging, and the random-selector baseline.

Triplets match exactly on (head word span, tail word span, relation text), so
scores are independent of the tokenizer.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Instance
from .infer import PredictedTriplet, top1


@dataclass
class ScoreReport:
    acc: float = 0.0
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    rel_precision: float = 0.0
    rel_recall: float = 0.0
    rel_f1: float = 0.0
    n_single: int = 0
    n_multi: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def micro_prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def _gold_keys(instance: Instance) -> set[tuple]:
    return {(t.head, t.tail, t.relation.text) for t in instance.triplets}


def score(
    predictions: Mapping[str, Sequence[PredictedTriplet]],
    gold: Mapping[str, Instance],
    split_kind: str,
    selected: Mapping[str, set[str]] | None = None,
) -> ScoreReport:
    """Score predictions against gold instances.

    split_kind "single": accuracy of the top-1 prediction over the given
    instances. split_kind "multi": micro precision/recall/F1 pooled over all
    instances' triplets. When `selected` relation sets are provided, the
    relation-selection micro scores are filled in as well.
    """
    if split_kind not in ("single", "multi"):
        raise ValueError(f"unknown split kind: {split_kind!r}")
    unknown = set(predictions) - set(gold)
    if unknown:
        raise ValueError(f"predictions for unknown instance ids: {sorted(unknown)[:5]}")

    report = ScoreReport()
    if split_kind == "single":
        correct = 0
        for instance_id, instance in gold.items():
            best = top1(list(predictions.get(instance_id, [])))
            gold_keys = _gold_keys(instance)
            if best is not None and best.key() in gold_keys:
                correct += 1
        report.n_single = len(gold)
        report.acc = correct / len(gold) if gold else 0.0
    else:
        tp = fp = fn = 0
        for instance_id, instance in gold.items():
            gold_keys = _gold_keys(instance)
            pred_keys = {t.key() for t in predictions.get(instance_id, [])}
            tp += len(pred_keys & gold_keys)
            fp += len(pred_keys - gold_keys)
            fn += len(gold_keys - pred_keys)
        report.n_multi = len(gold)
        report.precision, report.recall, report.f1 = micro_prf(tp, fp, fn)

    if selected is not None:
        rtp = rfp = rfn = 0
        for instance_id, instance in gold.items():
            gold_rels = instance.relation_texts()
            picked = set(selected.get(instance_id, set()))
            rtp += len(picked & gold_rels)
            rfp += len(picked - gold_rels)
            rfn += len(gold_rels - picked)
        report.rel_precision, report.rel_recall, report.rel_f1 = micro_prf(rtp, rfp, rfn)
    return report


def combined_report(
    predictions: Mapping[str, Sequence[PredictedTriplet]],
    gold: Mapping[str, Instance],
    selected: Mapping[str, set[str]] | None = None,
) -> ScoreReport:
    """Partition instances into single- and multi-triplet buckets, score each
    with its own metric, and fold relation-selection scores over everything."""
    single = {i: inst for i, inst in gold.items() if len(inst.triplets) == 1}
    multi = {i: inst for i, inst in gold.items() if len(inst.triplets) > 1}
    report = ScoreReport()
    if single:
        s = score({i: predictions.get(i, []) for i in single}, single, "single")
        report.acc, report.n_single = s.acc, s.n_single
    if multi:
        m = score({i: predictions.get(i, []) for i in multi}, multi, "multi")
        report.precision, report.recall, report.f1 = m.precision, m.recall, m.f1
        report.n_multi = m.n_multi
    if selected is not None and gold:
        r = score(predictions, gold, "multi", selected)
        report.rel_precision, report.rel_recall, report.rel_f1 = (
            r.rel_precision, r.rel_recall, r.rel_f1,
        )
    return report


def average_folds(reports: Sequence[ScoreReport], expected: int | None = None) -> ScoreReport:
    """Arithmetic mean per metric. Precision/recall means are means of fold
    values, not re-derived from pooled counts."""
    if not reports:
        raise ValueError("no reports to average")
    if expected is not None and len(reports) != expected:
        raise ValueError(f"expected {expected} fold reports, got {len(reports)}")
    n = len(reports)
    mean = ScoreReport()
    for name in ("acc", "precision", "recall", "f1", "rel_precision", "rel_recall", "rel_f1"):
        setattr(mean, name, sum(getattr(r, name) for r in reports) / n)
    mean.n_single = sum(r.n_single for r in reports)
    mean.n_multi = sum(r.n_multi for r in reports)
    return mean


def random_selector_baseline(
    label_count: int,
    gold_mask: Sequence[int],
    threshold: float,
    rng: random.Random,
    trials: int,
) -> tuple[float, float]:
    """Relation precision/recall when selection probabilities are replaced by
    uniform random draws; counts pooled over trials."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if len(gold_mask) != label_count:
        raise ValueError("gold mask length must equal label_count")
    tp = fp = fn = 0
    for _ in range(trials):
        for gold_bit in gold_mask:
            passed = rng.random() >= threshold
            if passed and gold_bit:
                tp += 1
            elif passed and not gold_bit:
                fp += 1
            elif not passed and gold_bit:
                fn += 1
    precision, recall, _ = micro_prf(tp, fp, fn)
    return precision, recall


def write_report_json(report: ScoreReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def format_report_table(rows: Sequence[tuple[str, ScoreReport]]) -> str:
    """Plain-text table: one row per (name, report) with Acc / P / R / F1."""
    header = f"{'run':<24} {'Acc':>7} {'Pre':>7} {'Rec':>7} {'F1':>7} {'RelP':>7} {'RelR':>7} {'RelF1':>7}"
    lines = [header, "-" * len(header)]
    for name, r in rows:
        lines.append(
            f"{name:<24} {100 * r.acc:>7.2f} {100 * r.precision:>7.2f} {100 * r.recall:>7.2f} "
            f"{100 * r.f1:>7.2f} {100 * r.rel_precision:>7.2f} {100 * r.rel_recall:>7.2f} "
            f"{100 * r.rel_f1:>7.2f}"
        )
    return "\n".join(lines) + "\n"
