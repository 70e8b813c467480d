"""Training loop: AdamW with linear warm-up and decay, per-epoch validation,
early stopping on the validation score, and best-checkpoint saving.

The validation score is the multi-triplet micro-F1 of the validation fold,
falling back to single-triplet accuracy when the fold has no multi-triplet
sentences. Runs are deterministic per seed and backend.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .augment import build_group, sample_candidates
from .config import RunConfig
from .corpus import Instance, RelationLabel, ZeroShotSplit
from .evaluate import ScoreReport, combined_report
from .infer import run_inference
from .losses import bipartite_entity_loss, gold_boundary_set, relation_loss, total_loss
from .model import ModelConfig, TripletExtractor, build_model, build_tokenizer, save_checkpoint
from .selector import RelationDecision

logger = logging.getLogger(__name__)


class EarlyStopper:
    """Stop after `patience` consecutive epochs without strict improvement."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_score = float("-inf")
        self.best_epoch = 0
        self.epochs_without_improvement = 0

    def update(self, score: float, epoch: int) -> tuple[bool, bool]:
        """Returns (improved, should_stop)."""
        if score > self.best_score:
            self.best_score = score
            self.best_epoch = epoch
            self.epochs_without_improvement = 0
            return True, False
        self.epochs_without_improvement += 1
        return False, self.epochs_without_improvement >= self.patience


def warmup_factor(step: int, total_steps: int, warmup_ratio: float) -> float:
    """Learning-rate multiplier: 0 at step 0, 1 at the end of warm-up, linear
    in between, then linear decay to 0 at total_steps."""
    if total_steps <= 0:
        return 0.0
    warmup_steps = max(1, round(warmup_ratio * total_steps))
    if step <= warmup_steps:
        return step / warmup_steps
    if step >= total_steps:
        return 0.0
    return (total_steps - step) / (total_steps - warmup_steps)


def model_config_from_run(cfg: RunConfig) -> ModelConfig:
    return ModelConfig(
        encoder=cfg.encoder,
        hidden=cfg.hidden,
        layers=cfg.layers,
        heads=cfg.heads,
        vocab_size=cfg.vocab_size,
        piece_chars=cfg.piece_chars,
        max_sequence_length=cfg.max_sequence_length,
        max_triplets=cfg.max_triplets,
        decoder_heads=cfg.decoder_heads,
        dropout=cfg.dropout,
        hf_model=cfg.hf_model,
        freeze_word_embeddings=cfg.freeze_word_embeddings,
        seed=cfg.seed,
    )


@dataclass
class TrainResult:
    checkpoint_dir: Path
    best_epoch: int
    best_score: float
    stopped_early: bool
    history: list[dict] = field(default_factory=list)
    final_model: TripletExtractor | None = None  # last-epoch state, not the saved best


def validation_score(report: ScoreReport) -> float:
    return report.f1 if report.n_multi > 0 else report.acc


def evaluate_on(
    model: TripletExtractor,
    tokenizer,
    instances: list[Instance],
    candidate_labels: list[RelationLabel],
    cfg: RunConfig,
):
    """Inference + scoring of a partition against a candidate label set."""
    results = run_inference(
        model,
        tokenizer,
        [(inst.id, inst.words) for inst in instances],
        candidate_labels,
        cfg.max_sequence_length,
        cfg.relation_threshold,
        cfg.boundary_threshold,
        cfg.max_span_length,
    )
    gold = {inst.id: inst for inst in instances}
    predictions = {i: res.triplets for i, res in results.items()}
    selected = {i: res.selected_texts() for i, res in results.items()}
    return combined_report(predictions, gold, selected), results


def instance_losses(
    model: TripletExtractor,
    instance: Instance,
    seen_labels: list[RelationLabel],
    tokenizer,
    cfg: RunConfig,
    rng: random.Random,
):
    """Relation and entity losses for one training instance under the
    gold-relation mask."""
    candidates = sample_candidates(instance, seen_labels, cfg.group_size, rng)
    group = build_group(instance, candidates, tokenizer, cfg.max_sequence_length).to(cfg.device)
    rep = model.encode(group)
    probs = model.select(rep)
    rel = relation_loss(probs, group.gold_mask)
    decision = RelationDecision.from_probs(probs, "train", gold_mask=group.gold_mask)
    boundaries = model.decode_kept(group, rep, decision)
    gold_sets = [
        gold_boundary_set(
            instance, group.candidates[i].text, group.word_alignment, cfg.max_triplets
        )
        for i in decision.kept_indices
    ]
    ent, _ = bipartite_entity_loss(boundaries, gold_sets)
    return rel, ent


def train(cfg: RunConfig, split: ZeroShotSplit) -> TrainResult:
    cfg.validate()
    model_config = model_config_from_run(cfg)
    model = build_model(model_config).to(cfg.device)
    tokenizer = build_tokenizer(model_config)

    train_instances = list(split.train)
    seen_labels = list(split.seen_labels)
    if not train_instances:
        raise ValueError("split has no training instances")

    batches_per_epoch = (len(train_instances) + cfg.batch_size - 1) // cfg.batch_size
    total_steps = batches_per_epoch * cfg.max_epochs
    optimizer = torch.optim.AdamW(
        [p for p in model.parameters() if p.requires_grad],
        lr=cfg.learning_rate,
        weight_decay=cfg.weight_decay,
    )
    scheduler = torch.optim.lr_scheduler.LambdaLR(
        optimizer, lambda step: warmup_factor(step, total_steps, cfg.warmup_ratio)
    )

    checkpoint_dir = Path(cfg.checkpoint_dir)
    stopper = EarlyStopper(cfg.early_stopping_patience)
    history: list[dict] = []
    stopped_early = False

    for epoch in range(1, cfg.max_epochs + 1):
        model.train()
        order = list(range(len(train_instances)))
        shuffle_rng = random.Random(f"{cfg.seed}:shuffle:{epoch}")
        shuffle_rng.shuffle(order)
        sample_rng = random.Random(f"{cfg.seed}:candidates:{epoch}")

        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch = [train_instances[i] for i in order[start : start + cfg.batch_size]]
            optimizer.zero_grad()
            losses = []
            for instance in batch:
                rel, ent = instance_losses(model, instance, seen_labels, tokenizer, cfg, sample_rng)
                losses.append(total_loss(rel, ent, cfg.loss_weight))
            loss = torch.stack(losses).mean()
            loss.backward()
            optimizer.step()
            scheduler.step()
            epoch_loss += float(loss.detach())

        val_report, _ = evaluate_on(
            model, tokenizer, list(split.validation), list(split.validation_labels), cfg
        )
        score = validation_score(val_report)
        improved, should_stop = stopper.update(score, epoch)
        history.append(
            {
                "epoch": epoch,
                "train_loss": epoch_loss / batches_per_epoch,
                "val_score": score,
                "improved": improved,
            }
        )
        logger.info(
            "epoch %d: train loss %.4f, val score %.4f%s",
            epoch, epoch_loss / batches_per_epoch, score, " (best)" if improved else "",
        )
        if improved:
            save_checkpoint(
                checkpoint_dir,
                model,
                model_config,
                run_config=cfg.to_dict(),
                best={"epoch": epoch, "score": score, "metric": "val_multi_f1_or_acc"},
            )
        if should_stop:
            stopped_early = True
            logger.info("early stopping after epoch %d (best epoch %d)", epoch, stopper.best_epoch)
            break

    if stopper.best_epoch == 0:
        # no epoch improved over -inf is impossible, but guard anyway
        save_checkpoint(checkpoint_dir, model, model_config, run_config=cfg.to_dict())
    save_checkpoint(
        checkpoint_dir / "last",
        model,
        model_config,
        run_config=cfg.to_dict(),
        best={"epoch": history[-1]["epoch"], "score": history[-1]["val_score"],
              "metric": "final_epoch"},
    )
    (checkpoint_dir / "history.json").write_text(json.dumps(history, indent=2) + "\n")
    return TrainResult(
        checkpoint_dir=checkpoint_dir,
        best_epoch=stopper.best_epoch,
        best_score=stopper.best_score,
        stopped_early=stopped_early,
        history=history,
        final_model=model,
    )
