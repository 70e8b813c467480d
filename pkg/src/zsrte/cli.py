"""Command-line entry points: split generation, training, evaluation,
prediction, toy corpus generation, and the HTTP service."""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import synth as synth_mod
from .config import RunConfig, load_run_config, merge_config
from .errors import ConfigError, CorpusFormatError, SpanValidationError
from .evaluate import format_report_table, write_report_json
from .infer import run_inference, write_predictions
from .model import load_checkpoint
from .training import evaluate_on, train

logger = logging.getLogger(__name__)


def _parse_overrides(pairs: list[str]) -> dict:
    overrides = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _load_config(args) -> RunConfig:
    overrides = _parse_overrides(getattr(args, "set", []) or [])
    for flag in ("corpus", "splits_dir", "checkpoint_dir"):
        value = getattr(args, flag, None)
        if value:
            overrides[flag] = value
    return load_run_config(getattr(args, "config", None), overrides)


def _manifest_path(splits_dir: str | Path, fold: int) -> Path:
    return Path(splits_dir) / f"fold-{fold}.json"


def cmd_split(args) -> int:
    instances, labels = corpus_mod.load_corpus(args.corpus)
    seeds = [int(s) for s in args.seeds.split(",")]
    splits = corpus_mod.make_splits(
        instances, labels, args.m, args.folds, seeds,
        validation_label_count=args.val_labels,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for fold, split in enumerate(splits):
        path = _manifest_path(out_dir, fold)
        corpus_mod.write_manifest(split, path)
        print(
            f"fold {fold}: seed {split.fold_seed}, "
            f"{len(split.seen_labels)}/{len(split.validation_labels)}/{len(split.unseen_labels)} "
            f"train/val/test labels, "
            f"{len(split.train)}/{len(split.validation)}/{len(split.test)} instances -> {path}"
        )
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    if not cfg.corpus:
        raise ConfigError("no corpus configured (set corpus= in the config or pass --corpus)")
    instances, labels = corpus_mod.load_corpus(cfg.corpus)
    split = corpus_mod.read_manifest(_manifest_path(cfg.splits_dir, args.fold), instances, labels)
    result = train(cfg, split)
    print(
        f"best epoch {result.best_epoch} (val score {result.best_score:.4f}) "
        f"-> {result.checkpoint_dir}"
    )
    return 0


def cmd_eval(args) -> int:
    model, model_config, extras = load_checkpoint(args.checkpoint)
    stored = dict(extras.get("run", {}))
    overrides = _parse_overrides(getattr(args, "set", []) or [])
    for flag in ("corpus", "splits_dir"):
        value = getattr(args, flag, None)
        if value:
            overrides[flag] = value
    cfg = merge_config(stored, overrides)
    instances, labels = corpus_mod.load_corpus(cfg.corpus)
    split = corpus_mod.read_manifest(_manifest_path(cfg.splits_dir, args.fold), instances, labels)
    from .model import build_tokenizer

    tokenizer = build_tokenizer(model_config)
    report, results = evaluate_on(model, tokenizer, list(split.test), list(split.unseen_labels), cfg)
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.checkpoint)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_report_json(report, out_dir / f"report-fold{args.fold}.json")
    table = format_report_table([(f"fold {args.fold} (m={len(split.unseen_labels)})", report)])
    (out_dir / f"report-fold{args.fold}.txt").write_text(table)
    if args.predictions:
        write_predictions(out_dir / f"predictions-fold{args.fold}.jsonl", results)
    print(table, end="")
    return 0


def _read_prediction_inputs(path: str | Path) -> list[tuple[str, list[str]]]:
    sentences = []
    with Path(path).open(encoding="utf-8") as f:
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
            if words is None and "text" in record:
                words = str(record["text"]).split()
            if not isinstance(words, list) or not words:
                raise CorpusFormatError(line_number, "need 'tokens' (word list) or 'text'")
            sentences.append((str(record.get("id", line_number - 1)), [str(w) for w in words]))
    return sentences


def _read_labels(path: str | Path) -> list[corpus_mod.RelationLabel]:
    texts = [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines()]
    texts = [t for t in texts if t]
    if not texts:
        raise ConfigError(f"label file {path} contains no labels")
    return [corpus_mod.RelationLabel(i, t) for i, t in enumerate(sorted(set(texts)))]


def cmd_predict(args) -> int:
    model, model_config, extras = load_checkpoint(args.checkpoint)
    stored = dict(extras.get("run", {}))
    cfg = merge_config(stored, _parse_overrides(getattr(args, "set", []) or []))
    if not args.labels:
        raise ConfigError("predict requires --labels with the candidate relation set")
    labels = _read_labels(args.labels)
    sentences = _read_prediction_inputs(args.input)
    from .model import build_tokenizer

    tokenizer = build_tokenizer(model_config)
    results = run_inference(
        model,
        tokenizer,
        sentences,
        labels,
        cfg.max_sequence_length,
        cfg.relation_threshold,
        cfg.boundary_threshold,
        cfg.max_span_length,
    )
    write_predictions(args.out, results)
    n_triplets = sum(len(r.triplets) for r in results.values())
    print(f"{len(results)} sentences, {n_triplets} triplets -> {args.out}")
    if args.attention_out:
        from .infer import dump_attention

        dump_attention(
            args.attention_out, model, tokenizer, sentences, labels,
            cfg.max_sequence_length, cfg.relation_threshold,
        )
        print(f"attention matrices -> {args.attention_out}")
    return 0


def cmd_synth(args) -> int:
    train_templates, zeroshot_templates = synth_mod.default_templates()
    rng = random.Random(args.seed)
    instances, _ = synth_mod.generate(train_templates, args.count, rng, args.multi_fraction)
    synth_mod.write_corpus(instances, args.out)
    print(f"{len(instances)} instances -> {args.out}")
    if args.zeroshot_out:
        zs_rng = random.Random(args.seed + 1)
        zs_instances, _ = synth_mod.generate(
            zeroshot_templates, args.zeroshot_count, zs_rng, args.multi_fraction
        )
        synth_mod.write_corpus(zs_instances, args.zeroshot_out)
        print(f"{len(zs_instances)} held-out instances -> {args.zeroshot_out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.checkpoint)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zsrte", description="Zero-shot relation triplet extraction"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="generate seen/unseen label folds")
    p.add_argument("--corpus", required=True)
    p.add_argument("--m", type=int, required=True, help="unseen test label count")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated fold seeds")
    p.add_argument("--val-labels", type=int, default=5, help="unseen validation label count")
    p.add_argument("--out-dir", default="splits")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train on one fold")
    p.add_argument("--config", default=None, help="flat key = value config file")
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--corpus", default=None)
    p.add_argument("--splits-dir", dest="splits_dir", default=None)
    p.add_argument("--checkpoint-dir", dest="checkpoint_dir", default=None)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a fold's test set")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--fold", type=int, default=0)
    p.add_argument("--corpus", default=None)
    p.add_argument("--splits-dir", dest="splits_dir", default=None)
    p.add_argument("--out-dir", default=None)
    p.add_argument("--predictions", action="store_true", help="also write predictions JSONL")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="extract triplets from new sentences")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="JSONL with 'tokens' or 'text' per line")
    p.add_argument("--labels", required=True, help="candidate relation texts, one per line")
    p.add_argument("--out", default="predictions.jsonl")
    p.add_argument("--attention-out", dest="attention_out", default=None,
                   help="also dump attention matrices to this JSON file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("synth", help="generate a templated toy corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--multi-fraction", type=float, default=0.3)
    p.add_argument("--zeroshot-out", default=None)
    p.add_argument("--zeroshot-count", type=int, default=30)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP extraction service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CorpusFormatError, SpanValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
