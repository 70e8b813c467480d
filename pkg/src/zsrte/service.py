"""HTTP service exposing a trained checkpoint for extraction.

Clients post tokenized sentences plus a candidate relation set and get back
per-sentence relation probabilities and extracted triplets. The model loads
once at startup; requests are read-only against it.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .config import merge_config
from .corpus import RelationLabel
from .errors import ConfigError
from .infer import run_inference
from .model import build_tokenizer, load_checkpoint

CHECKPOINT_ENV = "ZSRTE_CHECKPOINT"


class SentenceIn(BaseModel):
    id: str | None = None
    tokens: list[str] | None = None
    text: str | None = None

    def words(self) -> list[str]:
        if self.tokens:
            return self.tokens
        if self.text:
            return self.text.split()
        raise ValueError("sentence needs 'tokens' or 'text'")


class ExtractRequest(BaseModel):
    sentences: list[SentenceIn] = Field(min_length=1)
    labels: list[str] = Field(min_length=1)


class RelationScore(BaseModel):
    label: str
    probability: float
    selected: bool


class TripletOut(BaseModel):
    head: tuple[int, int]
    head_words: list[str]
    tail: tuple[int, int]
    tail_words: list[str]
    relation: str
    score: float


class SentenceResult(BaseModel):
    id: str
    relations: list[RelationScore]
    triplets: list[TripletOut]


class ExtractResponse(BaseModel):
    results: list[SentenceResult]


class HealthResponse(BaseModel):
    status: str
    checkpoint: str
    encoder: str
    best_score: float | None = None


def create_app(checkpoint_dir: str | Path | None = None) -> FastAPI:
    checkpoint_dir = checkpoint_dir or os.environ.get(CHECKPOINT_ENV)
    if not checkpoint_dir:
        raise ConfigError(
            f"no checkpoint configured: pass create_app(path) or set {CHECKPOINT_ENV}"
        )
    model, model_config, extras = load_checkpoint(checkpoint_dir)
    tokenizer = build_tokenizer(model_config)
    cfg = merge_config(extras.get("run", {}))
    best = extras.get("best") or {}

    app = FastAPI(title="zsrte", description="Zero-shot relation triplet extraction")

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(
            status="ok",
            checkpoint=str(checkpoint_dir),
            encoder=model_config.encoder,
            best_score=best.get("score"),
        )

    @app.post("/extract", response_model=ExtractResponse)
    def extract_triplets(request: ExtractRequest):
        labels = [RelationLabel(i, t) for i, t in enumerate(sorted(set(request.labels)))]
        try:
            sentences = [
                (s.id if s.id is not None else str(i), s.words())
                for i, s in enumerate(request.sentences)
            ]
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        by_id = dict(sentences)
        if len(by_id) != len(sentences):
            raise HTTPException(status_code=422, detail="duplicate sentence ids")
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
        payload = []
        for sentence_id, _ in sentences:
            res = results[sentence_id]
            words = by_id[sentence_id]
            payload.append(
                SentenceResult(
                    id=sentence_id,
                    relations=[
                        RelationScore(
                            label=res.candidates[i].text,
                            probability=float(res.decision.probs[i]),
                            selected=bool(res.decision.mask[i]),
                        )
                        for i in range(len(res.candidates))
                    ],
                    triplets=[
                        TripletOut(
                            head=t.head,
                            head_words=list(words[t.head[0] : t.head[1] + 1]),
                            tail=t.tail,
                            tail_words=list(words[t.tail[0] : t.tail[1] + 1]),
                            relation=t.relation.text,
                            score=t.score,
                        )
                        for t in res.triplets
                    ],
                )
            )
        return ExtractResponse(results=payload)

    return app
