"""Zero-shot relation triplet extraction.

Candidate relations are concatenated to the sentence and scored by a
selection head; surviving relations drive a set-prediction boundary decoder
that recovers head/tail entity spans, trained with a bipartite-matched,
permutation-invariant loss.
"""

from .augment import AugmentedGroup, all_candidates, build_group, sample_candidates
from .config import RunConfig, load_run_config
from .corpus import (
    Instance,
    RelationLabel,
    Triplet,
    ZeroShotSplit,
    load_corpus,
    make_splits,
)
from .decoder import BoundaryDecoder, BoundarySet
from .encoder import ContextualRepr, HFEncoder, TinyEncoder
from .evaluate import ScoreReport, average_folds, random_selector_baseline, score
from .infer import PredictedTriplet, extract, run_inference, top1
from .losses import (
    Assignment,
    GoldBoundarySet,
    entity_loss,
    hungarian,
    match_cost,
    relation_loss,
    total_loss,
)
from .model import ModelConfig, TripletExtractor, build_model, load_checkpoint, save_checkpoint
from .selector import RelationDecision, SelectionHead, filter_rows, make_mask
from .training import EarlyStopper, train, warmup_factor

__version__ = "0.1.0"

__all__ = [
    "AugmentedGroup",
    "Assignment",
    "BoundaryDecoder",
    "BoundarySet",
    "ContextualRepr",
    "EarlyStopper",
    "GoldBoundarySet",
    "HFEncoder",
    "Instance",
    "ModelConfig",
    "PredictedTriplet",
    "RelationDecision",
    "RelationLabel",
    "RunConfig",
    "ScoreReport",
    "SelectionHead",
    "TinyEncoder",
    "Triplet",
    "TripletExtractor",
    "ZeroShotSplit",
    "all_candidates",
    "average_folds",
    "build_group",
    "build_model",
    "entity_loss",
    "extract",
    "filter_rows",
    "hungarian",
    "load_checkpoint",
    "load_corpus",
    "load_run_config",
    "make_mask",
    "make_splits",
    "match_cost",
    "random_selector_baseline",
    "relation_loss",
    "run_inference",
    "sample_candidates",
    "save_checkpoint",
    "score",
    "top1",
    "total_loss",
    "train",
    "warmup_factor",
]
