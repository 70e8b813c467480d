"""Shared test oracles."""

import itertools
import random

import numpy as np
import torch

from zsrte.augment import build_group, sample_candidates
from zsrte.corpus import Instance, RelationLabel, Triplet
from zsrte.decoder import BoundaryDecoder
from zsrte.encoder import TinyEncoder
from zsrte.losses import bipartite_entity_loss, gold_boundary_set, relation_loss, total_loss
from zsrte.model import TripletExtractor
from zsrte.selector import RelationDecision, SelectionHead
from zsrte.tokenization import HashTokenizer


def brute_force_assignment(cost):
    """Exhaustive minimum over all permutations; totals summed in row order
    exactly like the solver reports them."""
    matrix = np.asarray(cost, dtype=np.float64)
    n = matrix.shape[0]
    best_total, best_perm = None, None
    for perm in itertools.permutations(range(n)):
        total = float(sum(float(matrix[i, perm[i]]) for i in range(n)))
        if best_total is None or total < best_total or (total == best_total and perm < best_perm):
            best_total, best_perm = total, perm
    return best_total, best_perm


def tiny_training_setup(seed=0, hidden=16, vocab=64, max_len=32, queries=2, group_size=3):
    """One training instance plus a float64 tiny model, for gradient checks."""
    labels = [
        RelationLabel(0, "works for company"),
        RelationLabel(1, "born in city"),
        RelationLabel(2, "plays instrument"),
        RelationLabel(3, "author of book"),
    ]
    instance = Instance(
        id="grad",
        words=("Ann", "works", "for", "Acme", "Corp", "and", "plays", "piano", "."),
        triplets=(
            Triplet((0, 0), (3, 4), labels[0]),
            Triplet((0, 0), (7, 7), labels[2]),
        ),
    )
    tokenizer = HashTokenizer(vocab_size=vocab, piece_chars=4)
    torch.manual_seed(seed)
    model = TripletExtractor(
        TinyEncoder(vocab_size=vocab, hidden=hidden, layers=2, heads=2, max_len=max_len),
        SelectionHead(hidden),
        BoundaryDecoder(hidden, queries=queries, heads=2),
    ).double()
    candidates = sample_candidates(instance, labels, group_size, random.Random(seed))
    group = build_group(instance, candidates, tokenizer, max_len)
    gold_sets_by_row = {
        i: gold_boundary_set(instance, group.candidates[i].text, group.word_alignment, queries)
        for i in range(len(candidates))
        if group.gold_mask[i] > 0
    }
    return model, group, gold_sets_by_row


def training_loss(model, group, gold_sets_by_row, loss_weight=0.5):
    repr_ = model.encode(group)
    probs = model.select(repr_)
    rel = relation_loss(probs, group.gold_mask)
    decision = RelationDecision.from_probs(probs, "train", gold_mask=group.gold_mask)
    boundaries = model.decode_kept(group, repr_, decision)
    gold_sets = [gold_sets_by_row[i] for i in decision.kept_indices]
    ent, _ = bipartite_entity_loss(boundaries, gold_sets)
    return total_loss(rel, ent, loss_weight)


def finite_difference_check(model, loss_fn, step=1e-5, tolerance=1e-4, coords_per_tensor=4, seed=0):
    """Compare autograd gradients against central finite differences on a few
    coordinates of every parameter tensor.

    Coordinates are half the largest-gradient entries, half random, so both
    load-bearing and incidental directions are exercised. Returns a list of
    (name, coordinate, analytic, numeric, relative_error) failures.
    """
    model.zero_grad()
    loss = loss_fn()
    loss.backward()
    grads = {name: p.grad.detach().clone() for name, p in model.named_parameters()}

    rng = np.random.default_rng(seed)
    failures = []
    with torch.no_grad():
        for name, param in model.named_parameters():
            grad = grads[name]
            flat = param.view(-1)
            n = flat.numel()
            by_magnitude = torch.argsort(grad.view(-1).abs(), descending=True)
            picks = set(int(i) for i in by_magnitude[: coords_per_tensor // 2])
            while len(picks) < min(coords_per_tensor, n):
                picks.add(int(rng.integers(0, n)))
            for idx in sorted(picks):
                original = float(flat[idx])
                flat[idx] = original + step
                plus = float(loss_fn())
                flat[idx] = original - step
                minus = float(loss_fn())
                flat[idx] = original
                numeric = (plus - minus) / (2 * step)
                analytic = float(grad.view(-1)[idx])
                denom = max(abs(analytic), abs(numeric), 1e-6)
                rel_err = abs(analytic - numeric) / denom
                if rel_err > tolerance:
                    failures.append((name, idx, analytic, numeric, rel_err))
    return failures
