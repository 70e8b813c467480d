"""Training objectives: relation selection BCE, bipartite matching between
predicted and gold boundary quadruples, the permutation-invariant entity
loss, and their weighted combination.

Gold boundary sets shorter than the query count are padded with null targets.
A null target costs nothing during matching; the query it lands on is
supervised toward the no-span sentinel (position 0) so unmatched queries
learn to abstain instead of firing arbitrarily.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import torch
from scipy.optimize import linear_sum_assignment

from .corpus import Instance
from .decoder import NULL_POSITION, BoundarySet
from .errors import ConfigError

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-7
LOG_FLOOR = 1e-12

Quad = tuple[int, int, int, int]


@dataclass(frozen=True)
class GoldBoundarySet:
    """Gold (head_start, head_end, tail_start, tail_end) subtoken quadruples
    for one (instance, relation) pair, padded to the query count with None."""

    quads: tuple[Quad | None, ...]

    def __len__(self) -> int:
        return len(self.quads)


@dataclass(frozen=True)
class Assignment:
    permutation: tuple[int, ...]  # query index -> gold index
    total_cost: float


def gold_boundary_set(
    instance: Instance,
    relation_text: str,
    alignment: dict[int, tuple[int, int]],
    num_queries: int,
) -> GoldBoundarySet:
    """Map an instance's gold word spans for one relation into subtoken
    quadruples, padded to the query count.

    Triplets whose spans were truncated away are skipped with a warning, as
    are triplets beyond the query count.
    """
    quads: list[Quad | None] = []
    for t in instance.triplets:
        if t.relation.text != relation_text:
            continue
        spans = (t.head[0], t.head[1], t.tail[0], t.tail[1])
        if any(w not in alignment for w in spans):
            logger.warning(
                "instance %s: gold span truncated out of the sequence, skipping a target",
                instance.id,
            )
            continue
        quads.append(
            (
                alignment[t.head[0]][0],
                alignment[t.head[1]][1],
                alignment[t.tail[0]][0],
                alignment[t.tail[1]][1],
            )
        )
    if len(quads) > num_queries:
        logger.warning(
            "instance %s relation %r: %d gold triplets exceed %d queries, keeping the first %d",
            instance.id, relation_text, len(quads), num_queries, num_queries,
        )
        quads = quads[:num_queries]
    quads.extend([None] * (num_queries - len(quads)))
    return GoldBoundarySet(tuple(quads))


def relation_loss(probs: torch.Tensor, gold_mask: torch.Tensor) -> torch.Tensor:
    """Mean binary cross-entropy over candidates; probabilities are clamped
    away from 0/1 before the logs."""
    p = probs.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR)
    y = gold_mask.to(p.dtype)
    return -(y * torch.log(p) + (1.0 - y) * torch.log(1.0 - p)).mean()


def match_cost(pred: torch.Tensor, gold: Quad | None) -> float:
    """Pairwise matching cost: negative sum of the four probabilities at the
    gold indices. Null (padding) targets cost zero."""
    if gold is None:
        return 0.0
    seq_len = pred.shape[-1]
    if any(not (0 <= g < seq_len) for g in gold):
        raise RuntimeError(f"gold boundary index {gold} out of range for length {seq_len}")
    return -float(sum(pred[k, gold[k]] for k in range(4)))


def cost_matrix(pred: torch.Tensor, gold_set: GoldBoundarySet) -> np.ndarray:
    """(queries x golds) matching costs for one relation row; pred has shape
    (N, 4, l)."""
    n = pred.shape[0]
    if len(gold_set) != n:
        raise ValueError(f"gold set length {len(gold_set)} != query count {n}")
    with torch.no_grad():
        matrix = np.zeros((n, n), dtype=np.float64)
        for j in range(n):
            for g, quad in enumerate(gold_set.quads):
                matrix[j, g] = match_cost(pred[j], quad)
    return matrix


def hungarian(cost: np.ndarray | Sequence[Sequence[float]]) -> Assignment:
    """Minimum-cost bijection between queries and gold slots.

    Ties are broken toward the lexicographically smallest permutation by
    greedily pinning the smallest column per row that still achieves the
    optimal total.
    """
    matrix = np.asarray(cost, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise ValueError("cost matrix contains non-finite entries")
    n = matrix.shape[0]
    row_ind, col_ind = linear_sum_assignment(matrix)
    best_total = float(sum(float(matrix[i, c]) for i, c in zip(row_ind, col_ind)))
    tol = 1e-9 * max(1.0, abs(best_total))

    perm: list[int] = []
    remaining = list(range(n))
    fixed = 0.0
    for i in range(n):
        chosen = None
        for c in remaining:  # remaining stays sorted
            rest = [x for x in remaining if x != c]
            if rest:
                sub = matrix[np.ix_(range(i + 1, n), rest)]
                ri, ci = linear_sum_assignment(sub)
                rest_total = float(sub[ri, ci].sum())
            else:
                rest_total = 0.0
            if fixed + float(matrix[i, c]) + rest_total <= best_total + tol:
                chosen = c
                break
        if chosen is None:  # numerical corner: fall back to the solver's pick
            chosen = int(col_ind[i]) if int(col_ind[i]) in remaining else remaining[0]
        perm.append(chosen)
        fixed += float(matrix[i, chosen])
        remaining.remove(chosen)

    total = float(sum(float(matrix[i, perm[i]]) for i in range(n)))
    return Assignment(permutation=tuple(perm), total_cost=total)


def entity_loss(
    boundaries: BoundarySet,
    gold_sets: Sequence[GoldBoundarySet],
    assignments: Sequence[Assignment],
) -> torch.Tensor:
    """Mean over all matched (query, target) pairs of the negative log
    probability mass on the target quadruple; null targets supervise the
    no-span sentinel."""
    probs = boundaries.probs
    if probs.shape[0] != len(gold_sets) or probs.shape[0] != len(assignments):
        raise ValueError("boundary rows, gold sets, and assignments must align")
    if probs.shape[0] == 0:
        return probs.new_zeros(())
    terms = []
    for row, (gold_set, assignment) in enumerate(zip(gold_sets, assignments)):
        for j, g in enumerate(assignment.permutation):
            quad = gold_set.quads[g]
            target = quad if quad is not None else (NULL_POSITION,) * 4
            heads = torch.arange(4, device=probs.device)
            positions = torch.tensor(target, device=probs.device)
            p = probs[row, j, heads, positions]
            terms.append(-torch.log(p.clamp_min(LOG_FLOOR)).sum())
    return torch.stack(terms).mean()


def bipartite_entity_loss(
    boundaries: BoundarySet, gold_sets: Sequence[GoldBoundarySet]
) -> tuple[torch.Tensor, list[Assignment]]:
    """Match every row with the Hungarian solver, then compute the entity
    loss under the optimal assignments."""
    assignments = [
        hungarian(cost_matrix(boundaries.probs[row], gold_sets[row]))
        for row in range(boundaries.rows)
    ]
    return entity_loss(boundaries, gold_sets, assignments), assignments


def total_loss(
    rel_loss: torch.Tensor | float,
    ent_loss: torch.Tensor | float,
    loss_weight: float,
) -> torch.Tensor | float:
    """Weighted combination: loss_weight * relation + (1 - loss_weight) * entity."""
    if not 0.0 <= loss_weight <= 1.0:
        raise ConfigError(f"loss_weight must be in [0, 1], got {loss_weight}")
    return loss_weight * rel_loss + (1.0 - loss_weight) * ent_loss
