"""
Loss - objective and average loss from the global statistics

Unfolding the weighted factorization objective with diagonal T gives, per view,

    J^(v) = tr(X^T W X) - 2 tr(U^T R) + tr(U^T U T) + alpha ||U||_F^2

With unit-norm present columns the first term is the number of present
(view, instance) pairs, so the whole objective is computable from R, T and U.
The average loss drops that constant and divides by the number of scanned
instances.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from model.stats import chunk_contribution
from model.types import DatasetMeta, FactorSet, GlobalStats, LossReport, MultiViewChunk

logger = logging.getLogger(__name__)


def _view_terms(
    R: Sequence[np.ndarray],
    T: Sequence[np.ndarray],
    factors: FactorSet,
    alpha: float
) -> Tuple[List[float], List[float], float]:
    if len(R) != len(factors.centers):
        raise ValueError(f"statistics have {len(R)} views but factors have {len(factors.centers)}")

    per_view_P, per_view_Q = [], []
    reg = 0.0
    for r, t, u in zip(R, T, factors.centers):
        if r.shape != u.shape:
            raise ValueError(f"R shape {r.shape} does not match U shape {u.shape}")
        col_sq = np.einsum("ij,ij->j", u, u)
        per_view_P.append(float(np.sum(u * r)))
        per_view_Q.append(float(np.dot(col_sq, t)))
        reg += alpha * float(col_sq.sum())
    return per_view_P, per_view_Q, reg


def objective(
    stats: GlobalStats,
    factors: FactorSet,
    alpha: float,
    scanned: int,
    meta: Optional[DatasetMeta] = None
) -> LossReport:
    """
    Evaluate the objective and the average loss.

    Args:
        stats: Statistics of every scanned chunk
        factors: Current centers
        alpha: Ridge weight (applied once per view)
        scanned: Instances scanned so far (min(s * t, N) in the first pass, N afterwards)
        meta: Optional dataset shape; when given, scanned must not exceed N

    Returns:
        LossReport
    """
    if scanned <= 0:
        raise ValueError(f"scanned must be positive to define the average loss, got {scanned}")
    if meta is not None and scanned > meta.n_instances:
        raise ValueError(f"scanned ({scanned}) exceeds n_instances ({meta.n_instances})")

    per_view_P, per_view_Q, reg = _view_terms(stats.R, stats.T, factors, alpha)
    variable = sum(-2.0 * p + q for p, q in zip(per_view_P, per_view_Q)) + reg

    return LossReport(
        objective=stats.present_pairs() + variable,
        average_loss=variable / scanned,
        scanned=scanned,
        per_view_P=per_view_P,
        per_view_Q=per_view_Q,
    )


def chunk_objective(
    stats_prev: GlobalStats,
    chunk: MultiViewChunk,
    labels: np.ndarray,
    factors: FactorSet,
    alpha: float
) -> float:
    """
    Objective over every scanned instance with the current chunk labeled by `labels`.

    stats_prev must exclude the chunk; it is not mutated.
    """
    delta_R, delta_T = chunk_contribution(chunk, labels, stats_prev.n_clusters)
    R = [r + dr for r, dr in zip(stats_prev.R, delta_R)]
    T = [t + dt for t, dt in zip(stats_prev.T, delta_T)]

    per_view_P, per_view_Q, reg = _view_terms(R, T, factors, alpha)
    present = int(sum(t.sum() for t in T))
    return present + sum(-2.0 * p + q for p, q in zip(per_view_P, per_view_Q)) + reg
