"""
Update factors - closed-form center update from the global statistics

With the current chunk's labels fixed, each view's centers solve a ridge problem
whose normal equations only involve R and T. T is diagonal, so the inverse
reduces to a per-column division:

    U^(v)[:, k] = (R_prev^(v) + X_t^(v) V_t)[:, k] / (T_prev^(v)[k] + n_tk^(v) + alpha)

where n_tk^(v) counts present chunk instances of view v labeled k.
"""

import logging
from typing import Tuple

import numpy as np

from config import EPS_DEN
from model.stats import chunk_contribution
from model.types import FactorSet, GlobalStats, MultiViewChunk

logger = logging.getLogger(__name__)


def update_factors(
    stats_prev: GlobalStats,
    chunk: MultiViewChunk,
    labels: np.ndarray,
    alpha: float,
    is_first_chunk: bool = False
) -> Tuple[FactorSet, np.ndarray]:
    """
    Compute U^(v) for every view without mutating stats_prev.

    Args:
        stats_prev: Statistics of every scanned chunk except this one
        chunk: Current chunk
        labels: Current chunk labels
        alpha: Ridge weight
        is_first_chunk: Also flag clusters with no present instance of the view in this chunk

    Returns:
        (FactorSet, degenerate) where degenerate[v, k] marks columns whose
        denominator T[k] + alpha is at most EPS_DEN (or, on the first chunk,
        clusters the chunk leaves empty in that view); denominators are
        clamped to EPS_DEN.
    """
    delta_R, delta_T = chunk_contribution(chunk, labels, stats_prev.n_clusters)

    centers = []
    degenerate = np.zeros((stats_prev.n_views, stats_prev.n_clusters), dtype=bool)
    for v in range(stats_prev.n_views):
        r = stats_prev.R[v] + delta_R[v]
        denom = (stats_prev.T[v] + delta_T[v]).astype(float) + alpha
        degenerate[v] = denom <= EPS_DEN
        if is_first_chunk:
            degenerate[v] |= delta_T[v] == 0
        centers.append(r / np.maximum(denom, EPS_DEN))

    if degenerate.any():
        logger.debug(f"Chunk {chunk.chunk_index}: {int(degenerate.sum())} degenerate center column(s)")
    return FactorSet(centers), degenerate
