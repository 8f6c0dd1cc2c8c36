"""
Global statistics R and T

R^(v) = sum_i X_i^(v) V_i and T^(v) = sum_i V_i^T W_i^(v) V_i summarize every
scanned chunk. Under 1-of-K coding T^(v) is diagonal, so only its diagonal
(per-cluster present counts) is stored.

Each chunk's last labels are kept so that a second visit replaces the chunk's
contribution instead of adding it twice.
"""

import logging
from typing import List, Tuple

import numpy as np

from model.types import Assignments, DatasetMeta, FactorSet, GlobalStats, MultiViewChunk

logger = logging.getLogger(__name__)


def stats_init(meta: DatasetMeta) -> GlobalStats:
    """All-zero statistics for a dataset."""
    K = meta.n_clusters
    return GlobalStats(
        R=[np.zeros((d, K)) for d in meta.dims],
        T=[np.zeros(K, dtype=np.int64) for _ in meta.dims],
    )


def check_labels(labels: np.ndarray, size: int, n_clusters: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (size,):
        raise ValueError(f"expected {size} labels, got shape {labels.shape}")
    if size and (labels.min() < 0 or labels.max() >= n_clusters):
        raise ValueError(
            f"labels out of range 0..{n_clusters - 1}: min={labels.min()}, max={labels.max()}"
        )
    return labels


def chunk_cluster_counts(chunk: MultiViewChunk, labels: np.ndarray, n_clusters: int) -> np.ndarray:
    """n_views x K counts of present chunk instances per cluster (the chunk's diag(V^T W V))."""
    return np.stack([
        np.bincount(labels[present], minlength=n_clusters)
        for present in chunk.mask_slice
    ]).astype(np.int64)


def chunk_contribution(
    chunk: MultiViewChunk,
    labels: np.ndarray,
    n_clusters: int
) -> Tuple[List[np.ndarray], np.ndarray]:
    """(X_t^(v) V_t for each view, per-view present counts per cluster)."""
    indicator = Assignments(labels, n_clusters).indicator()
    delta_R = [x @ indicator for x in chunk.data]
    delta_T = chunk_cluster_counts(chunk, labels, n_clusters)
    return delta_R, delta_T


def _add(stats: GlobalStats, delta_R: List[np.ndarray], delta_T: np.ndarray, sign: int) -> None:
    for v in range(stats.n_views):
        if sign > 0:
            stats.R[v] += delta_R[v]
            stats.T[v] += delta_T[v]
        else:
            stats.R[v] -= delta_R[v]
            stats.T[v] -= delta_T[v]


def stats_retract_chunk(stats: GlobalStats, chunk: MultiViewChunk) -> bool:
    """
    Remove a chunk's previously applied contribution in place.

    Returns False when the chunk has never been applied.
    """
    previous = stats.chunk_labels.pop(chunk.chunk_index, None)
    if previous is None:
        return False
    delta_R, delta_T = chunk_contribution(chunk, previous, stats.n_clusters)
    _add(stats, delta_R, delta_T, sign=-1)
    return True


def stats_apply_chunk(stats: GlobalStats, chunk: MultiViewChunk, labels: np.ndarray) -> GlobalStats:
    """
    Fold a chunk's assignment into the statistics (in place, returned for chaining).

    A chunk that was applied before has its old contribution subtracted first.
    """
    labels = check_labels(labels, chunk.size, stats.n_clusters)
    replaced = stats_retract_chunk(stats, chunk)
    delta_R, delta_T = chunk_contribution(chunk, labels, stats.n_clusters)
    _add(stats, delta_R, delta_T, sign=1)
    stats.chunk_labels[chunk.chunk_index] = labels.copy()
    if replaced:
        logger.debug(f"Replaced statistics contribution of chunk {chunk.chunk_index}")
    return stats


def dense_t_matrix(labels: np.ndarray, present: np.ndarray, n_clusters: int) -> np.ndarray:
    """V^T W V built explicitly (K x K); only for verifying the diagonal storage."""
    indicator = Assignments(labels, n_clusters).indicator()
    weights = np.diag(present.astype(float))
    return indicator.T @ weights @ indicator


def solver_state_nbytes(stats: GlobalStats, factors: FactorSet) -> int:
    """Bytes held by R, T and U; the per-chunk label records are excluded."""
    return (
        sum(r.nbytes for r in stats.R)
        + sum(t.nbytes for t in stats.T)
        + sum(u.nbytes for u in factors.centers)
    )
