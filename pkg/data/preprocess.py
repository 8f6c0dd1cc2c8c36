"""
Preprocessing: hypersphere normalization, missingness simulation, shuffling
"""

import logging
from typing import Tuple

import numpy as np
from sklearn.preprocessing import normalize

from data.loader import MultiViewDataset
from model.types import DatasetMeta, PresenceMask

logger = logging.getLogger(__name__)


def normalize_instances(x: np.ndarray, mask_row: np.ndarray) -> np.ndarray:
    """
    Scale every present column of a d x N view to unit Euclidean norm.

    Absent columns are returned as zeros. A present all-zero column cannot be
    normalized and raises ValueError.
    """
    present = np.asarray(mask_row, dtype=bool)
    filled = np.where(present, np.asarray(x, dtype=float), 0.0)

    zero = present & ~np.any(filled != 0.0, axis=0)
    if zero.any():
        raise ValueError(
            f"{int(zero.sum())} present instance(s) are all-zero and cannot be normalized "
            f"(first: column {int(np.flatnonzero(zero)[0])})"
        )
    return normalize(filled, norm="l2", axis=0)


def normalize_dataset(dataset: MultiViewDataset) -> MultiViewDataset:
    views = [normalize_instances(x, dataset.mask.bits[v]) for v, x in enumerate(dataset.views)]
    return MultiViewDataset(views, dataset.mask, dataset.n_clusters, dataset.labels, list(dataset.source_paths))


def missing_count(rate: float, n_instances: int) -> int:
    """round(rate * N), rounding halves up."""
    return int(np.floor(rate * n_instances + 0.5))


def simulate_missing(meta: DatasetMeta, rate: float, rng_seed: int) -> PresenceMask:
    """
    Remove round(rate * N) instances from every view, uniformly at random.

    An instance that ends up absent from every view is put back into one randomly
    chosen view; to keep that view's count, another instance that is still present
    elsewhere is removed from it when one exists.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"missing rate must lie in [0, 1), got {rate}")

    n_views, N = meta.n_views, meta.n_instances
    m = missing_count(rate, N)
    if n_views * m > (n_views - 1) * N:
        raise ValueError(
            f"missing rate {rate} is infeasible for {n_views} view(s) and N={N}: "
            f"{n_views * m} removals leave some instance absent from every view"
        )

    rng = np.random.default_rng(rng_seed)
    bits = np.ones((n_views, N), dtype=bool)
    for v in range(n_views):
        bits[v, rng.choice(N, size=m, replace=False)] = False

    orphans = np.flatnonzero(~bits.any(axis=0))
    counts = bits.sum(axis=0)
    unbalanced = 0
    for j in orphans:
        v = int(rng.integers(n_views))
        bits[v, j] = True
        counts[j] += 1
        candidates = np.flatnonzero(bits[v] & (counts >= 2))
        if candidates.size:
            k = rng.choice(candidates)
            bits[v, k] = False
            counts[k] -= 1
        else:
            unbalanced += 1

    if orphans.size:
        logger.debug(f"Repaired {orphans.size} all-absent instance(s), {unbalanced} without count balance")

    return PresenceMask(bits).validate()


def shuffle_instances(dataset: MultiViewDataset, rng_seed: int) -> Tuple[MultiViewDataset, np.ndarray]:
    """
    Apply one random permutation to every view, the mask and the labels.

    Returns the shuffled dataset and the permutation (new position i holds old
    instance perm[i]; np.argsort(perm) undoes it).
    """
    perm = np.random.default_rng(rng_seed).permutation(dataset.n_instances)
    return dataset.take(perm), perm
