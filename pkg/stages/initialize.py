"""
Initialize - random centers and labels for the very first chunk

Draws U^(v) entries i.i.d. uniform on [0, 1) and chunk labels i.i.d. uniform over
0..K-1 from a single seeded generator, views first, then labels.
"""

import logging
from typing import Tuple

import numpy as np

from model.types import FactorSet, MultiViewChunk, SolverConfig

logger = logging.getLogger(__name__)


def init_first_chunk(
    chunk: MultiViewChunk,
    n_clusters: int,
    cfg: SolverConfig
) -> Tuple[FactorSet, np.ndarray]:
    """
    Random starting point for the first chunk.

    Args:
        chunk: The first chunk of the first pass
        n_clusters: K
        cfg: Solver configuration (only rng_seed is used)

    Returns:
        (FactorSet with one d_v x K matrix per view, length-s label vector)
    """
    if chunk.present_count() < 1:
        raise ValueError(
            f"first chunk ({chunk.size} instances) has no present instance in any view; "
            f"the dataset cannot be initialized"
        )

    rng = np.random.default_rng(cfg.rng_seed)
    centers = [rng.random((x.shape[0], n_clusters)) for x in chunk.data]
    labels = rng.integers(0, n_clusters, size=chunk.size, dtype=np.int64)

    logger.debug(
        f"Initialized {len(centers)} view(s), K={n_clusters}, "
        f"{chunk.size} labels from seed {cfg.rng_seed}"
    )
    return FactorSet(centers), labels
