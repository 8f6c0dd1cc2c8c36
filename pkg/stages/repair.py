"""
Repair - fill degenerate cluster centers

On the first chunk a degenerate column takes the mean of the chunk's present
instances in that view; on later chunks it keeps the value it had before the
update.
"""

import logging
from typing import Optional

import numpy as np

from model.types import FactorSet, MultiViewChunk

logger = logging.getLogger(__name__)


def repair_degenerate_centers(
    factors: FactorSet,
    degenerate_flags: np.ndarray,
    chunk: MultiViewChunk,
    prev_factors: Optional[FactorSet],
    is_first_chunk: bool
) -> FactorSet:
    """
    Args:
        factors: Centers straight out of update_factors
        degenerate_flags: n_views x K booleans
        chunk: Current chunk
        prev_factors: Centers before this update (the random initialization on the first chunk)
        is_first_chunk: Whether this is the first chunk of the first pass

    Returns:
        A new FactorSet; factors itself is left untouched
    """
    if not degenerate_flags.any():
        return factors

    repaired = factors.copy()
    for v, flags in enumerate(degenerate_flags):
        if not flags.any():
            continue
        columns = np.flatnonzero(flags)

        if is_first_chunk:
            present = chunk.mask_slice[v]
            if not present.any():
                logger.warning(
                    f"View {v} has no present instance in the first chunk; "
                    f"{columns.size} degenerate center(s) keep their initial values"
                )
                if prev_factors is not None:
                    repaired.centers[v][:, columns] = prev_factors.centers[v][:, columns]
                continue
            fill = chunk.data[v][:, present].mean(axis=1)
            repaired.centers[v][:, columns] = fill[:, None]
        elif prev_factors is not None:
            repaired.centers[v][:, columns] = prev_factors.centers[v][:, columns]

    return repaired
