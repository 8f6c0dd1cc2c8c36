"""
Distances - squared instance-to-center distances summed over present views
"""

import numpy as np
from sklearn.metrics.pairwise import euclidean_distances

from model.types import FactorSet, MultiViewChunk


def compute_distances(chunk: MultiViewChunk, factors: FactorSet) -> np.ndarray:
    """
    d[i, j] = sum over views v where instance i is present of ||x_i^(v) - u_j^(v)||^2.

    Rows of instances absent from every view are zero.
    """
    if len(factors.centers) != chunk.n_views:
        raise ValueError(
            f"chunk has {chunk.n_views} views but factors have {len(factors.centers)}"
        )

    d = np.zeros((chunk.size, factors.n_clusters))
    for x, u, present in zip(chunk.data, factors.centers, chunk.mask_slice):
        if x.shape[0] != u.shape[0]:
            raise ValueError(f"view dimension {x.shape[0]} does not match centers {u.shape[0]}")
        if not present.any():
            continue
        d[present] += euclidean_distances(x[:, present].T, u.T, squared=True)
    return d
