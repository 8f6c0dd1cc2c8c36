"""
Synthetic multi-view Gaussian clusters
"""

from typing import List, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import normalize


def make_synthetic(
    n_clusters: int,
    n_views: int,
    dims: Sequence[int],
    n_instances: int,
    separation: float,
    noise: float,
    rng_seed: int
) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Generate views sharing one balanced, class-sorted label vector.

    Per view, K centers are drawn on the sphere of radius `separation`; each
    instance is its class center plus isotropic Gaussian noise of standard
    deviation `noise`, and is finally scaled to unit norm.

    Returns:
        (list of d_v x N views, length-N labels)
    """
    if n_clusters < 1:
        raise ValueError(f"n_clusters must be positive, got {n_clusters}")
    if separation <= 0:
        raise ValueError(f"separation must be positive, got {separation}")
    if noise < 0:
        raise ValueError(f"noise must be >= 0, got {noise}")
    if len(dims) != n_views:
        raise ValueError(f"dims has {len(dims)} entries for {n_views} views")
    if n_instances < n_clusters:
        raise ValueError(f"n_instances ({n_instances}) is smaller than n_clusters ({n_clusters})")

    rng = np.random.default_rng(rng_seed)
    labels = (np.arange(n_instances) * n_clusters) // n_instances

    views = []
    for d in dims:
        centers = normalize(rng.standard_normal((d, n_clusters)), axis=0) * separation
        x = centers[:, labels] + noise * rng.standard_normal((d, n_instances))
        views.append(normalize(x, norm="l2", axis=0))
    return views, labels.astype(np.int64)
