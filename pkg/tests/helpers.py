"""
Dataset builders shared by the test modules
"""

import numpy as np

from data import InMemorySource, make_synthetic, shuffle_instances, simulate_missing
from data.loader import MultiViewDataset
from model.types import MultiViewChunk, PresenceMask


def synthetic_dataset(n_clusters=3, dims=(20, 20), n_instances=300, noise=0.1, rate=0.0, seed=0):
    """Unit-norm Gaussian clusters, optionally with a simulated mask (class-sorted order)."""
    views, labels = make_synthetic(n_clusters, len(dims), list(dims), n_instances,
                                   separation=1.0, noise=noise, rng_seed=seed)
    dataset = MultiViewDataset(views, PresenceMask.full(len(dims), n_instances), n_clusters, labels)
    if rate > 0:
        dataset = dataset.with_mask(simulate_missing(dataset.meta, rate, seed))
    return dataset


def stream_of(dataset, shuffle_seed=None):
    """(InMemorySource, labels in stream order)"""
    if shuffle_seed is not None:
        dataset, _ = shuffle_instances(dataset, shuffle_seed)
    return InMemorySource(dataset.views, dataset.mask, dataset.n_clusters), dataset.labels


def random_chunk(rng, dims, size, missing=0.0, chunk_index=0, start=0):
    """A chunk of unit-norm random instances; at least one view stays present per instance."""
    mask = rng.random((len(dims), size)) >= missing
    orphans = ~mask.any(axis=0)
    mask[rng.integers(len(dims), size=orphans.sum()), np.flatnonzero(orphans)] = True
    data = []
    for v, d in enumerate(dims):
        x = rng.standard_normal((d, size))
        x /= np.linalg.norm(x, axis=0, keepdims=True)
        data.append(np.where(mask[v], x, 0.0))
    return MultiViewChunk(chunk_index=chunk_index, start=start, data=data, mask_slice=mask)
