"""
Data package: view files, dataset manifests, preprocessing and chunk streams
"""

from .formats import open_mvc1, read_matrix, read_mvc1_header, write_matrix, write_mvc1
from .loader import (
    DatasetManifest,
    MultiViewDataset,
    load_dataset,
    load_labels,
    load_mask,
    load_view,
    save_dataset
)
from .preprocess import normalize_dataset, normalize_instances, shuffle_instances, simulate_missing
from .synthetic import make_synthetic
from .stream import BinaryFileSource, ChunkSource, InMemorySource

__all__ = [
    "open_mvc1",
    "read_matrix",
    "read_mvc1_header",
    "write_matrix",
    "write_mvc1",
    "DatasetManifest",
    "MultiViewDataset",
    "load_dataset",
    "load_labels",
    "load_mask",
    "load_view",
    "save_dataset",
    "normalize_dataset",
    "normalize_instances",
    "shuffle_instances",
    "simulate_missing",
    "make_synthetic",
    "BinaryFileSource",
    "ChunkSource",
    "InMemorySource"
]
