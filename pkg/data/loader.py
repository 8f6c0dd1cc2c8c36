"""
Dataset loading and persistence

A dataset on disk is described by a JSON manifest:

    {"views": ["view_0.csv", "view_1.mvc"], "mask": "mask.csv",
     "labels": "labels.txt", "n_clusters": 3}

Paths are relative to the manifest's directory; "mask" and "labels" may be null.
The mask is authoritative: absent (view, instance) columns are zeroed at load
whatever the file holds.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from data.formats import read_csv_matrix, read_matrix, write_csv_matrix, write_matrix
from model.types import DatasetMeta, PresenceMask

logger = logging.getLogger(__name__)


@dataclass
class DatasetManifest:
    view_paths: List[str]
    mask_path: Optional[str] = None
    labels_path: Optional[str] = None
    n_clusters: Optional[int] = None
    meta: Optional[DatasetMeta] = None

    @classmethod
    def from_file(cls, path: str) -> "DatasetManifest":
        with open(path, "r") as f:
            raw = json.load(f)
        if not isinstance(raw, dict) or not raw.get("views"):
            raise ValueError(f"manifest {path} must be a JSON object with a non-empty 'views' list")

        base = os.path.dirname(os.path.abspath(path))

        def resolve(p):
            return None if p is None else os.path.join(base, p)

        n_clusters = raw.get("n_clusters")
        return cls(
            view_paths=[resolve(p) for p in raw["views"]],
            mask_path=resolve(raw.get("mask")),
            labels_path=resolve(raw.get("labels")),
            n_clusters=None if n_clusters is None else int(n_clusters),
        )

    def to_file(self, path: str) -> None:
        base = os.path.dirname(os.path.abspath(path))

        def relative(p):
            return None if p is None else os.path.relpath(p, base)

        with open(path, "w") as f:
            json.dump({
                "views": [relative(p) for p in self.view_paths],
                "mask": relative(self.mask_path),
                "labels": relative(self.labels_path),
                "n_clusters": self.n_clusters,
            }, f, indent=2)


@dataclass
class MultiViewDataset:
    """Resident views (d_v x N each), presence mask, optional ground-truth labels."""

    views: List[np.ndarray]
    mask: PresenceMask
    n_clusters: int
    labels: Optional[np.ndarray] = None
    source_paths: List[str] = field(default_factory=list)

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_instances(self) -> int:
        return self.mask.n_instances

    @property
    def dims(self) -> List[int]:
        return [x.shape[0] for x in self.views]

    @property
    def meta(self) -> DatasetMeta:
        return DatasetMeta.from_mask(self.dims, self.mask, self.n_clusters)

    def take(self, order: np.ndarray) -> "MultiViewDataset":
        """Instances reordered so that new instance i is old instance order[i]."""
        return MultiViewDataset(
            views=[x[:, order] for x in self.views],
            mask=PresenceMask(self.mask.bits[:, order]),
            n_clusters=self.n_clusters,
            labels=None if self.labels is None else self.labels[order],
            source_paths=list(self.source_paths),
        )

    def with_mask(self, mask: PresenceMask) -> "MultiViewDataset":
        """Same data under a new mask; newly absent columns are zeroed."""
        return MultiViewDataset(
            views=[np.where(mask.bits[v], x, 0.0) for v, x in enumerate(self.views)],
            mask=mask,
            n_clusters=self.n_clusters,
            labels=self.labels,
            source_paths=list(self.source_paths),
        )


def load_view(
    path: str,
    expected_dims: Optional[Tuple[Optional[int], Optional[int]]] = None,
    mask_row: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Load one d_v x N view.

    Args:
        path: CSV or MVC1 file
        expected_dims: (d, N); either entry may be None to skip that check
        mask_row: Presence of each instance in this view; absent columns are zeroed

    Raises:
        ValueError on shape mismatch, non-numeric tokens or NaN in a present column
    """
    x = read_matrix(path)
    if x.ndim != 2:
        raise ValueError(f"{path}: expected a 2-D matrix, got shape {x.shape}")

    if expected_dims is not None:
        d, n = expected_dims
        if (d is not None and x.shape[0] != d) or (n is not None and x.shape[1] != n):
            raise ValueError(f"{path}: shape {x.shape} does not match expected ({d}, {n})")

    present = np.ones(x.shape[1], dtype=bool) if mask_row is None else np.asarray(mask_row, dtype=bool)
    if present.shape != (x.shape[1],):
        raise ValueError(f"{path}: mask row has {present.size} entries for {x.shape[1]} instances")

    bad = present & np.isnan(x).any(axis=0)
    if bad.any():
        raise ValueError(f"{path}: NaN in present instance {int(np.flatnonzero(bad)[0])}")

    return np.where(present, x, 0.0)


def load_mask(path: str, n_views: Optional[int] = None, n_instances: Optional[int] = None) -> PresenceMask:
    """n_views x N CSV of 0/1; every instance must be present in at least one view."""
    bits = read_csv_matrix(path)
    mask = PresenceMask(bits)
    if n_views is not None and mask.n_views != n_views:
        raise ValueError(f"{path}: mask has {mask.n_views} rows for {n_views} views")
    if n_instances is not None and mask.n_instances != n_instances:
        raise ValueError(f"{path}: mask has {mask.n_instances} columns for {n_instances} instances")
    return mask.validate()


def load_labels(path: str, n_instances: Optional[int] = None) -> np.ndarray:
    """One integer label per line."""
    values = read_csv_matrix(path).ravel()
    if not np.all(np.isfinite(values)) or not np.all(values == np.round(values)):
        raise ValueError(f"{path}: labels must be integers")
    if n_instances is not None and values.size != n_instances:
        raise ValueError(f"{path}: {values.size} labels for {n_instances} instances")
    return values.astype(np.int64)


def resolve_manifest(
    manifest_path: Optional[str] = None,
    view_paths: Optional[Sequence[str]] = None,
    mask_path: Optional[str] = None,
    labels_path: Optional[str] = None
) -> DatasetManifest:
    """A manifest from file and/or explicit paths; explicit paths win."""
    manifest = DatasetManifest.from_file(manifest_path) if manifest_path else DatasetManifest(view_paths=[])
    if view_paths:
        manifest.view_paths = list(view_paths)
    if mask_path:
        manifest.mask_path = mask_path
    if labels_path:
        manifest.labels_path = labels_path
    if not manifest.view_paths:
        raise ValueError("no view files given")
    return manifest


def resolve_n_clusters(n_clusters: Optional[int], manifest: DatasetManifest, labels: Optional[np.ndarray]) -> int:
    """K from the explicit value, else the manifest, else the number of distinct labels."""
    K = n_clusters or manifest.n_clusters
    if K is None:
        if labels is None:
            raise ValueError("number of clusters unknown: pass it explicitly or supply labels")
        K = int(np.unique(labels).size)
    return int(K)


def load_dataset(
    manifest_path: Optional[str] = None,
    n_clusters: Optional[int] = None,
    view_paths: Optional[Sequence[str]] = None,
    mask_path: Optional[str] = None,
    labels_path: Optional[str] = None
) -> MultiViewDataset:
    """
    Load a dataset from a manifest, or from explicit paths (which override the
    manifest's entries when both are given).
    """
    manifest = resolve_manifest(manifest_path, view_paths, mask_path, labels_path)

    raw = [read_matrix(p) for p in manifest.view_paths]
    N = raw[0].shape[1]
    mask = (
        load_mask(manifest.mask_path, len(raw), N)
        if manifest.mask_path else PresenceMask.full(len(raw), N)
    )
    views = [
        load_view(p, (None, N), mask.bits[v])
        for v, p in enumerate(manifest.view_paths)
    ]
    labels = load_labels(manifest.labels_path, N) if manifest.labels_path else None

    K = resolve_n_clusters(n_clusters, manifest, labels)
    dataset = MultiViewDataset(views, mask, K, labels, list(manifest.view_paths))
    manifest.n_clusters = dataset.n_clusters
    manifest.meta = dataset.meta
    logger.info(
        f"Loaded dataset: {dataset.n_views} view(s) {dataset.dims}, N={N}, K={dataset.n_clusters}, "
        f"missing ratio {manifest.meta.missing_ratio:.3f}, labels={'yes' if labels is not None else 'no'}"
    )
    return dataset


def save_dataset(dataset: MultiViewDataset, out_dir: str, fmt: str = "csv") -> str:
    """
    Write views, mask.csv, labels.txt and manifest.json into out_dir.

    Args:
        fmt: "csv" or "mvc1" for the view files

    Returns:
        Path of the written manifest
    """
    if fmt not in ("csv", "mvc1"):
        raise ValueError(f"unknown view format {fmt!r} (expected 'csv' or 'mvc1')")
    os.makedirs(out_dir, exist_ok=True)

    suffix = ".csv" if fmt == "csv" else ".mvc"
    view_paths = []
    for v, x in enumerate(dataset.views):
        path = os.path.join(out_dir, f"view_{v}{suffix}")
        write_matrix(path, x)
        view_paths.append(path)

    mask_path = os.path.join(out_dir, "mask.csv")
    write_csv_matrix(mask_path, dataset.mask.bits, integer=True)

    labels_path = None
    if dataset.labels is not None:
        labels_path = os.path.join(out_dir, "labels.txt")
        write_csv_matrix(labels_path, dataset.labels.reshape(-1, 1), integer=True)

    manifest_path = os.path.join(out_dir, "manifest.json")
    DatasetManifest(view_paths, mask_path, labels_path, dataset.n_clusters).to_file(manifest_path)
    logger.info(f"Saved dataset ({dataset.n_views} view(s), N={dataset.n_instances}) to {manifest_path}")
    return manifest_path
