"""
Domain types shared by the solver, the offline baseline, the data layer and the
experiment backend.

Matrices follow the column-instance convention: a view is a d_v x N array whose
column j is instance j. Absent (view, instance) pairs are stored as zero columns.
"""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np


@dataclass
class DatasetMeta:
    """Shape and missingness summary of a multi-view dataset."""

    n_views: int
    n_instances: int
    dims: List[int]
    n_clusters: int
    missing_ratio: float = 0.0

    def validate(self) -> "DatasetMeta":
        if self.n_views < 1:
            raise ValueError(f"n_views must be positive, got {self.n_views}")
        if self.n_instances < 1:
            raise ValueError(f"n_instances must be positive, got {self.n_instances}")
        if len(self.dims) != self.n_views:
            raise ValueError(f"dims has {len(self.dims)} entries for {self.n_views} views")
        if any(d < 1 for d in self.dims):
            raise ValueError(f"every view dimension must be >= 1, got {self.dims}")
        if self.n_clusters < 1:
            raise ValueError(f"n_clusters must be positive, got {self.n_clusters}")
        if self.n_clusters > self.n_instances:
            raise ValueError(
                f"n_clusters ({self.n_clusters}) exceeds n_instances ({self.n_instances})"
            )
        if not 0.0 <= self.missing_ratio <= 1.0:
            raise ValueError(f"missing_ratio must lie in [0, 1], got {self.missing_ratio}")
        return self

    @classmethod
    def from_mask(cls, dims: List[int], mask: "PresenceMask", n_clusters: int) -> "DatasetMeta":
        return cls(
            n_views=mask.n_views,
            n_instances=mask.n_instances,
            dims=[int(d) for d in dims],
            n_clusters=int(n_clusters),
            missing_ratio=mask.missing_ratio(),
        ).validate()


@dataclass
class PresenceMask:
    """Indicator matrix M: bits[v, j] is True when instance j exists in view v."""

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2:
            raise ValueError(f"presence mask must be 2-D (n_views x N), got shape {bits.shape}")
        if bits.dtype != bool:
            if not np.isin(bits, (0, 1)).all():
                raise ValueError("presence mask entries must be 0 or 1")
            bits = bits.astype(bool)
        self.bits = bits

    @property
    def n_views(self) -> int:
        return self.bits.shape[0]

    @property
    def n_instances(self) -> int:
        return self.bits.shape[1]

    def validate(self) -> "PresenceMask":
        orphans = np.flatnonzero(~self.bits.any(axis=0))
        if orphans.size:
            raise ValueError(
                f"{orphans.size} instance(s) are absent from every view (first: {orphans[0]})"
            )
        return self

    def missing_ratio(self) -> float:
        present = int(self.bits.sum())
        return 1.0 - present / (self.n_views * self.n_instances)

    def columns(self, start: int, stop: int) -> np.ndarray:
        return self.bits[:, start:stop]

    @classmethod
    def full(cls, n_views: int, n_instances: int) -> "PresenceMask":
        return cls(np.ones((n_views, n_instances), dtype=bool))


@dataclass
class MultiViewChunk:
    """A contiguous slice of instances [start, start + size) across all views."""

    chunk_index: int
    start: int
    data: List[np.ndarray]
    mask_slice: np.ndarray

    @property
    def size(self) -> int:
        return self.mask_slice.shape[1]

    @property
    def stop(self) -> int:
        return self.start + self.size

    @property
    def n_views(self) -> int:
        return len(self.data)

    def present_count(self) -> int:
        return int(self.mask_slice.sum())


@dataclass
class FactorSet:
    """Per-view center matrices U^(v), each d_v x K."""

    centers: List[np.ndarray]

    @property
    def n_clusters(self) -> int:
        return self.centers[0].shape[1]

    def copy(self) -> "FactorSet":
        return FactorSet([u.copy() for u in self.centers])

    def is_finite(self) -> bool:
        return all(np.isfinite(u).all() for u in self.centers)

    def permuted(self, order: np.ndarray) -> "FactorSet":
        """Columns reordered so that new column j is old column order[j]."""
        return FactorSet([u[:, order] for u in self.centers])


@dataclass
class Assignments:
    """Hard 1-of-K assignment, stored as one cluster index per instance."""

    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_clusters):
            raise ValueError(f"labels must lie in 0..{self.n_clusters - 1}")

    def indicator(self) -> np.ndarray:
        """The N x K matrix V."""
        return np.eye(self.n_clusters)[self.labels]


@dataclass
class GlobalStats:
    """
    Accumulators R^(v) (d_v x K) and diag(T^(v)) (length K), plus the labels each
    chunk last contributed with, so a revisit can replace rather than accumulate.
    """

    R: List[np.ndarray]
    T: List[np.ndarray]
    chunk_labels: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n_views(self) -> int:
        return len(self.R)

    @property
    def n_clusters(self) -> int:
        return self.R[0].shape[1]

    def copy(self) -> "GlobalStats":
        return GlobalStats(
            R=[r.copy() for r in self.R],
            T=[t.copy() for t in self.T],
            chunk_labels={k: v.copy() for k, v in self.chunk_labels.items()},
        )

    def present_pairs(self) -> int:
        """Number of scanned (view, instance) pairs that are present."""
        return int(sum(t.sum() for t in self.T))


@dataclass
class SolverConfig:
    alpha: float = 0.1
    chunk_size: int = 50
    max_inner_iters: int = 20
    n_passes: int = 1
    rng_seed: int = 0
    fill_degenerate: bool = True

    def validate(self) -> "SolverConfig":
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if self.max_inner_iters < 1:
            raise ValueError(f"max_inner_iters must be >= 1, got {self.max_inner_iters}")
        if self.n_passes < 1:
            raise ValueError(f"n_passes must be >= 1, got {self.n_passes}")
        return self

    def echo(self) -> Dict[str, object]:
        return {
            "alpha": self.alpha,
            "chunk_size": self.chunk_size,
            "max_inner_iters": self.max_inner_iters,
            "n_passes": self.n_passes,
            "rng_seed": self.rng_seed,
            "fill_degenerate": self.fill_degenerate,
        }


@dataclass
class LossReport:
    objective: float
    average_loss: float
    scanned: int
    per_view_P: List[float]
    per_view_Q: List[float]


@dataclass
class IterationRecord:
    """Snapshot handed to process_chunk observers after each inner iteration."""

    iteration: int
    labels: np.ndarray
    factors: FactorSet
    next_labels: np.ndarray
    objective_after_update: float
    objective_after_repair: float
    objective_after_assign: float
    repaired: bool
