"""
Model package: domain types and global statistics
"""

from .types import (
    Assignments,
    DatasetMeta,
    FactorSet,
    GlobalStats,
    IterationRecord,
    LossReport,
    MultiViewChunk,
    PresenceMask,
    SolverConfig
)
from .stats import (
    chunk_cluster_counts,
    chunk_contribution,
    dense_t_matrix,
    solver_state_nbytes,
    stats_apply_chunk,
    stats_init,
    stats_retract_chunk
)

__all__ = [
    "Assignments",
    "DatasetMeta",
    "FactorSet",
    "GlobalStats",
    "IterationRecord",
    "LossReport",
    "MultiViewChunk",
    "PresenceMask",
    "SolverConfig",
    "chunk_cluster_counts",
    "chunk_contribution",
    "dense_t_matrix",
    "solver_state_nbytes",
    "stats_apply_chunk",
    "stats_init",
    "stats_retract_chunk"
]
