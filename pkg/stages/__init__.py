"""
Stages package for the OPIMC solver

Contains one module per step of the per-chunk alternating minimization:
- initialize: random centers and labels for the first chunk
- update_factors: closed-form center update from global statistics
- repair: filling of degenerate cluster centers
- distances: masked squared distances to the centers
- assign: 1-of-K assignment with sticky tie-break
- loss: objective and average loss from statistics
"""

from .initialize import init_first_chunk
from .update_factors import update_factors
from .repair import repair_degenerate_centers
from .distances import compute_distances
from .assign import assign_chunk
from .loss import chunk_objective, objective

__all__ = [
    "init_first_chunk",
    "update_factors",
    "repair_degenerate_centers",
    "compute_distances",
    "assign_chunk",
    "chunk_objective",
    "objective"
]
