"""
Solver package: the streaming OPIMC driver and the offline IMC baseline
"""

from .opimc import ChunkResult, ChunkStep, RunResult, process_chunk, run
from .imc import ImcResult, imc_fit

__all__ = [
    "ChunkResult",
    "ChunkStep",
    "RunResult",
    "process_chunk",
    "run",
    "ImcResult",
    "imc_fit"
]
