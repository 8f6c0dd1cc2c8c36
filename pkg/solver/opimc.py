"""
One-pass incomplete multi-view clustering

Chunks are processed in stream order. For each chunk the solver alternates

    update_factors -> repair_degenerate_centers -> compute_distances -> assign_chunk

until the chunk's labels stop changing (or max_inner_iters is reached), then folds
the chunk into the global statistics. Later passes replace a chunk's previous
contribution instead of adding a second copy.

Each pass is wrapped in an MLflow span.
"""

import logging
from typing import Callable, List, NamedTuple, Optional

import mlflow
import numpy as np

from data.stream import ChunkSource
from model.stats import check_labels, stats_apply_chunk, stats_init, stats_retract_chunk
from model.types import (
    Assignments,
    FactorSet,
    GlobalStats,
    IterationRecord,
    LossReport,
    MultiViewChunk,
    SolverConfig
)
from stages import (
    assign_chunk,
    chunk_objective,
    compute_distances,
    init_first_chunk,
    objective,
    repair_degenerate_centers,
    update_factors
)

logger = logging.getLogger(__name__)


class ChunkResult(NamedTuple):
    factors: FactorSet
    labels: np.ndarray
    inner_iters: int


class ChunkStep(NamedTuple):
    """One entry of the per-chunk trace."""
    pass_index: int
    chunk_index: int
    stop: int
    inner_iters: int
    report: LossReport


class RunResult(NamedTuple):
    factors: FactorSet
    assignments: Assignments
    trace: List[ChunkStep]
    stats: GlobalStats


def process_chunk(
    stats: GlobalStats,
    factors: Optional[FactorSet],
    chunk: MultiViewChunk,
    cfg: SolverConfig,
    prev_labels: Optional[np.ndarray] = None,
    initial_labels: Optional[np.ndarray] = None,
    on_iteration: Optional[Callable[[IterationRecord], None]] = None
) -> ChunkResult:
    """
    Cluster one chunk against the statistics of everything scanned before it.

    Args:
        stats: Global statistics excluding this chunk (not mutated)
        factors: Current centers, or None for the very first chunk, which is
            then initialized randomly from cfg.rng_seed
        chunk: Chunk to process
        cfg: Solver configuration
        prev_labels: Labels this chunk had in the previous pass, used as the
            tie-break reference for the initial assignment
        initial_labels: Starting labels overriding the default initialization
        on_iteration: Called with an IterationRecord after every inner iteration;
            objectives are only evaluated when it is set

    Returns:
        ChunkResult(factors, labels, inner_iters). The caller applies the
        labels to the statistics.
    """
    K = stats.n_clusters
    is_first_chunk = factors is None

    if is_first_chunk:
        factors, labels = init_first_chunk(chunk, K, cfg)
    else:
        labels = assign_chunk(compute_distances(chunk, factors), prev_labels)

    if initial_labels is not None:
        labels = check_labels(initial_labels, chunk.size, K).copy()

    current = factors
    iteration = 0
    for iteration in range(1, cfg.max_inner_iters + 1):
        updated, degenerate = update_factors(
            stats, chunk, labels, cfg.alpha, is_first_chunk=is_first_chunk
        )

        repaired = bool(cfg.fill_degenerate and degenerate.any())
        candidate = (
            repair_degenerate_centers(updated, degenerate, chunk, current, is_first_chunk)
            if repaired else updated
        )

        next_labels = assign_chunk(compute_distances(chunk, candidate), labels)

        if on_iteration is not None:
            on_iteration(IterationRecord(
                iteration=iteration,
                labels=labels.copy(),
                factors=candidate.copy(),
                next_labels=next_labels.copy(),
                objective_after_update=chunk_objective(stats, chunk, labels, updated, cfg.alpha),
                objective_after_repair=chunk_objective(stats, chunk, labels, candidate, cfg.alpha),
                objective_after_assign=chunk_objective(stats, chunk, next_labels, candidate, cfg.alpha),
                repaired=repaired,
            ))

        current = candidate
        converged = np.array_equal(next_labels, labels)
        labels = next_labels
        if converged:
            break

    logger.debug(f"Chunk {chunk.chunk_index}: {iteration} inner iteration(s)")
    return ChunkResult(current, labels, iteration)


def run(
    source: ChunkSource,
    cfg: SolverConfig,
    on_chunk: Optional[Callable[[ChunkStep, np.ndarray], None]] = None,
    on_pass: Optional[Callable[[int, Assignments, FactorSet, LossReport], None]] = None
) -> RunResult:
    """
    Run all passes over a re-playable chunk stream.

    Args:
        source: Chunk stream; its meta declares N, view dims and K
        cfg: Solver configuration
        on_chunk: Called after every chunk with the trace entry and the current
            label vector (-1 for instances not scanned yet); do not mutate it
        on_pass: Called after every pass with the pass-end assignments

    Returns:
        RunResult(factors, assignments, trace, stats) with the assignments of the last pass
    """
    cfg.validate()
    meta = source.meta.validate()
    N = meta.n_instances

    stats = stats_init(meta)
    factors: Optional[FactorSet] = None
    labels = np.full(N, -1, dtype=np.int64)
    trace: List[ChunkStep] = []

    logger.info(
        f"Running {cfg.n_passes} pass(es) over N={N}, views={meta.n_views}, K={meta.n_clusters}, "
        f"chunk_size={cfg.chunk_size}, alpha={cfg.alpha}, seed={cfg.rng_seed}"
    )

    report: Optional[LossReport] = None
    for pass_index in range(1, cfg.n_passes + 1):
        with mlflow.start_span(
            name=f"pass_{pass_index}",
            span_type="CHAIN",
            attributes={"pass_index": pass_index, "chunk_size": cfg.chunk_size}
        ) as span:
            span.set_inputs({"pass_index": pass_index, "n_instances": N})

            seen = 0
            for chunk in source.iter_chunks(cfg.chunk_size):
                if chunk.start != seen:
                    raise IOError(f"chunk {chunk.chunk_index} starts at {chunk.start}, expected {seen}")

                prev_labels = stats.chunk_labels.get(chunk.chunk_index)
                stats_retract_chunk(stats, chunk)
                result = process_chunk(stats, factors, chunk, cfg, prev_labels=prev_labels)
                stats_apply_chunk(stats, chunk, result.labels)

                factors = result.factors
                labels[chunk.start:chunk.stop] = result.labels
                seen = chunk.stop

                scanned = seen if pass_index == 1 else N
                report = objective(stats, factors, cfg.alpha, scanned)
                step = ChunkStep(pass_index, chunk.chunk_index, chunk.stop, result.inner_iters, report)
                trace.append(step)
                if on_chunk is not None:
                    on_chunk(step, labels)

            if seen != N:
                raise IOError(f"stream ended after {seen} instances, {N} declared")

            logger.info(f"Pass {pass_index} done: average loss {report.average_loss:.6f}")
            span.set_outputs({"average_loss": report.average_loss, "objective": report.objective})

        if on_pass is not None:
            on_pass(pass_index, Assignments(labels.copy(), meta.n_clusters), factors, report)

    return RunResult(factors, Assignments(labels.copy(), meta.n_clusters), trace, stats)
