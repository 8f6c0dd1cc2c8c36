"""
OPIMC Experiment Backend with MLflow Tracing

Orchestrates experiment runs: dataset preparation (load, missingness simulation,
shuffle, normalization), the streaming solver, evaluation into RunRecords, and
persistence of runs and records. Each run is one MLflow trace (span "opimc_run")
whose children are the solver's pass spans.
"""

import logging
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

import mlflow
import numpy as np
import pandas as pd

import config
from data import (
    BinaryFileSource,
    ChunkSource,
    InMemorySource,
    load_dataset,
    load_labels,
    load_mask,
    normalize_dataset,
    read_mvc1_header,
    shuffle_instances,
    simulate_missing
)
from data.formats import is_binary_path, write_csv_matrix
from data.loader import resolve_manifest, resolve_n_clusters
from metrics import accuracy, nmi
from model.types import Assignments, DatasetMeta, FactorSet, LossReport, PresenceMask, SolverConfig
from solver import ChunkStep, run
from storage import RecordsTable, RunsTable, storage_enabled
from utils import cleanup_run_logging, configure_tracing, flush_traces, setup_run_logging, span_trace_id

# Configure logging
logging.basicConfig(level=config.LOG_LEVEL)
logger = logging.getLogger(__name__)

RUN_COLUMNS = ["pass", "chunk", "nmi", "ac", "avg_loss", "wall_ms"]
GRID_COLUMNS = ["alpha", "chunk_size", "seed", "rate"] + RUN_COLUMNS

# Lazy initialization for tables (avoid touching the database on import)
_runs_table = None
_records_table = None


def get_runs_table() -> Optional[RunsTable]:
    """Runs table, or None when storage is disabled or unreachable"""
    global _runs_table
    if not storage_enabled():
        return None
    if _runs_table is None:
        try:
            _runs_table = RunsTable()
            logger.info("[BACKEND] Runs table initialized")
        except Exception as e:
            logger.warning(f"[BACKEND] Could not initialize runs table: {e}")
    return _runs_table


def get_records_table() -> Optional[RecordsTable]:
    global _records_table
    if not storage_enabled():
        return None
    if _records_table is None:
        try:
            _records_table = RecordsTable()
            logger.info("[BACKEND] Records table initialized")
        except Exception as e:
            logger.warning(f"[BACKEND] Could not initialize records table: {e}")
    return _records_table


@dataclass
class RunRecord:
    """One evaluation point of a run: after a pass, or after a chunk with per-chunk evaluation."""

    pass_index: int
    chunk_index: int
    nmi: Optional[float]
    ac: Optional[float]
    average_loss: float
    wall_time_ms: Optional[float]
    alpha: float
    chunk_size: int
    seed: int
    rate: float

    def as_row(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "chunk_size": self.chunk_size,
            "seed": self.seed,
            "rate": self.rate,
            "pass": self.pass_index,
            "chunk": self.chunk_index,
            "nmi": self.nmi,
            "ac": self.ac,
            "avg_loss": self.average_loss,
            "wall_ms": self.wall_time_ms,
        }

    def as_storage_row(self) -> Dict[str, Any]:
        row = self.as_row()
        row["pass_index"] = row.pop("pass")
        row["chunk_index"] = row.pop("chunk")
        return row


@dataclass
class PreparedData:
    """A chunk source in stream order plus what is needed to evaluate and report."""

    source: ChunkSource
    labels: Optional[np.ndarray] = None
    order: Optional[np.ndarray] = None
    rate: float = 0.0

    @property
    def meta(self) -> DatasetMeta:
        return self.source.meta

    def to_original_order(self, labels: np.ndarray) -> np.ndarray:
        if self.order is None:
            return labels.copy()
        restored = np.empty_like(labels)
        restored[self.order] = labels
        return restored


@dataclass
class ExperimentResult:
    run_id: str
    command: str
    config: SolverConfig
    status: str
    records: List[RunRecord] = field(default_factory=list)
    assignments: Optional[np.ndarray] = None
    factors: Optional[FactorSet] = None
    trace: List[ChunkStep] = field(default_factory=list)
    trace_id: Optional[str] = None
    log_file_path: Optional[str] = None
    error: Optional[str] = None

    @property
    def final(self) -> Optional[RunRecord]:
        return self.records[-1] if self.records else None


def prepare_data(
    manifest_path: Optional[str] = None,
    view_paths: Optional[Sequence[str]] = None,
    mask_path: Optional[str] = None,
    labels_path: Optional[str] = None,
    n_clusters: Optional[int] = None,
    missing_rate: float = 0.0,
    seed: int = 0,
    shuffle: bool = True,
    stream_from_disk: bool = False
) -> PreparedData:
    """
    Load a dataset and turn it into a chunk source.

    Without a mask file and with missing_rate > 0 a mask is simulated from the seed.
    In-memory data is shuffled with the seed unless shuffle is False, then every
    present instance is scaled to unit norm. stream_from_disk memory-maps MVC1 view
    files instead; those are streamed in file order and normalized per chunk.
    """
    if stream_from_disk:
        return _prepare_disk_stream(manifest_path, view_paths, mask_path, labels_path,
                                    n_clusters, missing_rate, seed, shuffle)

    manifest = resolve_manifest(manifest_path, view_paths, mask_path, labels_path)
    dataset = load_dataset(
        n_clusters=n_clusters or manifest.n_clusters,
        view_paths=manifest.view_paths,
        mask_path=manifest.mask_path,
        labels_path=manifest.labels_path
    )
    rate = dataset.mask.missing_ratio()
    if missing_rate > 0:
        if manifest.mask_path:
            logger.warning(f"Missing rate {missing_rate} ignored: a mask file was supplied")
        else:
            dataset = dataset.with_mask(simulate_missing(dataset.meta, missing_rate, seed))
            rate = missing_rate

    order = None
    if shuffle:
        dataset, order = shuffle_instances(dataset, seed)
    dataset = normalize_dataset(dataset)

    return PreparedData(
        source=InMemorySource(dataset.views, dataset.mask, dataset.n_clusters),
        labels=dataset.labels,
        order=order,
        rate=rate,
    )


def _prepare_disk_stream(manifest_path, view_paths, mask_path, labels_path,
                         n_clusters, missing_rate, seed, shuffle) -> PreparedData:
    manifest = resolve_manifest(manifest_path, view_paths, mask_path, labels_path)
    if not all(is_binary_path(p) for p in manifest.view_paths):
        raise ValueError("streaming from disk requires MVC1 view files (.mvc, .mvc1, .bin)")
    if shuffle:
        logger.warning("Shuffling is not applied when streaming from disk; instances keep file order")

    dims, sizes = zip(*(read_mvc1_header(p) for p in manifest.view_paths))
    N = int(max(sizes))
    labels = load_labels(manifest.labels_path) if manifest.labels_path else None
    if labels is not None:
        N = labels.size
    K = resolve_n_clusters(n_clusters, manifest, labels)

    if manifest.mask_path:
        mask = load_mask(manifest.mask_path, len(dims), N)
    elif missing_rate > 0:
        meta = DatasetMeta(len(dims), N, list(dims), K).validate()
        mask = simulate_missing(meta, missing_rate, seed)
    else:
        mask = PresenceMask.full(len(dims), N)

    return PreparedData(
        source=BinaryFileSource(manifest.view_paths, mask, K),
        labels=labels,
        rate=mask.missing_ratio(),
    )


def _evaluate(labels: np.ndarray, truth: Optional[np.ndarray]):
    """(nmi, ac) over instances that already carry a label, or (None, None)."""
    if truth is None:
        return None, None
    scanned = labels >= 0
    if not scanned.any():
        return None, None
    return nmi(labels[scanned], truth[scanned]), accuracy(labels[scanned], truth[scanned])


def run_experiment(
    data: PreparedData,
    cfg: SolverConfig,
    command: str = "run",
    run_id: Optional[str] = None,
    eval_every_chunk: bool = False,
    timing: bool = True
) -> ExperimentResult:
    """
    Run the streaming solver on prepared data and collect RunRecords.

    One record per pass (pass-end assignments, full-dataset metrics), or one per
    chunk when eval_every_chunk is set. Failures are logged, stored, and re-raised.

    Args:
        data: Output of prepare_data
        cfg: Solver configuration
        command: Name stored with the run (run, sweep-alpha, block-study, app)
        run_id: Identifier to use (default: new UUID)
        eval_every_chunk: Evaluate after every chunk instead of every pass
        timing: Record wall_ms; without it every record field is deterministic

    Returns:
        ExperimentResult with assignments in the original instance order
    """
    cfg.validate()
    run_id = run_id or str(uuid.uuid4())
    experiment_id = configure_tracing()

    run_log_handler = setup_run_logging(run_id)
    logger.info(f"[RUN {run_id}] Starting {command}: {cfg.echo()}, missing rate {data.rate:.3f}")
    if data.labels is None:
        logger.warning(f"[RUN {run_id}] No labels supplied; nmi/ac columns will be empty")

    runs_table = get_runs_table()
    if runs_table:
        try:
            runs_table.insert_run(run_id, command, {**cfg.echo(), "rate": data.rate})
        except Exception as e:
            logger.warning(f"[RUN {run_id}] Could not create run record: {e}")

    result = ExperimentResult(run_id=run_id, command=command, config=cfg, status="running",
                              log_file_path=run_log_handler.file_path)
    started = time.perf_counter()

    def record(pass_index: int, chunk_index: int, labels: np.ndarray, report: LossReport):
        score_nmi, score_ac = _evaluate(labels, data.labels)
        result.records.append(RunRecord(
            pass_index=pass_index,
            chunk_index=chunk_index,
            nmi=score_nmi,
            ac=score_ac,
            average_loss=report.average_loss,
            wall_time_ms=(time.perf_counter() - started) * 1000.0 if timing else None,
            alpha=cfg.alpha,
            chunk_size=cfg.chunk_size,
            seed=cfg.rng_seed,
            rate=data.rate,
        ))

    def on_chunk(step: ChunkStep, labels: np.ndarray):
        result.trace.append(step)
        if eval_every_chunk:
            record(step.pass_index, step.chunk_index, labels, step.report)

    def on_pass(pass_index: int, assignments: Assignments, factors: FactorSet, report: LossReport):
        if not eval_every_chunk:
            record(pass_index, result.trace[-1].chunk_index, assignments.labels, report)
        last = result.records[-1]
        logger.info(
            f"[RUN {run_id}] Pass {pass_index}: avg_loss={report.average_loss:.6f}, "
            f"nmi={last.nmi}, ac={last.ac}"
        )

    with mlflow.start_span(
        name="opimc_run",
        span_type="CHAIN",
        attributes={
            "run_id": run_id,
            "command": command,
            "n_instances": data.meta.n_instances,
            "n_views": data.meta.n_views,
            "n_clusters": data.meta.n_clusters
        }
    ) as span:
        span.set_inputs({**cfg.echo(), "rate": data.rate, "eval_every_chunk": eval_every_chunk})
        span.set_attribute("log_file_path", run_log_handler.file_path)
        result.trace_id = span_trace_id(span)

        if runs_table:
            try:
                runs_table.mark_running(run_id, trace_id=result.trace_id, experiment_id=experiment_id,
                                        log_file_path=run_log_handler.file_path)
            except Exception as e:
                logger.warning(f"[RUN {run_id}] Could not mark run as running: {e}")

        try:
            solved = run(data.source, cfg, on_chunk=on_chunk, on_pass=on_pass)
            result.factors = solved.factors
            result.assignments = data.to_original_order(solved.assignments.labels)
            result.status = "completed"

            final = result.final
            span.set_outputs({
                "status": "completed",
                "records": len(result.records),
                "final_nmi": final.nmi,
                "final_ac": final.ac,
                "final_avg_loss": final.average_loss
            })
            logger.info(f"[RUN {run_id}] Completed in {time.perf_counter() - started:.2f}s")

            if runs_table:
                try:
                    runs_table.mark_completed(run_id, final.nmi, final.ac, final.average_loss, len(result.records))
                except Exception as e:
                    logger.warning(f"[RUN {run_id}] Could not mark run as completed: {e}")
            records_table = get_records_table()
            if records_table:
                try:
                    records_table.insert_records(run_id, [r.as_storage_row() for r in result.records])
                except Exception as e:
                    logger.warning(f"[RUN {run_id}] Could not store run records: {e}")

        except Exception as e:
            logger.error(f"[RUN {run_id}] Failed: {str(e)}", exc_info=True)
            result.status = "failed"
            result.error = str(e)

            if runs_table:
                try:
                    runs_table.mark_failed(run_id, str(e))
                except Exception as status_err:
                    logger.warning(f"[RUN {run_id}] Could not mark run as failed: {status_err}")

            span.set_attribute("run_status", "failed")
            span.set_attribute("error_message", str(e)[:500])
            span.set_outputs({"status": "failed", "error": str(e)})
            raise

        finally:
            flush_traces()
            cleanup_run_logging(run_log_handler)

    return result


def _dedupe_alphas(alphas: Sequence[float]) -> List[float]:
    unique: List[float] = []
    for a in alphas:
        if a in unique:
            logger.warning(f"[SWEEP] Duplicate alpha {a} dropped from the grid")
            continue
        unique.append(a)
    return unique


def _run_grid(data: PreparedData, configs: List[SolverConfig], command: str,
              eval_every_chunk: bool, timing: bool, threads: Optional[int]) -> List[ExperimentResult]:
    workers = max(1, min(threads or config.OPIMC_THREADS, len(configs)))
    logger.info(f"[{command.upper()}] {len(configs)} run(s) on {workers} thread(s)")

    def member(cfg: SolverConfig) -> ExperimentResult:
        return run_experiment(data, cfg, command=command, eval_every_chunk=eval_every_chunk, timing=timing)

    if workers == 1:
        return [member(cfg) for cfg in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(member, configs))


def sweep_alpha(
    data: PreparedData,
    base_cfg: SolverConfig,
    alphas: Sequence[float] = config.ALPHA_GRID,
    eval_every_chunk: bool = False,
    timing: bool = True,
    threads: Optional[int] = None
) -> List[ExperimentResult]:
    """One run per distinct alpha, results in grid order."""
    alphas = _dedupe_alphas(alphas)
    if not alphas:
        raise ValueError("alpha grid is empty")
    configs = [replace(base_cfg, alpha=float(a)).validate() for a in alphas]
    return _run_grid(data, configs, "sweep-alpha", eval_every_chunk, timing, threads)


def block_study(
    data: PreparedData,
    base_cfg: SolverConfig,
    chunk_sizes: Sequence[int] = config.BLOCK_SIZES,
    n_passes: int = config.BLOCK_STUDY_PASSES,
    eval_every_chunk: bool = False,
    timing: bool = True,
    threads: Optional[int] = None
) -> List[ExperimentResult]:
    """One run per chunk size, n_passes passes each, results in list order."""
    if not chunk_sizes:
        raise ValueError("chunk size list is empty")
    for s in chunk_sizes:
        if s < 1:
            raise ValueError(f"chunk size must be >= 1, got {s}")
    configs = [replace(base_cfg, chunk_size=int(s), n_passes=n_passes).validate() for s in chunk_sizes]
    return _run_grid(data, configs, "block-study", eval_every_chunk, timing, threads)


def records_frame(results: Sequence[ExperimentResult], with_config: bool) -> pd.DataFrame:
    rows = [r.as_row() for result in results for r in result.records]
    columns = GRID_COLUMNS if with_config else RUN_COLUMNS
    return pd.DataFrame(rows, columns=GRID_COLUMNS).reindex(columns=columns)


def write_records_csv(path: str, results: Sequence[ExperimentResult], with_config: bool) -> None:
    """Write RunRecords with the run or grid header; unavailable values are empty cells."""
    records_frame(results, with_config).to_csv(path, index=False, na_rep="")
    logger.info(f"Wrote {sum(len(r.records) for r in results)} record(s) to {path}")


def write_assignments(path: str, labels: np.ndarray) -> None:
    """One label per line, in the original instance order."""
    write_csv_matrix(path, np.asarray(labels).reshape(-1, 1), integer=True)


def get_stored_runs(run_id: str = None, limit: int = 100) -> Dict[str, Any]:
    """
    Read runs (and, for a single run, its records) back from storage

    Returns:
        {"runs": [...], "count": n}, {"run": {...}, "records": DataFrame}, or {"error": msg}
    """
    runs_table = get_runs_table()
    if not runs_table:
        return {"error": "Results storage not configured"}

    try:
        if run_id:
            run_row = runs_table.get_run(run_id)
            if not run_row:
                return {"error": "Run not found"}
            records_table = get_records_table()
            records = records_table.get_records(run_id) if records_table else pd.DataFrame()
            return {"run": run_row, "records": records}
        runs = runs_table.get_all_runs(limit=limit)
        return {"runs": runs, "count": len(runs)}
    except Exception as e:
        logger.error(f"Error reading stored runs: {str(e)}", exc_info=True)
        return {"error": str(e)}
