"""
Configuration module for the OPIMC clustering engine

Manages configurable settings including:
- Solver defaults (alpha, chunk size, passes, seed)
- Experiment grids for alpha sweeps and block-size studies
- MLflow experiment settings
- Results storage and log locations
"""

import json
import os


def _env_bool(name, default):
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


# ============================================================================
# Solver Configuration
# ============================================================================

DEFAULT_ALPHA = float(os.environ.get("OPIMC_ALPHA", "0.1"))
DEFAULT_CHUNK_SIZE = int(os.environ.get("OPIMC_CHUNK_SIZE", "50"))
DEFAULT_MAX_INNER_ITERS = int(os.environ.get("OPIMC_MAX_INNER_ITERS", "20"))
DEFAULT_PASSES = int(os.environ.get("OPIMC_PASSES", "1"))
DEFAULT_SEED = int(os.environ.get("OPIMC_SEED", "0"))

# Smallest denominator allowed in the center update; below it a column is degenerate
EPS_DEN = 1e-12


# ============================================================================
# Experiment Grids
# ============================================================================

ALPHA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3)
BLOCK_SIZES = (2, 5, 10, 50, 100, 250)
BLOCK_STUDY_PASSES = 10

# Cap on concurrently running sweep members
OPIMC_THREADS = int(os.environ.get("OPIMC_THREADS", str(min(4, os.cpu_count() or 1))))


# ============================================================================
# MLflow Configuration
# ============================================================================

MLFLOW_TRACKING_URI = os.environ.get("MLFLOW_TRACKING_URI", "./mlruns")
MLFLOW_EXPERIMENT_NAME = os.environ.get("MLFLOW_EXPERIMENT_NAME", "opimc_experiments")
TRACING_ENABLED = _env_bool("OPIMC_TRACING", True)


# ============================================================================
# Results Storage Configuration
# ============================================================================

# Any SQLAlchemy URL (sqlite:///results.db, postgresql+psycopg2://...). Unset disables storage.
RESULTS_DB_URL = os.environ.get("OPIMC_RESULTS_DB_URL")

RUNS_TABLE_NAME = os.environ.get("RUNS_TABLE_NAME", "opimc_runs")
RECORDS_TABLE_NAME = os.environ.get("RECORDS_TABLE_NAME", "opimc_run_records")


# ============================================================================
# Logging Configuration
# ============================================================================

LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
LOGS_PATH = os.environ.get("LOGS_PATH", "./logs")


# ============================================================================
# Config Files
# ============================================================================

def load_config_file(path):
    """
    Read a JSON object whose keys mirror the long CLI flags.

    Dashes in keys are accepted and converted to underscores
    ("chunk-size" and "chunk_size" are the same key).
    """
    with open(path, "r") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a JSON object, got {type(data).__name__}")
    return {key.replace("-", "_"): value for key, value in data.items()}


# ============================================================================
# Debug Helper
# ============================================================================

def print_config():
    """Print current configuration (for debugging)"""
    print("=" * 80)
    print("OPIMC CLUSTERING ENGINE CONFIGURATION")
    print("=" * 80)
    print(f"Alpha: {DEFAULT_ALPHA}")
    print(f"Chunk Size: {DEFAULT_CHUNK_SIZE}")
    print(f"Max Inner Iterations: {DEFAULT_MAX_INNER_ITERS}")
    print(f"Passes: {DEFAULT_PASSES}")
    print(f"Seed: {DEFAULT_SEED}")
    print(f"\nAlpha Grid: {list(ALPHA_GRID)}")
    print(f"Block Sizes: {list(BLOCK_SIZES)} ({BLOCK_STUDY_PASSES} passes each)")
    print(f"Sweep Threads: {OPIMC_THREADS}")
    print(f"\nMLflow Tracking URI: {MLFLOW_TRACKING_URI}")
    print(f"MLflow Experiment: {MLFLOW_EXPERIMENT_NAME}")
    print(f"Tracing: {'enabled' if TRACING_ENABLED else 'disabled'}")
    print(f"Results DB: {RESULTS_DB_URL or '(disabled)'}")
    print(f"Runs Table: {RUNS_TABLE_NAME}")
    print(f"Records Table: {RECORDS_TABLE_NAME}")
    print(f"Logs Path: {LOGS_PATH}")
    print(f"Log Level: {LOG_LEVEL}")
    print("=" * 80)
