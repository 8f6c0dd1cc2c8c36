"""
MLflow tracing setup

Points MLflow at the configured tracking URI and experiment, or turns tracing
off entirely. Spans opened while tracing is disabled are no-ops.
"""

import logging
from typing import Optional

import mlflow

import config

logger = logging.getLogger(__name__)

_configured = False
_experiment_id: Optional[str] = None


def configure_tracing(force: bool = False) -> Optional[str]:
    """
    Configure MLflow once per process.

    Returns:
        The experiment id, or None when tracing is disabled or setup failed
    """
    global _configured, _experiment_id
    if _configured and not force:
        return _experiment_id
    _configured = True

    if not config.TRACING_ENABLED:
        mlflow.tracing.disable()
        _experiment_id = None
        logger.info("[TRACING] MLflow tracing disabled")
        return None

    try:
        mlflow.tracing.enable()
        mlflow.set_tracking_uri(config.MLFLOW_TRACKING_URI)
        experiment = mlflow.set_experiment(config.MLFLOW_EXPERIMENT_NAME)
        _experiment_id = experiment.experiment_id
        logger.info(
            f"[TRACING] MLflow tracking URI: {mlflow.get_tracking_uri()}, "
            f"experiment: {config.MLFLOW_EXPERIMENT_NAME} ({_experiment_id})"
        )
    except Exception as e:
        logger.warning(f"[TRACING] MLflow setup failed, continuing without tracing: {e}")
        mlflow.tracing.disable()
        _experiment_id = None
    return _experiment_id


def span_trace_id(span) -> Optional[str]:
    """Trace id of a live span, if the span carries one."""
    for attr in ("trace_id", "request_id"):
        value = getattr(span, attr, None)
        if value:
            return str(value)
    return None


def flush_traces():
    try:
        mlflow.flush_trace_async_logging()
    except Exception as e:
        logger.warning(f"[TRACING] Could not flush traces: {e}")
