"""
Utilities package for the OPIMC clustering engine
"""

from .run_logger import (
    RunLogHandler,
    setup_run_logging,
    cleanup_run_logging
)
from .tracing import configure_tracing, flush_traces, span_trace_id

__all__ = [
    "RunLogHandler",
    "setup_run_logging",
    "cleanup_run_logging",
    "configure_tracing",
    "flush_traces",
    "span_trace_id"
]
