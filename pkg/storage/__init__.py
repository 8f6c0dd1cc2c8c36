"""
Storage package for the OPIMC clustering engine

Contains storage modules:
- connection: SQLAlchemy engine manager for the results database
- runs_table: Experiment runs table
- results_table: Per-pass / per-chunk run records table
"""

from .connection import get_connection_manager, storage_enabled, ResultsDbConnectionManager
from .runs_table import RunsTable
from .results_table import RecordsTable

__all__ = [
    "get_connection_manager",
    "storage_enabled",
    "ResultsDbConnectionManager",
    "RunsTable",
    "RecordsTable"
]
