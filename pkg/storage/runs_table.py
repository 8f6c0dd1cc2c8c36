"""
Experiment Runs Table

One row per experiment run: command, status (pending -> running -> completed or
failed), configuration echo as JSON, MLflow trace/experiment ids, log file path,
timestamps, error message and final metrics.
"""

import json
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional

from sqlalchemy import text

import config
from storage.connection import get_connection_manager

logger = logging.getLogger(__name__)

UPDATABLE_COLUMNS = {
    "status", "trace_id", "experiment_id", "log_file_path", "start_time", "end_time",
    "error_message", "final_nmi", "final_ac", "final_avg_loss", "n_records",
}


class RunsTable:
    """
    Manages the runs table in the results database
    """

    def __init__(self, table_name: str = None):
        """
        Args:
            table_name: Table name (default from config)
        """
        self.table_name = table_name or config.RUNS_TABLE_NAME
        self.conn_manager = get_connection_manager()
        self._ensure_schema_exists()
        self._ensure_table_exists()

    def _ensure_schema_exists(self):
        """Create the schema part of a qualified name on PostgreSQL"""
        if "." not in self.table_name or self.conn_manager.dialect != "postgresql":
            return
        schema_name = self.table_name.split(".")[0]
        try:
            with self.conn_manager.begin() as conn:
                conn.execute(text(f"CREATE SCHEMA IF NOT EXISTS {schema_name}"))
            logger.info(f"Schema created/ensured successfully: {schema_name}")
        except Exception as e:
            logger.error(f"Error ensuring schema exists: {str(e)}", exc_info=True)
            raise

    def _ensure_table_exists(self):
        try:
            create_table_sql = f"""
                CREATE TABLE IF NOT EXISTS {self.table_name} (
                    run_id VARCHAR(255) PRIMARY KEY,
                    command VARCHAR(50),
                    status VARCHAR(50),
                    config_json TEXT,
                    trace_id VARCHAR(255),
                    experiment_id VARCHAR(255),
                    log_file_path VARCHAR(1000),
                    start_time TIMESTAMP,
                    end_time TIMESTAMP,
                    error_message TEXT,
                    final_nmi DOUBLE PRECISION,
                    final_ac DOUBLE PRECISION,
                    final_avg_loss DOUBLE PRECISION,
                    n_records INTEGER,
                    created_at TIMESTAMP,
                    updated_at TIMESTAMP
                )
            """
            with self.conn_manager.begin() as conn:
                conn.execute(text(create_table_sql))
            logger.info(f"Table created/ensured successfully: {self.table_name}")
        except Exception as e:
            logger.error(f"Error ensuring table exists: {str(e)}", exc_info=True)
            raise

    def insert_run(self, run_id: str, command: str, run_config: Dict[str, Any]) -> None:
        """Insert a new run in status 'pending'."""
        now = datetime.now()
        insert_sql = f"""
            INSERT INTO {self.table_name} (
                run_id, command, status, config_json, created_at, updated_at
            ) VALUES (:run_id, :command, 'pending', :config_json, :now, :now)
        """
        with self.conn_manager.begin() as conn:
            conn.execute(text(insert_sql), {
                "run_id": run_id,
                "command": command,
                "config_json": json.dumps(run_config, sort_keys=True, default=str),
                "now": now,
            })
        logger.info(f"Inserted run record: {run_id}")

    def update_run(self, run_id: str, **fields) -> None:
        """
        Update any of the UPDATABLE_COLUMNS of a run

        Args:
            run_id: Run identifier
            **fields: Column values; None values are skipped
        """
        unknown = set(fields) - UPDATABLE_COLUMNS
        if unknown:
            raise ValueError(f"unknown run columns: {sorted(unknown)}")

        values = {k: v for k, v in fields.items() if v is not None}
        if not values:
            logger.warning(f"No updates provided for run_id: {run_id}")
            return

        set_clause = ", ".join(f"{key} = :{key}" for key in values)
        update_sql = f"""
            UPDATE {self.table_name}
            SET {set_clause}, updated_at = :updated_at
            WHERE run_id = :run_id
        """
        with self.conn_manager.begin() as conn:
            conn.execute(text(update_sql), {**values, "updated_at": datetime.now(), "run_id": run_id})
        logger.debug(f"Updated run {run_id}: {sorted(values)}")

    def mark_running(self, run_id: str, trace_id: str = None, experiment_id: str = None,
                     log_file_path: str = None) -> None:
        self.update_run(
            run_id,
            status="running",
            start_time=datetime.now(),
            trace_id=trace_id,
            experiment_id=experiment_id,
            log_file_path=log_file_path,
        )

    def mark_completed(self, run_id: str, final_nmi: Optional[float] = None,
                       final_ac: Optional[float] = None, final_avg_loss: Optional[float] = None,
                       n_records: Optional[int] = None) -> None:
        self.update_run(
            run_id,
            status="completed",
            end_time=datetime.now(),
            final_nmi=final_nmi,
            final_ac=final_ac,
            final_avg_loss=final_avg_loss,
            n_records=n_records,
        )

    def mark_failed(self, run_id: str, error_message: str) -> None:
        self.update_run(run_id, status="failed", end_time=datetime.now(), error_message=error_message[:2000])

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        try:
            with self.conn_manager.begin() as conn:
                row = conn.execute(
                    text(f"SELECT * FROM {self.table_name} WHERE run_id = :run_id"),
                    {"run_id": run_id}
                ).mappings().first()
            return dict(row) if row else None
        except Exception as e:
            logger.error(f"Error getting run: {str(e)}", exc_info=True)
            return None

    def get_all_runs(self, limit: int = 100) -> List[Dict[str, Any]]:
        try:
            with self.conn_manager.begin() as conn:
                rows = conn.execute(
                    text(f"SELECT * FROM {self.table_name} ORDER BY created_at DESC LIMIT :limit"),
                    {"limit": limit}
                ).mappings().all()
            return [dict(row) for row in rows]
        except Exception as e:
            logger.error(f"Error getting all runs: {str(e)}", exc_info=True)
            return []
