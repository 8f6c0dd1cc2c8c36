"""
Run Records Table

Stores the RunRecords of each run (one row per pass or per evaluated chunk),
keyed by run_id, and reads them back as a pandas DataFrame.
"""

import logging
from typing import Any, Dict, Iterable

import pandas as pd
from sqlalchemy import text

import config
from storage.connection import get_connection_manager

logger = logging.getLogger(__name__)

RECORD_COLUMNS = (
    "alpha", "chunk_size", "seed", "rate", "pass_index", "chunk_index",
    "nmi", "ac", "avg_loss", "wall_ms",
)


class RecordsTable:
    """
    Manages storage of run records in the results database
    """

    def __init__(self, table_name: str = None):
        self.table_name = table_name or config.RECORDS_TABLE_NAME
        self.conn_manager = get_connection_manager()
        self._ensure_table_exists()
        logger.info(f"RecordsTable initialized: {self.table_name}")

    def _ensure_table_exists(self):
        try:
            create_table_sql = f"""
                CREATE TABLE IF NOT EXISTS {self.table_name} (
                    run_id VARCHAR(255) NOT NULL,
                    seq INTEGER NOT NULL,
                    alpha DOUBLE PRECISION,
                    chunk_size INTEGER,
                    seed INTEGER,
                    rate DOUBLE PRECISION,
                    pass_index INTEGER,
                    chunk_index INTEGER,
                    nmi DOUBLE PRECISION,
                    ac DOUBLE PRECISION,
                    avg_loss DOUBLE PRECISION,
                    wall_ms DOUBLE PRECISION,
                    PRIMARY KEY (run_id, seq)
                )
            """
            with self.conn_manager.begin() as conn:
                conn.execute(text(create_table_sql))
            logger.info(f"Table created/ensured successfully: {self.table_name}")
        except Exception as e:
            logger.error(f"Error ensuring table exists: {str(e)}", exc_info=True)
            raise

    def insert_records(self, run_id: str, records: Iterable[Dict[str, Any]]) -> int:
        """
        Insert a run's records in order

        Args:
            run_id: Run identifier
            records: Dicts with the RECORD_COLUMNS keys

        Returns:
            Number of inserted rows
        """
        rows = [
            {"run_id": run_id, "seq": seq, **{col: record.get(col) for col in RECORD_COLUMNS}}
            for seq, record in enumerate(records)
        ]
        if not rows:
            return 0

        columns = ("run_id", "seq") + RECORD_COLUMNS
        insert_sql = f"""
            INSERT INTO {self.table_name} ({", ".join(columns)})
            VALUES ({", ".join(f":{c}" for c in columns)})
        """
        with self.conn_manager.begin() as conn:
            conn.execute(text(insert_sql), rows)
        logger.info(f"Inserted {len(rows)} record(s) for run {run_id}")
        return len(rows)

    def get_records(self, run_id: str) -> pd.DataFrame:
        return pd.read_sql(
            text(f"SELECT * FROM {self.table_name} WHERE run_id = :run_id ORDER BY seq"),
            self.conn_manager.engine,
            params={"run_id": run_id},
        )
