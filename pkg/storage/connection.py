"""
Results Database Connection Manager

Wraps one SQLAlchemy engine built from OPIMC_RESULTS_DB_URL. Any SQLAlchemy URL
works: sqlite:///results.db locally, postgresql+psycopg2://user:pw@host/db for a
shared PostgreSQL server.
"""

import logging
from contextlib import contextmanager
from typing import Iterator, Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Connection, Engine

import config

logger = logging.getLogger(__name__)

# Singleton connection manager
_connection_manager = None


class ResultsDbConnectionManager:
    """
    Holds the engine and hands out transactional connections
    """

    def __init__(self, db_url: Optional[str] = None):
        """
        Args:
            db_url: SQLAlchemy URL (default config.RESULTS_DB_URL)
        """
        self.db_url = db_url or config.RESULTS_DB_URL
        if not self.db_url:
            raise ValueError(
                "Results storage requires OPIMC_RESULTS_DB_URL "
                "(e.g. sqlite:///results.db or postgresql+psycopg2://user:pw@host/db)"
            )

        self.engine: Engine = create_engine(self.db_url)
        logger.info(f"ResultsDbConnectionManager initialized: {self.engine.url.render_as_string(hide_password=True)}")

    @property
    def dialect(self) -> str:
        return self.engine.dialect.name

    @contextmanager
    def begin(self) -> Iterator[Connection]:
        """Connection inside a transaction, committed on normal exit."""
        with self.engine.begin() as conn:
            yield conn

    def dispose(self):
        self.engine.dispose()
        logger.info("ResultsDbConnectionManager disposed")


def storage_enabled() -> bool:
    return bool(config.RESULTS_DB_URL)


def get_connection_manager() -> ResultsDbConnectionManager:
    """
    Get or create singleton connection manager

    Returns:
        ResultsDbConnectionManager instance
    """
    global _connection_manager
    if _connection_manager is None or _connection_manager.db_url != config.RESULTS_DB_URL:
        if _connection_manager is not None:
            _connection_manager.dispose()
        _connection_manager = ResultsDbConnectionManager()
    return _connection_manager
