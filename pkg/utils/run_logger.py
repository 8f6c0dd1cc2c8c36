"""
Run Logger

Logging handler that writes each experiment run's log records to its own file
under LOGS_PATH, organized by date: <LOGS_PATH>/<YYYY-MM-DD>/<run_id>.log

Records are buffered in memory and written on flush/close. A handler only keeps
records emitted by the thread that created it, so concurrent sweep members
attached to the same root logger still get separate files.
"""

import logging
import os
import sys
import threading
from datetime import datetime
from typing import Optional

import config

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class RunLogHandler(logging.Handler):
    """
    Buffers the formatted records of one run and appends them to the run's log file.
    """

    def __init__(self, run_id: str, level=logging.DEBUG, logs_path: Optional[str] = None):
        """
        Initialize the run log handler.

        Args:
            run_id: Unique identifier for the run
            level: Minimum logging level to capture
            logs_path: Base directory (defaults to config.LOGS_PATH)
        """
        super().__init__(level)
        self.run_id = run_id
        self.logs_base_path = logs_path or config.LOGS_PATH
        self.thread_id = threading.get_ident()
        self.log_buffer = []
        self.file_path = None
        self._setup_log_file()

    def _setup_log_file(self):
        date_str = datetime.now().strftime("%Y-%m-%d")
        log_dir = os.path.join(self.logs_base_path, date_str)
        self.file_path = os.path.join(log_dir, f"{self.run_id}.log")

        try:
            os.makedirs(log_dir, exist_ok=True)
        except OSError as e:
            print(f"Warning: Could not create log directory {log_dir}: {e}", file=sys.stderr)

    def emit(self, record: logging.LogRecord):
        if record.thread != self.thread_id:
            return
        try:
            self.log_buffer.append(self.format(record))
        except Exception:
            self.handleError(record)

    def flush(self):
        """Append buffered lines to the log file."""
        if not self.log_buffer or not self.file_path:
            return

        try:
            with open(self.file_path, "a", encoding="utf-8") as f:
                f.write("\n".join(self.log_buffer) + "\n")
        except OSError as e:
            print(f"Error flushing logs to {self.file_path}: {e}", file=sys.stderr)
        finally:
            self.log_buffer = []

    def close(self):
        self.flush()
        super().close()


def setup_run_logging(run_id: str, logs_path: Optional[str] = None) -> RunLogHandler:
    """
    Attach a RunLogHandler for run_id to the root logger.

    Returns:
        The handler (pass it to cleanup_run_logging when the run ends)
    """
    handler = RunLogHandler(run_id, logs_path=logs_path)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler


def cleanup_run_logging(handler: Optional[RunLogHandler]):
    """Flush, close and detach a handler returned by setup_run_logging."""
    if handler:
        handler.close()
        logging.getLogger().removeHandler(handler)
