"""
Config files, per-run log files and tracing setup.
"""

import json
import logging
import os

import pytest

import config
from utils import cleanup_run_logging, configure_tracing, setup_run_logging


class TestConfigFile:

    def test_dashes_become_underscores(self, tmp_path):
        path = tmp_path / "opts.json"
        path.write_text(json.dumps({"chunk-size": 10, "max_inner_iters": 5}))
        assert config.load_config_file(str(path)) == {"chunk_size": 10, "max_inner_iters": 5}

    def test_non_object_rejected(self, tmp_path):
        path = tmp_path / "opts.json"
        path.write_text("[1, 2]")
        with pytest.raises(ValueError):
            config.load_config_file(str(path))


class TestRunLogging:

    def test_run_lines_written_on_cleanup(self, tmp_path):
        handler = setup_run_logging("run-abc", logs_path=str(tmp_path))
        log = logging.getLogger("opimc.test")
        log.setLevel(logging.INFO)
        log.info("pass 1 done")
        cleanup_run_logging(handler)

        assert handler.file_path.startswith(str(tmp_path))
        assert os.path.basename(handler.file_path) == "run-abc.log"
        with open(handler.file_path) as f:
            assert "pass 1 done" in f.read()
        assert handler not in logging.getLogger().handlers

    def test_nothing_logged_leaves_no_file(self, tmp_path):
        handler = setup_run_logging("quiet", logs_path=str(tmp_path))
        cleanup_run_logging(handler)
        assert not os.path.exists(handler.file_path)


class TestTracing:

    def test_disabled_tracing_has_no_experiment(self):
        assert config.TRACING_ENABLED is False
        assert configure_tracing(force=True) is None
