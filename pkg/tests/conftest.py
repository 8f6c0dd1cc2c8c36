"""
Shared fixtures. Tracing is switched off, run logs go to a temporary directory
and results storage is disabled before any project module reads config.
"""

import os
import tempfile

os.environ["OPIMC_TRACING"] = "false"
os.environ["LOGS_PATH"] = tempfile.mkdtemp(prefix="opimc_test_logs_")
os.environ.pop("OPIMC_RESULTS_DB_URL", None)

import numpy as np
import pytest

from data import save_dataset
from helpers import synthetic_dataset
from utils import configure_tracing

configure_tracing(force=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def easy_manifest(tmp_path):
    """Small, well separated 3-cluster 2-view dataset with 30% missing, saved as CSV."""
    dataset = synthetic_dataset(n_instances=150, noise=0.05, rate=0.3, seed=3)
    return save_dataset(dataset, str(tmp_path / "easy"))


@pytest.fixture
def unlabeled_manifest(tmp_path):
    dataset = synthetic_dataset(n_instances=60, noise=0.05, seed=4)
    dataset.labels = None
    return save_dataset(dataset, str(tmp_path / "unlabeled"))
