"""
View file formats

A view file holds one d x N matrix: row = feature, column = instance.

- CSV: plain comma-separated numbers, no header.
- MVC1 binary: 4-byte magic b"MVC1", then d and N as little-endian uint64,
  then d * N little-endian float64 values in row-major order.
"""

import logging
import os
from typing import Tuple

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

MVC1_MAGIC = b"MVC1"
MVC1_HEADER = np.dtype([("magic", "S4"), ("d", "<u8"), ("n", "<u8")])
MVC1_OFFSET = MVC1_HEADER.itemsize
MVC1_VALUE = np.dtype("<f8")

BINARY_SUFFIXES = (".mvc", ".mvc1", ".bin")


def is_binary_path(path: str) -> bool:
    return os.path.splitext(path)[1].lower() in BINARY_SUFFIXES


def read_mvc1_header(path: str) -> Tuple[int, int]:
    """Return (d, N) from an MVC1 file header."""
    header = np.fromfile(path, dtype=MVC1_HEADER, count=1)
    if header.size != 1 or header["magic"][0] != MVC1_MAGIC:
        raise ValueError(f"{path} is not an MVC1 file (bad or truncated header)")
    return int(header["d"][0]), int(header["n"][0])


def open_mvc1(path: str) -> np.memmap:
    """Memory-map the matrix of an MVC1 file read-only."""
    d, n = read_mvc1_header(path)
    expected = MVC1_OFFSET + d * n * MVC1_VALUE.itemsize
    actual = os.path.getsize(path)
    if actual < expected:
        raise IOError(f"{path} holds {actual} bytes, header declares {expected}")
    return np.memmap(path, dtype=MVC1_VALUE, mode="r", offset=MVC1_OFFSET, shape=(d, n))


def write_mvc1(path: str, matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype=MVC1_VALUE)
    if matrix.ndim != 2:
        raise ValueError(f"MVC1 stores 2-D matrices, got shape {matrix.shape}")
    header = np.array([(MVC1_MAGIC, matrix.shape[0], matrix.shape[1])], dtype=MVC1_HEADER)
    with open(path, "wb") as f:
        header.tofile(f)
        matrix.tofile(f)


def read_csv_matrix(path: str) -> np.ndarray:
    """Read a headerless numeric CSV; a non-numeric token raises ValueError."""
    frame = pd.read_csv(path, header=None, skipinitialspace=True, float_precision="round_trip")
    try:
        frame = frame.apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError) as e:
        raise ValueError(f"{path}: non-numeric token ({e})") from e
    return frame.to_numpy(dtype=float)


def write_csv_matrix(path: str, matrix: np.ndarray, integer: bool = False) -> None:
    frame = pd.DataFrame(np.asarray(matrix))
    if integer:
        frame.astype(np.int64).to_csv(path, header=False, index=False)
    else:
        frame.to_csv(path, header=False, index=False, float_format="%.17g")


def read_matrix(path: str) -> np.ndarray:
    """Read a whole view file (CSV or MVC1) into memory."""
    if is_binary_path(path):
        return np.array(open_mvc1(path))
    return read_csv_matrix(path)


def write_matrix(path: str, matrix: np.ndarray) -> None:
    if is_binary_path(path):
        write_mvc1(path, matrix)
    else:
        write_csv_matrix(path, matrix)
    logger.debug(f"Wrote {np.shape(matrix)} matrix to {path}")
