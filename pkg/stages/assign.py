"""
Assign - 1-of-K labels from the distance matrix

Row-wise argmin. A tie keeps the previous label when it is among the minimizers,
otherwise the lowest index wins.
"""

from typing import Optional

import numpy as np


def assign_chunk(d: np.ndarray, prev_labels: Optional[np.ndarray] = None) -> np.ndarray:
    labels = np.argmin(d, axis=1).astype(np.int64)
    if prev_labels is None:
        return labels

    prev_labels = np.asarray(prev_labels, dtype=np.int64)
    rows = np.arange(d.shape[0])
    keep = d[rows, prev_labels] == d[rows, labels]
    labels[keep] = prev_labels[keep]
    return labels
