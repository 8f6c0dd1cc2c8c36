"""
Clustering evaluation: NMI and accuracy (AC)

NMI uses the geometric-mean normalization MI / sqrt(H(pred) * H(truth)) with
natural logarithms. Two constant labelings score 1; a constant labeling against
a non-constant one scores 0.

AC is the fraction of instances matched under the best one-to-one map from
predicted clusters to true classes, found by linear assignment on the
contingency table.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import normalized_mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from model.types import Assignments

LabelsLike = Union[Assignments, np.ndarray, list]


def _labels(x: LabelsLike) -> np.ndarray:
    if isinstance(x, Assignments):
        return x.labels
    return np.asarray(x).ravel()


def _pair(pred: LabelsLike, truth: LabelsLike):
    p, t = _labels(pred), _labels(truth)
    if p.shape != t.shape:
        raise ValueError(f"label length mismatch: pred has {p.size}, truth has {t.size}")
    if p.size == 0:
        raise ValueError("cannot evaluate an empty labeling")
    return p, t


@dataclass
class Contingency:
    """counts[i, j]: instances predicted in cluster i whose true class is j."""

    counts: np.ndarray
    n: int

    @classmethod
    def from_labels(cls, pred: LabelsLike, truth: LabelsLike) -> "Contingency":
        p, t = _pair(pred, truth)
        counts = contingency_matrix(t, p).T
        return cls(counts=counts, n=int(p.size))


def nmi(pred: LabelsLike, truth: LabelsLike) -> float:
    p, t = _pair(pred, truth)
    constant_p, constant_t = np.unique(p).size == 1, np.unique(t).size == 1
    if constant_p or constant_t:
        return 1.0 if constant_p and constant_t else 0.0
    return float(normalized_mutual_info_score(t, p, average_method="geometric"))


def accuracy(pred: LabelsLike, truth: LabelsLike) -> float:
    table = Contingency.from_labels(pred, truth)
    rows, cols = linear_sum_assignment(table.counts, maximize=True)
    return float(table.counts[rows, cols].sum()) / table.n
