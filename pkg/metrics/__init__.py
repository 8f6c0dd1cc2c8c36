"""
Metrics package: clustering quality against ground truth
"""

from .clustering import Contingency, accuracy, nmi

__all__ = [
    "Contingency",
    "accuracy",
    "nmi"
]
