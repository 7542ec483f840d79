"""Compensated running sums over a vector of accumulators.

Each slot keeps a running sum s and a carry c; adding a term uses the
error-free TwoSum transformation so s + c tracks the exact sum to within a
couple of ulps per add.
"""

import numpy as np


def two_sum(a, b):
    """(s, t) with s = fl(a + b) and a + b = s + t exactly."""
    s = a + b
    bp = s - a
    ap = s - bp
    t = (a - ap) + (b - bp)
    return s, t


class CompensatedSums:
    """A fixed number of independent compensated accumulators."""

    def __init__(self, size: int = 0):
        self.sums = np.zeros(size)
        self.carries = np.zeros(size)

    def __len__(self) -> int:
        return self.sums.shape[0]

    def grow(self, extra: int) -> None:
        """Append `extra` zeroed slots."""
        self.sums = np.concatenate([self.sums, np.zeros(extra)])
        self.carries = np.concatenate([self.carries, np.zeros(extra)])

    def add(self, index: np.ndarray, terms: np.ndarray) -> None:
        """Add terms[k] to slot index[k]; indices must be distinct."""
        if index.size == 0:
            return
        s, t = two_sum(self.sums[index], terms)
        self.sums[index] = s
        self.carries[index] = self.carries[index] + t

    def values(self) -> np.ndarray:
        return self.sums + self.carries

    def value(self, k: int) -> float:
        return float(self.sums[k] + self.carries[k])

