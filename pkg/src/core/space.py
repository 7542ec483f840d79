"""Axis-aligned open box state spaces."""

from typing import Sequence, Union

import numpy as np

from src.errors import StateSpaceError

# A point is "on a face" when it lies within this distance of it.
BOUNDARY_TOL = 1e-9

PointLike = Union[float, Sequence[float], np.ndarray]


def as_point(x: PointLike) -> np.ndarray:
    """Coerce a scalar or sequence to a float array of shape (d,)."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise StateSpaceError(f"point must be one-dimensional, got shape {arr.shape}")
    return arr


class StateSpace:
    """Open box E = prod_i (lower[i], upper[i]) in R^d."""

    def __init__(self, lower: PointLike, upper: PointLike):
        lo = as_point(lower)
        hi = as_point(upper)
        if lo.shape != hi.shape:
            raise StateSpaceError(f"bounds differ in dimension: {lo.shape} vs {hi.shape}")
        if not np.all(lo < hi):
            raise StateSpaceError(f"need lower < upper on every axis, got {lo} and {hi}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        self.lower = lo
        self.upper = hi

    @property
    def dimension(self) -> int:
        return int(self.lower.shape[0])

    def distance_to_boundary(self, x: PointLike) -> float:
        """Distance from x to the nearest face; 0 on or outside the closure boundary."""
        p = as_point(x)
        d = np.minimum(p - self.lower, self.upper - p).min()
        return max(float(d), 0.0)

    def contains(self, x: PointLike) -> bool:
        """True iff x is strictly inside E."""
        p = as_point(x)
        return bool(np.all(p > self.lower) and np.all(p < self.upper))

    def in_closure(self, x: PointLike, tol: float = BOUNDARY_TOL) -> bool:
        p = as_point(x)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def on_boundary(self, x: PointLike, tol: float = BOUNDARY_TOL) -> bool:
        """True iff x is in the closure and within tol of some face."""
        p = as_point(x)
        if not self.in_closure(p, tol):
            return False
        gap = np.minimum(np.abs(p - self.lower), np.abs(self.upper - p))
        return bool(gap.min() <= tol)

    def snap_to_boundary(self, x: PointLike, tol: float = BOUNDARY_TOL) -> np.ndarray:
        """Move every coordinate within tol of a face exactly onto it."""
        p = as_point(x).copy()
        near_lo = np.abs(p - self.lower) <= tol
        near_hi = np.abs(self.upper - p) <= tol
        p[near_lo] = self.lower[near_lo]
        p[near_hi] = self.upper[near_hi]
        return p

    def require_interior(self, x: PointLike, what: str = "point") -> np.ndarray:
        p = as_point(x)
        if p.shape[0] != self.dimension:
            raise StateSpaceError(f"{what} has dimension {p.shape[0]}, expected {self.dimension}")
        if not self.contains(p):
            raise StateSpaceError(f"{what} {p.tolist()} is not inside E={self}")
        return p

    def __repr__(self) -> str:
        faces = ", ".join(f"({lo:g}, {hi:g})" for lo, hi in zip(self.lower, self.upper))
        return f"StateSpace[{faces}]"
