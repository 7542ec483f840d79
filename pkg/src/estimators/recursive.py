"""Streaming estimators of p, h = p q and q = h / p from a jump sequence.

The state consumes records j = 1, 2, ... and keeps, per registered point,

    denominator(x)   = sum_j v_j^-d  K((Z_j^- - x) / v_j)
    numerator(x, y)  = sum_j w_j^-2d K((Z_j^- - x) / w_j) K((Z_j - y) / w_j)

After m records the estimates use n = m - 1:
p_hat = denominator / n, h_hat = numerator / n, q_hat = numerator / denominator.
"""

import math
import logging
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.space import StateSpace
from src.errors import EstimatorError, StateSpaceError, ZeroDenominatorError
from src.estimators.kernels import BandwidthSchedule, Kernel
from src.estimators.summation import CompensatedSums
from src.models.records import JumpRecord, Point

logger = logging.getLogger(__name__)


def to_point(value) -> Point:
    """Normalize a float or a sequence of floats to a point tuple."""
    if isinstance(value, (int, float, np.floating, np.integer)):
        return (float(value),)
    return tuple(float(v) for v in np.ravel(np.asarray(value, dtype=float)))


# ============================================================================
# Targets and snapshot rows
# ============================================================================

class EvalTarget(BaseModel):
    """Where the estimators are read.

    kind:
        pair  -- q, h and p at (x, y)
        point -- p at x
        curve -- q(x, y) and h(x, y) for every y in grid, p at x
        grid  -- p at every x in grid
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal["pair", "point", "curve", "grid"]
    x: Optional[Point] = None
    y: Optional[Point] = None
    grid: List[Point] = Field(default_factory=list)

    @field_validator("x", "y", mode="before")
    @classmethod
    def _point(cls, value):
        return None if value is None else to_point(value)

    @field_validator("grid", mode="before")
    @classmethod
    def _grid(cls, value):
        return [to_point(v) for v in value]

    @classmethod
    def pair(cls, x, y) -> "EvalTarget":
        return cls(kind="pair", x=x, y=y)

    @classmethod
    def point(cls, x) -> "EvalTarget":
        return cls(kind="point", x=x)

    @classmethod
    def curve(cls, x, grid: Sequence) -> "EvalTarget":
        return cls(kind="curve", x=x, grid=list(grid))

    @classmethod
    def marginal_grid(cls, grid: Sequence) -> "EvalTarget":
        return cls(kind="grid", grid=list(grid))

    def marginal_points(self) -> List[Point]:
        return list(self.grid) if self.kind == "grid" else [self.x]

    def pairs(self) -> List[Tuple[Point, Point]]:
        if self.kind == "pair":
            return [(self.x, self.y)]
        if self.kind == "curve":
            return [(self.x, y) for y in self.grid]
        return []


class EstimateRow(BaseModel):
    """One snapshot read at a registered pair."""
    x: Point
    y: Point
    n: int
    q_hat: Optional[float] = Field(description="None when the denominator is still 0")
    p_hat: float
    h_hat: float


def ratio_estimate(numerator: float, denominator: float) -> float:
    """numerator / denominator; the common 1/n factors never enter."""
    return numerator / denominator


# ============================================================================
# Streaming state
# ============================================================================

class RecursiveEstimator:
    """Single-writer streaming state for p_hat, h_hat and q_hat.

    Targets are registered before the first record. Denominators depend on x
    only and are shared by every pair with the same x.
    """

    def __init__(self, space: StateSpace, kernel: Kernel, v: BandwidthSchedule, w: BandwidthSchedule):
        if kernel.dimension != space.dimension:
            raise EstimatorError(f"kernel dimension {kernel.dimension} != state dimension {space.dimension}")
        self.space = space
        self.kernel = kernel
        self.v = v
        self.w = w
        self.m = 0
        self.warnings: List[str] = []

        d = space.dimension
        self._den_index: Dict[Point, int] = {}
        self._den_x = np.empty((0, d))
        self._den = CompensatedSums()

        self._num_index: Dict[Tuple[Point, Point], int] = {}
        self._num_x = np.empty((0, d))
        self._num_y = np.empty((0, d))
        self._num = CompensatedSums()

        self._den_reach = kernel.delta * v.initial
        self._num_reach = kernel.delta * w.initial

    @property
    def n(self) -> int:
        """Observed jumps n; the sums run over j = 1..n+1."""
        return self.m - 1

    @property
    def target_count(self) -> int:
        return len(self._num_index) + len(self._den_index)

    # ------------------------------------------------------------------
    # Registration
    # ------------------------------------------------------------------

    def register(self, target: EvalTarget) -> "RecursiveEstimator":
        """Add a target with zeroed accumulators.

        Raises:
            EstimatorError: if records were already consumed.
            StateSpaceError: if a coordinate is outside E.
        """
        if self.m != 0:
            raise EstimatorError(f"cannot register targets after {self.m} records were consumed")
        for x in target.marginal_points():
            self._add_denominator(x)
        for x, y in target.pairs():
            self._add_numerator(x, y)
        return self

    def _check_point(self, p: Point, reach: Optional[float], role: str) -> None:
        if len(p) != self.space.dimension or not self.space.contains(p):
            raise StateSpaceError(f"{role} {p} is not inside E={self.space}")
        if reach is None:
            return
        dist = self.space.distance_to_boundary(p)
        if not reach < dist:
            message = f"{role} {p}: bandwidth reach {reach:g} >= distance {dist:g} to the boundary"
            self.warnings.append(message)
            logger.warning(message)

    def _add_denominator(self, x: Point) -> int:
        if x in self._den_index:
            return self._den_index[x]
        self._check_point(x, max(self._den_reach, self._num_reach), "x")
        k = len(self._den_index)
        self._den_index[x] = k
        self._den_x = np.vstack([self._den_x, np.asarray(x)[None, :]])
        self._den.grow(1)
        return k

    def _add_numerator(self, x: Point, y: Point) -> int:
        key = (x, y)
        self._add_denominator(x)
        if key in self._num_index:
            return self._num_index[key]
        self._check_point(y, None, "y")
        k = len(self._num_index)
        self._num_index[key] = k
        self._num_x = np.vstack([self._num_x, np.asarray(x)[None, :]])
        self._num_y = np.vstack([self._num_y, np.asarray(y)[None, :]])
        self._num.grow(1)
        return k

    # ------------------------------------------------------------------
    # Streaming
    # ------------------------------------------------------------------

    def update(self, record: JumpRecord) -> "RecursiveEstimator":
        """Consume record j = m + 1.

        Kernel terms are skipped when Z_j^- is at least delta * v_1 (resp.
        delta * w_1) away from x in some coordinate: supports only shrink
        with j, so those terms are exactly 0.

        Raises:
            EstimatorError: if record.index != m + 1.
        """
        j = self.m + 1
        if record.index != j:
            raise EstimatorError(f"expected record {j}, got record {record.index}")
        d = self.space.dimension
        z_minus = np.asarray(record.pre_jump, dtype=float)
        z = np.asarray(record.post_jump, dtype=float)

        if len(self._den_index):
            near = np.all(np.abs(self._den_x - z_minus) < self._den_reach, axis=1)
            idx = np.flatnonzero(near)
            if idx.size:
                v_j = self.v.at(j)
                terms = self.kernel((z_minus - self._den_x[idx]) / v_j) / v_j ** d
                keep = terms > 0.0
                self._den.add(idx[keep], terms[keep])

        if len(self._num_index):
            near = np.all(np.abs(self._num_x - z_minus) < self._num_reach, axis=1)
            near &= np.all(np.abs(self._num_y - z) < self._num_reach, axis=1)
            idx = np.flatnonzero(near)
            if idx.size:
                w_j = self.w.at(j)
                terms = (
                    self.kernel((z_minus - self._num_x[idx]) / w_j)
                    * self.kernel((z - self._num_y[idx]) / w_j)
                    / w_j ** (2 * d)
                )
                keep = terms > 0.0
                self._num.add(idx[keep], terms[keep])

        self.m = j
        return self

    def consume(self, records: Iterable[JumpRecord]) -> "RecursiveEstimator":
        for record in records:
            self.update(record)
        return self

    # ------------------------------------------------------------------
    # Reads
    # ------------------------------------------------------------------

    def denominator_sum(self, x) -> float:
        key = to_point(x)
        if key not in self._den_index:
            raise EstimatorError(f"x={key} is not registered")
        return self._den.value(self._den_index[key])

    def numerator_sum(self, x, y) -> float:
        key = (to_point(x), to_point(y))
        if key not in self._num_index:
            raise EstimatorError(f"(x, y)={key} is not registered")
        return self._num.value(self._num_index[key])

    def _require_sample(self) -> int:
        if self.m < 2:
            raise EstimatorError(f"need at least 2 records for p_hat/h_hat, have {self.m}")
        return self.m - 1

    def p_hat(self, x) -> float:
        """Estimate of the interior density p(x) of the pre-jump chain."""
        n = self._require_sample()
        return self.denominator_sum(x) / n

    def h_hat(self, x, y) -> float:
        """Estimate of h(x, y) = p(x) q(x, y)."""
        n = self._require_sample()
        return self.numerator_sum(x, y) / n

    def q_hat(self, x, y) -> float:
        """Estimate of q(x, y) as the ratio of the raw sums.

        Raises:
            ZeroDenominatorError: if no pre-jump location was seen near x yet.
        """
        num = self.numerator_sum(x, y)
        den = self.denominator_sum(x)
        if den == 0.0:
            raise ZeroDenominatorError(to_point(x), self.m)
        return ratio_estimate(num, den)

    def q_hat_curve(self, x, grid: Sequence) -> List[float]:
        """q_hat(x, y) for each y in grid, sharing the denominator of x."""
        if len(grid) == 0:
            return []
        den = self.denominator_sum(x)
        nums = [self.numerator_sum(x, y) for y in grid]
        if den == 0.0:
            raise ZeroDenominatorError(to_point(x), self.m)
        return [ratio_estimate(num, den) for num in nums]

    def snapshot(self) -> List[EstimateRow]:
        """Current reads at every registered pair, in registration order."""
        n = self._require_sample()
        rows = []
        for (x, y), k in self._num_index.items():
            num = self._num.value(k)
            den = self._den.value(self._den_index[x])
            rows.append(EstimateRow(
                x=x, y=y, n=n,
                q_hat=ratio_estimate(num, den) if den > 0.0 else None,
                p_hat=den / n,
                h_hat=num / n,
            ))
        return rows


# ============================================================================
# From-scratch sums
# ============================================================================

def batch_sums(
    records: Sequence[JumpRecord],
    kernel: Kernel,
    v: BandwidthSchedule,
    w: BandwidthSchedule,
    x,
    y,
) -> Tuple[float, float]:
    """(numerator, denominator) recomputed over all records with exact summation."""
    xp = np.asarray(to_point(x))
    yp = np.asarray(to_point(y))
    d = xp.shape[0]
    num_terms = []
    den_terms = []
    v_all = v.values(len(records))
    w_all = w.values(len(records))
    for rec, v_j, w_j in zip(records, v_all.tolist(), w_all.tolist()):
        z_minus = np.asarray(rec.pre_jump)
        z = np.asarray(rec.post_jump)
        den_terms.append(float(kernel((z_minus - xp) / v_j)) / v_j ** d)
        num_terms.append(float(kernel((z_minus - xp) / w_j)) * float(kernel((z - yp) / w_j)) / w_j ** (2 * d))
    return math.fsum(num_terms), math.fsum(den_terms)
