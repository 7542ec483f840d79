"""Pydantic models for experiment outputs."""

from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field


class ReplicateRow(BaseModel):
    """One (replicate, n, target, bandwidth) estimate."""
    replicate: int = Field(ge=0)
    stream: int = Field(ge=0, description="Random stream id the replicate was simulated with")
    n: int = Field(ge=1, description="Number of observed jumps (sums run over n + 1 records)")
    x: float
    y: float
    alpha: float
    beta: float
    q_hat: Optional[float] = None
    p_hat: Optional[float] = None
    h_hat: Optional[float] = None
    q_true: float
    rel_error: Optional[float] = None
    status: Literal["ok", "failed"] = "ok"
    error: Optional[str] = None

    @property
    def target(self) -> Tuple[float, float]:
        return (self.x, self.y)


class ReplicateTable(BaseModel):
    """All rows of a replicated experiment, ordered by replicate id."""
    rows: List[ReplicateRow] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def successes(self) -> List[ReplicateRow]:
        return [r for r in self.rows if r.status == "ok"]

    def failures(self) -> List[ReplicateRow]:
        return [r for r in self.rows if r.status == "failed"]

    def select(
        self,
        target: Optional[Tuple[float, float]] = None,
        n: Optional[int] = None,
        alpha: Optional[float] = None,
        beta: Optional[float] = None,
        ok_only: bool = True,
    ) -> List[ReplicateRow]:
        out = []
        for r in self.rows:
            if ok_only and r.status != "ok":
                continue
            if target is not None and r.target != tuple(target):
                continue
            if n is not None and r.n != n:
                continue
            if alpha is not None and r.alpha != alpha:
                continue
            if beta is not None and r.beta != beta:
                continue
            out.append(r)
        return out

    def without_replicate(self, replicate: int) -> "ReplicateTable":
        return ReplicateTable(rows=[r for r in self.rows if r.replicate != replicate])


class SummaryRow(BaseModel):
    """Boxplot statistics of q_hat over replicates for one group."""
    x: float
    y: float
    n: int
    alpha: float
    beta: float
    successes: int
    failures: int
    median: Optional[float] = None
    q1: Optional[float] = None
    q3: Optional[float] = None
    iqr: Optional[float] = None
    whisker_low: Optional[float] = None
    whisker_high: Optional[float] = None
    median_rel_error: Optional[float] = None


class CltRow(BaseModel):
    replicate: int
    q_hat: Optional[float] = None
    standardized: Optional[float] = None
    status: Literal["ok", "failed"] = "ok"
    error: Optional[str] = None


class CltResult(BaseModel):
    """Standardized errors n^{(1 - alpha d)/2} (q_hat - q) / sqrt(var) over replicates."""
    x: float
    y: float
    n: int
    alpha: float
    beta: float
    q_true: float
    p_estimate: float
    variance: float
    rows: List[CltRow] = Field(default_factory=list)
    ks_statistic: Optional[float] = None
    ks_pvalue: Optional[float] = None
    sample_variance: Optional[float] = None
    failures: int = 0
    passed: bool = False
    warnings: List[str] = Field(default_factory=list)

    def standardized(self) -> List[float]:
        return [r.standardized for r in self.rows if r.standardized is not None]


class PiStudyResult(BaseModel):
    """p_hat over a grid next to the empirical distribution of pre-jump locations."""
    n: int
    grid: List[float]
    p_hat: List[float]
    bin_edges: List[float]
    hist_density: List[float]
    p_hat_centers: List[float]
    atom_frequency: float = Field(ge=0.0, le=1.0, description="Fraction of forced (boundary) pre-jump locations")
    sup_distance: float = Field(ge=0.0, description="max |p_hat - histogram| over bins, relative to the histogram peak")


class CurvePoint(BaseModel):
    n: int
    y: float
    q_hat: Optional[float]
    q_true: float


class CurveStudyResult(BaseModel):
    """q_hat(x, .) over a grid at every n of the n-list, from one trajectory."""
    x: float
    grid: List[float]
    points: List[CurvePoint] = Field(default_factory=list)

    def at(self, n: int) -> List[CurvePoint]:
        return [p for p in self.points if p.n == n]

    def max_deviation(self, n: int, margin: float = 0.0) -> float:
        """max |q_hat - q| at n, relative to the peak of q.

        With margin > 0 only grid points at least `margin` inside the support
        of q(x, .), as seen on the grid, are compared.

        Raises:
            ValueError: if no grid point is left to compare.
        """
        pts = self.at(n)
        support = [p.y for p in pts if p.q_true > 0.0]
        if margin > 0.0 and support:
            lo, hi = min(support) + margin, max(support) - margin
            pts = [p for p in pts if lo - 1e-12 <= p.y <= hi + 1e-12]
        if not pts:
            raise ValueError(f"no grid point at n={n} within margin {margin} of the support interior")
        peak = max(p.q_true for p in self.at(n))
        return max(abs((p.q_hat or 0.0) - p.q_true) for p in pts) / peak


class CheckResult(BaseModel):
    """Outcome of an acceptance check on a replicate table."""
    name: str
    passed: bool
    details: Dict[str, object] = Field(default_factory=dict)
