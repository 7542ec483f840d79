"""Bandwidth-condition warnings, boxplot summaries and acceptance checks on replicate tables."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.models.results import CheckResult, CurveStudyResult, ReplicateRow, ReplicateTable, SummaryRow

logger = logging.getLogger(__name__)

WHISKER_SPAN = 1.5
CURVE_EDGE_MARGIN = 0.05


# ============================================================================
# Bandwidth exponent windows
# ============================================================================

def check_bandwidth_conditions(alpha: float, beta: float, d: int, clt: bool = False) -> List[str]:
    """Warnings for exponents outside the consistency window, and the CLT window if asked.

    Consistency needs alpha d < 1 and 8 beta d < 1. The CLT additionally
    needs 1/(2+d) < alpha < 1/d and 2(1 - alpha d) < 4 beta < min(1/(2d), alpha - 1/(2d)).
    """
    warnings = []
    if not alpha * d < 1.0:
        warnings.append(f"consistency needs alpha*d < 1, got alpha={alpha:g}, d={d}")
    if not 8.0 * beta * d < 1.0:
        warnings.append(f"consistency needs 8*beta*d < 1, got beta={beta:g}, d={d}")
    if clt:
        if not 1.0 / (2.0 + d) < alpha < 1.0 / d:
            warnings.append(f"CLT needs 1/(2+d) < alpha < 1/d, got alpha={alpha:g}, d={d}")
        low = 2.0 * (1.0 - alpha * d)
        high = min(1.0 / (2.0 * d), alpha - 1.0 / (2.0 * d))
        if not low < 4.0 * beta < high:
            warnings.append(
                f"CLT needs {low:g} < 4*beta < {high:g}, got 4*beta={4.0 * beta:g}"
                + (" (window is empty)" if low >= high else "")
            )
    return warnings


# ============================================================================
# Boxplot statistics
# ============================================================================

def _group_key(row: ReplicateRow) -> Tuple[float, float, int, float, float]:
    return (row.x, row.y, row.n, row.alpha, row.beta)


def _boxplot(values: np.ndarray) -> Dict[str, float]:
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    iqr = q3 - q1
    inside = values[(values >= q1 - WHISKER_SPAN * iqr) & (values <= q3 + WHISKER_SPAN * iqr)]
    return {
        "median": float(median),
        "q1": float(q1),
        "q3": float(q3),
        "iqr": float(iqr),
        "whisker_low": float(inside.min()),
        "whisker_high": float(inside.max()),
    }


def summarize(table: ReplicateTable) -> List[SummaryRow]:
    """Boxplot statistics of q_hat per (target, n, alpha, beta), over successful replicates."""
    groups: Dict[Tuple, List[ReplicateRow]] = {}
    for row in table.rows:
        groups.setdefault(_group_key(row), []).append(row)

    out = []
    for (x, y, n, alpha, beta), rows in groups.items():
        ok = [r for r in rows if r.status == "ok" and r.q_hat is not None]
        summary = SummaryRow(
            x=x, y=y, n=n, alpha=alpha, beta=beta,
            successes=len(ok),
            failures=len(rows) - len(ok),
        )
        if ok:
            stats = _boxplot(np.asarray([r.q_hat for r in ok]))
            errors = [r.rel_error for r in ok if r.rel_error is not None]
            summary = summary.model_copy(update={
                **stats,
                "median_rel_error": float(np.median(errors)) if errors else None,
            })
        out.append(summary)
    return out


def median_rel_error(rows: Sequence[ReplicateRow]) -> Optional[float]:
    errors = [r.rel_error for r in rows if r.rel_error is not None]
    return float(np.median(errors)) if errors else None


def interquartile_range(rows: Sequence[ReplicateRow]) -> Optional[float]:
    values = [r.q_hat for r in rows if r.q_hat is not None]
    if not values:
        return None
    q1, q3 = np.percentile(values, [25.0, 75.0])
    return float(q3 - q1)


# ============================================================================
# Acceptance checks
# ============================================================================

def check_consistency(
    table: ReplicateTable,
    target: Tuple[float, float],
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
    max_inversions: int = 1,
    final_tolerance: Optional[float] = None,
) -> CheckResult:
    """Median relative error at target should not grow with n.

    Up to max_inversions adjacent increases are tolerated as Monte-Carlo
    noise. With final_tolerance, the median at the largest n must also be
    at most that value.
    """
    rows = table.select(target=target, alpha=alpha, beta=beta)
    ns = sorted({r.n for r in rows})
    medians = [median_rel_error([r for r in rows if r.n == n]) for n in ns]
    if not ns or any(m is None for m in medians):
        return CheckResult(name="consistency", passed=False, details={"n": ns, "medians": medians})

    inversions = sum(1 for a, b in zip(medians, medians[1:]) if b > a)
    passed = inversions <= max_inversions
    if final_tolerance is not None:
        passed = passed and medians[-1] <= final_tolerance
    logger.info(f"consistency at {tuple(target)}: medians={medians}, inversions={inversions}, passed={passed}")
    return CheckResult(
        name="consistency",
        passed=passed,
        details={"n": ns, "medians": medians, "inversions": inversions},
    )


def check_asymmetry(
    table: ReplicateTable,
    better: Tuple[float, float],
    worse: Tuple[float, float],
    n: int,
) -> CheckResult:
    """Median relative error at `worse` is at least the one at `better`."""
    good = median_rel_error(table.select(target=better, n=n))
    bad = median_rel_error(table.select(target=worse, n=n))
    passed = good is not None and bad is not None and bad >= good
    return CheckResult(name="asymmetry", passed=passed, details={"better": good, "worse": bad, "n": n})


def check_sweep_trend(
    table: ReplicateTable,
    target: Tuple[float, float],
    narrow_alpha: float,
    wide_alpha: float,
    beta: Optional[float] = None,
) -> CheckResult:
    """IQR of q_hat at narrow_alpha does not exceed the IQR at wide_alpha."""
    iqr_narrow = interquartile_range(table.select(target=target, alpha=narrow_alpha, beta=beta))
    iqr_wide = interquartile_range(table.select(target=target, alpha=wide_alpha, beta=beta))
    passed = iqr_narrow is not None and iqr_wide is not None and iqr_narrow <= iqr_wide
    return CheckResult(
        name="sweep_trend",
        passed=passed,
        details={f"iqr_alpha_{narrow_alpha:g}": iqr_narrow, f"iqr_alpha_{wide_alpha:g}": iqr_wide},
    )


def check_curve(
    result: CurveStudyResult,
    n: int,
    tolerance: float = 0.15,
    margin: float = CURVE_EDGE_MARGIN,
) -> CheckResult:
    """Max deviation of q_hat(x, .) from q(x, .), relative to its peak, inside the support.

    q(x, .) jumps at the ends of its truncation window and the kernel smooths
    those jumps over about one bandwidth; grid points within `margin` of either
    end are left out.
    """
    interior = result.max_deviation(n, margin=margin)
    overall = result.max_deviation(n)
    passed = interior <= tolerance
    logger.info(f"curve at x={result.x}, n={n}: interior deviation={interior:.4f}, overall={overall:.4f}, passed={passed}")
    return CheckResult(
        name="curve",
        passed=passed,
        details={"x": result.x, "n": n, "margin": margin, "interior_deviation": interior, "max_deviation": overall},
    )
