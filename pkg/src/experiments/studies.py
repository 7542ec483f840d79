"""Single-target studies: CLT standardization, invariant law of Z^-, transition-density curves."""

import math
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from src.core.simulation import iter_jumps, simulate
from src.core.streams import PILOT_STREAM, make_stream
from src.errors import ZeroDenominatorError
from src.estimators.recursive import EvalTarget
from src.experiments.checks import check_bandwidth_conditions
from src.experiments.harness import build_estimator, build_kernel, build_model, quad_spec, run_table
from src.models.config import ExperimentConfig
from src.models.results import (
    CheckResult,
    CltResult,
    CltRow,
    CurvePoint,
    CurveStudyResult,
    PiStudyResult,
)
from src.reference.densities import clt_variance, p_ergodic, q_true, q_true_curve
from src.settings import resolve_workers

logger = logging.getLogger(__name__)

KS_LEVEL = 0.01
VARIANCE_WINDOW = (0.7, 1.3)


# ============================================================================
# CLT
# ============================================================================

def standardize_errors(
    q_hats: Sequence[Optional[float]],
    q_oracle: float,
    n: int,
    variance: float,
    alpha: float,
    d: int,
) -> List[Optional[float]]:
    """n^{(1 - alpha d)/2} (q_hat - q) / sqrt(variance); None entries stay None."""
    if not variance > 0.0:
        raise ValueError(f"variance must be positive, got {variance}")
    scale = n ** ((1.0 - alpha * d) / 2.0) / math.sqrt(variance)
    return [None if q is None else scale * (q - q_oracle) for q in q_hats]


def clt_study(cfg: ExperimentConfig, target: Optional[Tuple[float, float]] = None) -> CltResult:
    """Standardized q_hat errors over clt_replicates replicates at n = clt_jumps.

    p(x) in the variance comes from p_ergodic on one pilot trajectory drawn
    from a reserved stream, shared by all replicates.
    The variance carries the v1^-d factor of the configured denominator
    schedule.
    """
    exp = cfg.experiment
    seed = cfg.require_seed()
    x, y = tuple(target) if target is not None else exp.clt_target
    alpha, beta, n = exp.clt_alpha, exp.clt_beta, exp.clt_jumps

    model = build_model(cfg)
    d = model.dimension
    warnings = check_bandwidth_conditions(alpha, beta, d, clt=True)
    for message in warnings:
        logger.warning(message)

    kernel = build_kernel(cfg, d)
    q_oracle = q_true(model, x, y)
    pilot = simulate(model, (cfg.model.x0,), exp.pilot_jumps, seed, PILOT_STREAM)
    p_estimate = p_ergodic(model, pilot, x, quad_spec(cfg), n_jobs=resolve_workers(exp.workers))
    variance = clt_variance(q_oracle, p_estimate, kernel.tau2, alpha, d, v1=cfg.bandwidths.v1)

    table = run_table(cfg, [(alpha, beta)], [(x, y)], [n], exp.clt_replicates)
    q_hats = [r.q_hat if r.status == "ok" else None for r in table.rows]
    z = standardize_errors(q_hats, q_oracle, n, variance, alpha, d)
    rows = [
        CltRow(replicate=r.replicate, q_hat=r.q_hat, standardized=s, status=r.status, error=r.error)
        for r, s in zip(table.rows, z)
    ]

    result = CltResult(
        x=x, y=y, n=n, alpha=alpha, beta=beta,
        q_true=q_oracle, p_estimate=p_estimate, variance=variance,
        rows=rows, failures=len(table.failures()), warnings=warnings,
    )
    values = result.standardized()
    if len(values) >= 2:
        ks = stats.kstest(values, "norm")
        sample_variance = float(np.var(values, ddof=1))
        low, high = VARIANCE_WINDOW
        result = result.model_copy(update={
            "ks_statistic": float(ks.statistic),
            "ks_pvalue": float(ks.pvalue),
            "sample_variance": sample_variance,
            "passed": bool(ks.pvalue >= KS_LEVEL and low <= sample_variance <= high),
        })
    logger.info(
        f"CLT at ({x}, {y}): {len(values)} standardized errors, KS p={result.ks_pvalue}, "
        f"variance={result.sample_variance}, passed={result.passed}"
    )
    return result


# ============================================================================
# Invariant law of the pre-jump chain
# ============================================================================

def pi_grid(cfg: ExperimentConfig) -> List[float]:
    exp = cfg.experiment
    if exp.pi_points == 1:
        return [0.5 * (exp.pi_lower + exp.pi_upper)]
    return np.linspace(exp.pi_lower, exp.pi_upper, exp.pi_points).tolist()


def pi_study(cfg: ExperimentConfig, grid: Optional[Sequence[float]] = None) -> PiStudyResult:
    """p_hat over a grid, the interior histogram of Z^- and the boundary-atom frequency.

    One trajectory of max(n-list) + 1 jumps on stream 0. The histogram is a
    density w.r.t. the total number of records, so it estimates p directly
    and is compared to p_hat at the bin centers.
    """
    exp = cfg.experiment
    seed = cfg.require_seed()
    grid = pi_grid(cfg) if grid is None else [float(g) for g in grid]
    n = exp.jump_counts[-1]

    edges = np.linspace(exp.pi_lower, exp.pi_upper, exp.pi_bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])

    model = build_model(cfg)
    est = build_estimator(cfg, model, build_kernel(cfg, model.dimension))
    est.register(EvalTarget.marginal_grid(grid))
    est.register(EvalTarget.marginal_grid(centers.tolist()))

    traj = simulate(model, (cfg.model.x0,), n + 1, seed, stream=0)
    est.consume(traj.records)

    pre = traj.pre_jump_array()[:, 0]
    forced = np.asarray([r.forced for r in traj.records])
    counts, _ = np.histogram(pre[~forced], bins=edges)
    hist = counts / (len(traj) * np.diff(edges))

    p_centers = np.asarray([est.p_hat(c) for c in centers])
    peak = float(hist.max())
    gap = float(np.max(np.abs(p_centers - hist)))
    sup_distance = gap / peak if peak > 0.0 else gap

    logger.info(f"pi study: n={n}, atom frequency={traj.forced_fraction():.4f}, relative sup distance={sup_distance:.4f}")
    return PiStudyResult(
        n=n,
        grid=grid,
        p_hat=[est.p_hat(g) for g in grid],
        bin_edges=edges.tolist(),
        hist_density=hist.tolist(),
        p_hat_centers=p_centers.tolist(),
        atom_frequency=traj.forced_fraction(),
        sup_distance=sup_distance,
    )


def check_dual_estimator(cfg: ExperimentConfig, x: float = 1.0, tolerance: float = 0.10) -> CheckResult:
    """|p_hat(x) - p_ergodic(x)| / p_ergodic(x) on one trajectory of max(n-list) + 1 jumps."""
    exp = cfg.experiment
    seed = cfg.require_seed()
    n = exp.jump_counts[-1]
    model = build_model(cfg)
    est = build_estimator(cfg, model, build_kernel(cfg, model.dimension))
    est.register(EvalTarget.point(x))

    traj = simulate(model, (cfg.model.x0,), n + 1, seed, stream=0)
    est.consume(traj.records)
    p_stream = est.p_hat(x)
    p_avg = p_ergodic(model, traj, x, quad_spec(cfg), n_jobs=resolve_workers(exp.workers))
    rel = abs(p_stream - p_avg) / p_avg
    return CheckResult(
        name="dual_estimator",
        passed=rel <= tolerance,
        details={"x": x, "p_hat": p_stream, "p_ergodic": p_avg, "rel_difference": rel},
    )


# ============================================================================
# Transition-density curves
# ============================================================================

def curve_grid(cfg: ExperimentConfig, x: float) -> List[float]:
    """Evenly spaced y around x/2, where the cell transition density concentrates, clipped to E."""
    exp = cfg.experiment
    model = build_model(cfg)
    lo = x / 2.0 - exp.curve_half_width
    hi = x / 2.0 + exp.curve_half_width
    ys = np.linspace(lo, hi, exp.curve_points) if exp.curve_points > 1 else np.asarray([x / 2.0])
    return [float(y) for y in ys if model.space.contains((y,))]


def curve_study(cfg: ExperimentConfig, x: float, grid: Optional[Sequence[float]] = None) -> CurveStudyResult:
    """q_hat(x, .) over a grid at every n of the n-list, from one trajectory on stream 0."""
    exp = cfg.experiment
    seed = cfg.require_seed()
    grid = curve_grid(cfg, x) if grid is None else [float(g) for g in grid]

    model = build_model(cfg)
    est = build_estimator(cfg, model, build_kernel(cfg, model.dimension))
    est.register(EvalTarget.curve(x, grid))
    oracle = q_true_curve(model, x, grid)

    points: List[CurvePoint] = []
    pending = list(exp.jump_counts)
    rng = make_stream(seed, 0)
    for record in iter_jumps(model, (cfg.model.x0,), pending[-1] + 1, rng):
        est.update(record)
        if record.index == pending[0] + 1:
            n = pending.pop(0)
            try:
                q_hats: List[Optional[float]] = est.q_hat_curve(x, grid)
            except ZeroDenominatorError as exc:
                logger.warning(f"curve at x={x}, n={n}: {exc}")
                q_hats = [None] * len(grid)
            points.extend(CurvePoint(n=n, y=y, q_hat=q, q_true=qt) for y, q, qt in zip(grid, q_hats, oracle))
    logger.info(f"curve study at x={x}: {len(grid)} grid points x {len(exp.jump_counts)} snapshots")
    return CurveStudyResult(x=x, grid=grid, points=points)
