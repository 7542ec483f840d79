"""Replicated estimation runs.

Each replicate r simulates its own trajectory on stream (seed, r) and reads
snapshots of the streaming estimators at every n of the n-list in a single
pass. Replicates share nothing, so they run in parallel under joblib and the
table is assembled in replicate order.
"""

import logging
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed

from src.core.cell_model import build_cell_model
from src.core.components import PdmpModel
from src.core.simulation import iter_jumps
from src.core.streams import make_stream
from src.errors import PdmpError, ZeroDenominatorError
from src.estimators.kernels import BandwidthSchedule, Kernel, make_kernel
from src.estimators.recursive import EvalTarget, RecursiveEstimator
from src.experiments.checks import check_bandwidth_conditions
from src.models.config import ExperimentConfig
from src.models.results import ReplicateRow, ReplicateTable
from src.reference.densities import q_true
from src.reference.quadrature import QuadratureSpec
from src.settings import resolve_workers

logger = logging.getLogger(__name__)

Target = Tuple[float, float]
Bandwidths = Tuple[float, float]


# ============================================================================
# Builders
# ============================================================================

def build_model(cfg: ExperimentConfig) -> PdmpModel:
    return build_cell_model(cfg.model)


def build_kernel(cfg: ExperimentConfig, dimension: int) -> Kernel:
    return make_kernel(cfg.kernel.kernel, dimension)


def build_estimator(
    cfg: ExperimentConfig,
    model: PdmpModel,
    kernel: Kernel,
    alpha: Optional[float] = None,
    beta: Optional[float] = None,
) -> RecursiveEstimator:
    """Estimator with the configured v1, w1 and the given (or configured) exponents."""
    bw = cfg.bandwidths
    v = BandwidthSchedule(initial=bw.v1, exponent=bw.alpha if alpha is None else alpha)
    w = BandwidthSchedule(initial=bw.w1, exponent=bw.beta if beta is None else beta)
    return RecursiveEstimator(model.space, kernel, v, w)


def quad_spec(cfg: ExperimentConfig) -> QuadratureSpec:
    exp = cfg.experiment
    return QuadratureSpec(tolerance=exp.quad_tolerance, max_subdivisions=exp.quad_limit, horizon=exp.quad_horizon)


# ============================================================================
# One replicate
# ============================================================================

def _row(
    replicate: int, n: int, target: Target, combo: Bandwidths, oracle: float, **values
) -> ReplicateRow:
    return ReplicateRow(
        replicate=replicate, stream=replicate, n=n,
        x=target[0], y=target[1], alpha=combo[0], beta=combo[1],
        q_true=oracle, **values,
    )


def _snapshot_row(
    est: RecursiveEstimator, replicate: int, n: int, target: Target, combo: Bandwidths, oracle: float
) -> ReplicateRow:
    x, y = target
    p_hat = est.p_hat(x)
    h_hat = est.h_hat(x, y)
    try:
        q_hat = est.q_hat(x, y)
    except ZeroDenominatorError as exc:
        return _row(replicate, n, target, combo, oracle, p_hat=p_hat, h_hat=h_hat, status="failed", error=str(exc))
    rel_error = abs(q_hat - oracle) / oracle if oracle > 0.0 else None
    return _row(replicate, n, target, combo, oracle, q_hat=q_hat, p_hat=p_hat, h_hat=h_hat, rel_error=rel_error)


def replicate_rows(
    cfg: ExperimentConfig,
    replicate: int,
    combos: Sequence[Bandwidths],
    targets: Sequence[Target],
    jump_counts: Sequence[int],
) -> List[ReplicateRow]:
    """Rows of one replicate, ordered by n, then (alpha, beta), then target.

    A simulation or estimator error ends the replicate: every snapshot not
    yet read is recorded as a failed row carrying the message.
    """
    seed = cfg.require_seed()
    model = build_model(cfg)
    kernel = build_kernel(cfg, model.dimension)
    oracle = {t: q_true(model, *t) for t in targets}

    estimators: Dict[Bandwidths, RecursiveEstimator] = {}
    for combo in combos:
        est = build_estimator(cfg, model, kernel, *combo)
        for t in targets:
            est.register(EvalTarget.pair(*t))
        estimators[combo] = est

    rows: List[ReplicateRow] = []
    pending = sorted(jump_counts)
    try:
        rng = make_stream(seed, replicate)
        for record in iter_jumps(model, (cfg.model.x0,), pending[-1] + 1, rng):
            for est in estimators.values():
                est.update(record)
            if record.index == pending[0] + 1:
                n = pending.pop(0)
                for combo, est in estimators.items():
                    rows.extend(_snapshot_row(est, replicate, n, t, combo, oracle[t]) for t in targets)
    except PdmpError as exc:
        logger.warning(f"Replicate {replicate} failed with {len(pending)} snapshot(s) unread: {exc}")
        for n in pending:
            for combo in combos:
                rows.extend(
                    _row(replicate, n, t, combo, oracle[t], status="failed", error=f"{type(exc).__name__}: {exc}")
                    for t in targets
                )
    return rows


# ============================================================================
# Tables
# ============================================================================

def _prepare(cfg: ExperimentConfig, combos: Sequence[Bandwidths], targets: Sequence[Target]) -> None:
    """Fail fast on bad targets and log exponent warnings before any replicate starts."""
    model = build_model(cfg)
    kernel = build_kernel(cfg, model.dimension)
    for alpha, beta in combos:
        for message in check_bandwidth_conditions(alpha, beta, model.dimension):
            logger.warning(message)
        est = build_estimator(cfg, model, kernel, alpha, beta)
        for t in targets:
            est.register(EvalTarget.pair(*t))


def run_table(
    cfg: ExperimentConfig,
    combos: Sequence[Bandwidths],
    targets: Sequence[Target],
    jump_counts: Sequence[int],
    replicates: int,
) -> ReplicateTable:
    """Run `replicates` replicates in parallel and merge their rows by replicate id."""
    combos = list(combos)
    targets = [tuple(t) for t in targets]
    if not combos or not targets or not jump_counts:
        return ReplicateTable()
    cfg.require_seed()
    _prepare(cfg, combos, targets)

    n_jobs = min(resolve_workers(cfg.experiment.workers), replicates)
    logger.info(
        f"Running {replicates} replicate(s) x {len(combos)} bandwidth pair(s) x {len(targets)} target(s), "
        f"n up to {max(jump_counts)}, {n_jobs} worker(s)"
    )
    if n_jobs == 1:
        parts = [replicate_rows(cfg, r, combos, targets, jump_counts) for r in range(replicates)]
    else:
        parts = Parallel(n_jobs=n_jobs)(
            delayed(replicate_rows)(cfg, r, combos, targets, jump_counts) for r in range(replicates)
        )
    table = ReplicateTable(rows=[row for part in parts for row in part])
    failed = len(table.failures())
    if failed:
        logger.warning(f"{failed} of {len(table)} rows failed")
    logger.info(f"Replicate table complete: {len(table)} rows")
    return table


def run_replicates(cfg: ExperimentConfig) -> ReplicateTable:
    """R x |n-list| x |targets| rows at the configured bandwidths."""
    exp = cfg.experiment
    combos = [(cfg.bandwidths.alpha, cfg.bandwidths.beta)]
    return run_table(cfg, combos, exp.targets, exp.jump_counts, exp.replicates)


def bandwidth_sweep(
    cfg: ExperimentConfig,
    alphas: Optional[Sequence[float]] = None,
    betas: Optional[Sequence[float]] = None,
) -> ReplicateTable:
    """Cross-product sweep over (alpha, beta) at n = sweep_jumps.

    All pairs of one replicate are read from the same trajectory.
    """
    exp = cfg.experiment
    alphas = exp.sweep_alphas if alphas is None else list(alphas)
    betas = exp.sweep_betas if betas is None else list(betas)
    combos = list(product(alphas, betas))
    return run_table(cfg, combos, exp.targets, [exp.sweep_jumps], exp.replicates)
