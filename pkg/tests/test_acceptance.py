"""Desk-scale reproduction runs on the cell model (minutes each).

Deselected by default; run with `pytest -m slow`.
"""

import numpy as np
import pytest
from scipy.integrate import trapezoid

from src.core import build_cell_model, make_stream, simulate
from src.estimators import EvalTarget
from src.experiments import bandwidth_sweep, build_estimator, build_kernel, run_replicates
from src.experiments.checks import check_asymmetry, check_consistency, check_curve, check_sweep_trend
from src.experiments.studies import check_dual_estimator, clt_study, curve_study, pi_study
from src.models import ExperimentConfig
from src.reference.densities import r_curve, one_step_sample
from src.services.files import REPLICATE_COLUMNS, ResultFiles

pytestmark = pytest.mark.slow

SEED = 20240611


@pytest.fixture(scope="module")
def full_cfg():
    return ExperimentConfig().with_experiment(seed=SEED, replicates=20)


@pytest.fixture(scope="module")
def consistency_table(full_cfg):
    return run_replicates(full_cfg)


def test_consistency(consistency_table):
    result = check_consistency(consistency_table, (1.0, 0.5), final_tolerance=0.10)
    assert result.passed, result.details


def test_accuracy_asymmetry(consistency_table):
    result = check_asymmetry(consistency_table, better=(1.0, 0.5), worse=(2.0, 1.0), n=50000)
    assert result.passed, result.details


def test_clt(full_cfg):
    result = clt_study(full_cfg)
    assert result.failures == 0
    assert result.ks_pvalue >= 0.01
    assert 0.7 <= result.sample_variance <= 1.3


def test_single_estimate_at_one_half(full_cfg):
    model = build_cell_model()
    est = build_estimator(full_cfg, model, build_kernel(full_cfg, 1))
    est.register(EvalTarget.pair(1.0, 0.5))
    est.consume(simulate(model, (1.0,), 50001, SEED, stream=0).records)
    assert est.n == 50000
    assert abs(est.q_hat(1.0, 0.5) - 5.8437) / 5.8437 <= 0.15


def test_invariant_law_matches_histogram(full_cfg):
    result = pi_study(full_cfg)
    assert result.n == 50000
    assert result.sup_distance <= 0.1


def test_curve_inside_the_window(full_cfg):
    cfg = full_cfg.with_experiment(jump_counts=[50000])
    result = curve_study(cfg, 1.0)
    assert len(result.grid) == 512
    check = check_curve(result, 50000, tolerance=0.15)
    assert check.passed, check.details


def test_dual_estimator(full_cfg):
    result = check_dual_estimator(full_cfg, x=1.0, tolerance=0.10)
    assert result.passed, result.details


def test_one_step_oracle():
    model = build_cell_model()
    draws = 10**6
    pre, forced = one_step_sample(model, 1.0, draws, make_stream(SEED, 0))
    edges = np.linspace(0.3, 2.98, 41)
    counts, _ = np.histogram(pre[~forced, 0], bins=edges)

    masses = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        zs = np.linspace(lo, hi, 9)
        masses.append(trapezoid([r.value for r in r_curve(model, (1.0,), [(z,) for z in zs])], zs))
    masses = np.asarray(masses)
    expected = draws * masses
    se = np.sqrt(np.maximum(expected * (1.0 - masses), 1.0))

    occupied = counts > 0
    agree = np.abs(counts - expected) <= 3.0 * se
    assert agree[occupied].mean() >= 0.95


def test_sweep_trend(full_cfg):
    cfg = full_cfg.with_experiment(replicates=50, sweep_jumps=10000)
    table = bandwidth_sweep(cfg, alphas=[0.125, 0.5], betas=[0.1])
    result = check_sweep_trend(table, (1.0, 0.5), narrow_alpha=0.125, wide_alpha=0.5, beta=0.1)
    assert result.passed, result.details


def test_parallel_runs_are_byte_identical(full_cfg):
    cfg = full_cfg.with_experiment(replicates=4, jump_counts=[5000])

    def text(table):
        return ResultFiles.csv_text(REPLICATE_COLUMNS, ([getattr(r, c) for c in REPLICATE_COLUMNS] for r in table.rows))

    assert text(run_replicates(cfg.with_experiment(workers=1))) == text(run_replicates(cfg.with_experiment(workers=2)))
