"""Experiment harness: replicated runs, studies and acceptance checks."""

from .checks import (
    check_asymmetry,
    check_bandwidth_conditions,
    check_consistency,
    check_curve,
    check_sweep_trend,
    summarize,
)
from .harness import bandwidth_sweep, build_estimator, build_kernel, build_model, run_replicates, run_table
from .studies import check_dual_estimator, clt_study, curve_study, pi_study, standardize_errors

__all__ = [
    'check_asymmetry', 'check_bandwidth_conditions', 'check_consistency', 'check_curve', 'check_sweep_trend', 'summarize',
    'bandwidth_sweep', 'build_estimator', 'build_kernel', 'build_model', 'run_replicates', 'run_table',
    'check_dual_estimator', 'clt_study', 'curve_study', 'pi_study', 'standardize_errors',
]
