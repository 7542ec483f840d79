"""Estimators module: kernels, bandwidth schedules and the streaming estimator state."""

from .kernels import BandwidthSchedule, Kernel, bandwidth, kernel_eval, kernel_tau2, make_kernel
from .summation import CompensatedSums, two_sum
from .recursive import EstimateRow, EvalTarget, RecursiveEstimator, batch_sums, ratio_estimate

__all__ = [
    'BandwidthSchedule', 'Kernel', 'bandwidth', 'kernel_eval', 'kernel_tau2', 'make_kernel',
    'CompensatedSums', 'two_sum',
    'EstimateRow', 'EvalTarget', 'RecursiveEstimator', 'batch_sums', 'ratio_estimate',
]
