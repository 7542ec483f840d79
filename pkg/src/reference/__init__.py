"""Reference densities used as oracles."""

from .quadrature import QuadratureSpec, integrate_interval
from .densities import (
    RDensityResult,
    clt_variance,
    forced_mass,
    one_step_sample,
    p_ergodic,
    q_true,
    q_true_curve,
    r_curve,
    r_density,
)

__all__ = [
    'QuadratureSpec', 'integrate_interval',
    'RDensityResult', 'clt_variance', 'forced_mass', 'one_step_sample', 'p_ergodic',
    'q_true', 'q_true_curve', 'r_curve', 'r_density',
]
