"""Exception hierarchy shared by every subpackage."""


class PdmpError(Exception):
    """Base class for all toolkit errors."""


class StateSpaceError(PdmpError, ValueError):
    """Invalid box or a point outside the open state space."""


class ModelError(PdmpError, RuntimeError):
    """Model components disagree, e.g. a post-jump location left E."""


class SamplingError(PdmpError, RuntimeError):
    """A sampler could not produce a draw."""


class SimulationRequestError(PdmpError, ValueError):
    """Invalid simulation request, e.g. fewer than one jump."""


class KernelError(PdmpError, ValueError):
    """Kernel is not normalized, not bounded or not compactly supported."""


class EstimatorError(PdmpError, RuntimeError):
    """Estimator contract violation (registration order, record order, reads)."""


class ZeroDenominatorError(EstimatorError):
    """No pre-jump observation near x yet: the ratio estimate is undefined."""

    def __init__(self, x, m: int):
        self.x = x
        self.m = m
        super().__init__(f"denominator sum is 0 at x={x} after {m} records")


class QuadratureError(PdmpError, RuntimeError):
    """Adaptive quadrature did not converge within its subdivision budget."""


class ConfigError(PdmpError, ValueError):
    """Unknown key, type mismatch or constraint violation in a run config."""


class FileFormatError(PdmpError, ValueError):
    """An input CSV does not follow the documented layout."""
