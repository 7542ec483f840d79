"""Compactly supported kernels and power-law bandwidth schedules."""

import math
import logging
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate

from src.errors import KernelError
from src.models.config import UNBOUNDED_KERNELS

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-8


# ============================================================================
# Built-in 1-d profiles on (-1, 1)
# ============================================================================

def _epanechnikov(u: np.ndarray) -> np.ndarray:
    return 0.75 * (1.0 - u * u)


def _uniform(u: np.ndarray) -> np.ndarray:
    return np.full_like(u, 0.5)


def _triangular(u: np.ndarray) -> np.ndarray:
    return 1.0 - np.abs(u)


def _quartic(u: np.ndarray) -> np.ndarray:
    w = 1.0 - u * u
    return (15.0 / 16.0) * w * w


# name -> (profile, sup-norm, int K^2)
BUILTIN_PROFILES: Dict[str, Tuple[Callable[[np.ndarray], np.ndarray], float, float]] = {
    "epanechnikov": (_epanechnikov, 0.75, 3.0 / 5.0),
    "uniform": (_uniform, 0.5, 0.5),
    "triangular": (_triangular, 1.0, 2.0 / 3.0),
    "quartic": (_quartic, 15.0 / 16.0, 5.0 / 7.0),
}


class Kernel:
    """Product kernel K(u) = prod_i K1(u_i) with K1 supported on (-delta, delta).

    Construction checks that K1 integrates to 1.
    """

    def __init__(
        self,
        name: str,
        profile: Callable[[np.ndarray], np.ndarray],
        dimension: int = 1,
        delta: float = 1.0,
        sup_norm_1d: Optional[float] = None,
        tau2_1d: Optional[float] = None,
    ):
        if dimension < 1:
            raise KernelError(f"dimension must be >= 1, got {dimension}")
        if not delta > 0.0:
            raise KernelError(f"support radius must be positive, got {delta}")
        self.name = name
        self.profile = profile
        self.dimension = dimension
        self.delta = float(delta)

        mass, _ = integrate.quad(lambda s: float(self._profile_1d(np.asarray(s))), -delta, delta, epsabs=1e-13, epsrel=1e-13)
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise KernelError(f"kernel '{name}' integrates to {mass}, not 1")

        if sup_norm_1d is None:
            scan = np.linspace(-delta, delta, 20001)
            sup_norm_1d = float(np.max(self._profile_1d(scan)))
        if not math.isfinite(sup_norm_1d):
            raise KernelError(f"kernel '{name}' is unbounded")
        if tau2_1d is None:
            tau2_1d, _ = integrate.quad(lambda s: float(self._profile_1d(np.asarray(s))) ** 2, -delta, delta, epsabs=1e-13, epsrel=1e-13)

        self.sup_norm = sup_norm_1d ** dimension
        self.tau2 = tau2_1d ** dimension

    @property
    def radius(self) -> float:
        """Euclidean radius of a ball containing the support."""
        return self.delta * math.sqrt(self.dimension)

    def _profile_1d(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) < self.delta
        return np.where(inside, self.profile(np.where(inside, u, 0.0)), 0.0)

    def __call__(self, u) -> np.ndarray:
        """K(u) for u of shape (..., d); a scalar is accepted when d = 1."""
        u = np.asarray(u, dtype=float)
        if self.dimension == 1 and (u.ndim == 0 or u.shape[-1] != 1):
            return self._profile_1d(u)
        return np.prod(self._profile_1d(u), axis=-1)

    def __repr__(self) -> str:
        return f"Kernel({self.name!r}, d={self.dimension}, delta={self.delta})"


def make_kernel(name: str, dimension: int = 1) -> Kernel:
    """Built-in kernel by name."""
    key = name.strip().lower()
    if key in UNBOUNDED_KERNELS:
        raise KernelError(f"kernel '{name}' has unbounded support")
    if key not in BUILTIN_PROFILES:
        raise KernelError(f"unknown kernel '{name}'; expected one of {sorted(BUILTIN_PROFILES)}")
    profile, sup_norm, tau2 = BUILTIN_PROFILES[key]
    return Kernel(key, profile, dimension=dimension, delta=1.0, sup_norm_1d=sup_norm, tau2_1d=tau2)


def kernel_eval(kernel: Kernel, u) -> float:
    """K(u), exactly 0 outside the support."""
    return float(kernel(u))


def kernel_tau2(kernel: Kernel) -> float:
    """tau^2 = int K^2."""
    return kernel.tau2


# ============================================================================
# Bandwidth schedules
# ============================================================================

class BandwidthSchedule(BaseModel):
    """c_j = initial * j^(-exponent)."""
    model_config = ConfigDict(frozen=True)

    initial: float = Field(gt=0.0, description="Value at j = 1")
    exponent: float = Field(gt=0.0, description="Decay exponent")

    def at(self, j: int) -> float:
        if j < 1:
            raise ValueError(f"bandwidth index must be >= 1, got {j}")
        return self.initial * j ** (-self.exponent)

    def values(self, m: int) -> np.ndarray:
        """c_1, ..., c_m."""
        j = np.arange(1, m + 1, dtype=float)
        return self.initial * j ** (-self.exponent)


def bandwidth(schedule: BandwidthSchedule, j: int) -> float:
    return schedule.at(j)
