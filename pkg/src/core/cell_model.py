"""Growth-fragmentation model of a cell size on E = (0, 3).

Exponential growth x e^{tau t}, Weibull inter-jump times with shape 1/x, and
a post-jump size drawn from a Gaussian N(x/2, sigma^2) truncated to
(x/2 - sigma, x/2 + sigma) intersected with E.
"""

import math
import logging
from typing import Tuple

import numpy as np
from scipy import special

from src.core.components import FlowSpec, JumpLaw, NoJumps, PdmpModel, TransitionLaw
from src.core.space import StateSpace, as_point
from src.errors import SamplingError
from src.models.config import CellModelParams

logger = logging.getLogger(__name__)

CELL_LOWER = 0.0
CELL_UPPER = 3.0

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _size(x):
    return np.asarray(x, dtype=float)[..., 0]


class CellFlow(FlowSpec):
    """Phi(x, t) = x exp(tau t)."""

    def __init__(self, tau_flow: float = 0.9, upper: float = CELL_UPPER):
        self.tau_flow = tau_flow
        self.upper = upper

    def flow(self, x, t):
        x = np.asarray(x, dtype=float)
        growth = np.exp(self.tau_flow * np.asarray(t, dtype=float))
        return x * growth[..., None]

    def exit_time(self, x, space: StateSpace = None) -> float:
        size = float(_size(x))
        return math.log(self.upper / size) / self.tau_flow

    def reverse_exit_time(self, x, space: StateSpace = None) -> float:
        # x e^{-tau s} decays towards 0 without reaching it.
        return -math.inf

    def jacobian(self, x, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.exp(self.tau_flow * t), np.broadcast_shapes(np.shape(x)[:-1], t.shape)).copy()


class CellJumpLaw(JumpLaw):
    """Weibull law with shape 1/x: G(x, t) = exp(-t^{1/x})."""

    def survival(self, z, t):
        size = _size(z)
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            out = np.exp(-np.power(t, 1.0 / size))
        return float(out) if np.ndim(out) == 0 else out

    def density(self, z, t):
        """f(x, t) = t^{(1-x)/x} exp(-t^{1/x}) / x.

        At t = 0 the limit is returned: +inf for x > 1, 1 for x = 1, 0 for x < 1.
        """
        size = _size(z)
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.power(t, (1.0 - size) / size) * np.exp(-np.power(t, 1.0 / size)) / size
        at_zero = t == 0.0
        if np.any(at_zero):
            limit = np.where(size > 1.0, np.inf, np.where(size == 1.0, 1.0, 0.0))
            out = np.where(at_zero, limit, out)
        out = np.nan_to_num(out, nan=0.0, posinf=np.inf)
        return float(out) if np.ndim(out) == 0 else out

    def inverse_survival(self, z, u):
        """G^{-1}(x, u) = (-ln u)^x."""
        size = _size(z)
        out = np.power(-np.log(u), size)
        return float(out) if np.ndim(out) == 0 else out


class CellTransitionLaw(TransitionLaw):
    """Truncated Gaussian around x/2 with standard deviation sigma."""

    def __init__(self, sigma: float, space: StateSpace):
        if sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        super().__init__(space)
        self.sigma = sigma

    def window(self, x) -> Tuple[float, float]:
        """Truncation window (x/2 - sigma, x/2 + sigma) intersected with E."""
        center = 0.5 * float(_size(x))
        lo = max(center - self.sigma, float(self.space.lower[0]))
        hi = min(center + self.sigma, float(self.space.upper[0]))
        return lo, hi

    def _mass_bounds(self, x) -> Tuple[float, float, float]:
        center = 0.5 * float(_size(x))
        lo, hi = self.window(x)
        a = (lo - center) / self.sigma
        b = (hi - center) / self.sigma
        return center, float(special.ndtr(a)), float(special.ndtr(b))

    def support(self, x):
        lo, hi = self.window(x)
        return np.array([lo]), np.array([hi])

    def density(self, x, y):
        center, cdf_lo, cdf_hi = self._mass_bounds(x)
        lo, hi = self.window(x)
        y = _size(y)
        z = (y - center) / self.sigma
        value = _INV_SQRT_2PI * np.exp(-0.5 * z * z) / (self.sigma * (cdf_hi - cdf_lo))
        out = np.where((y > lo) & (y < hi), value, 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def cdf(self, x, y):
        """Truncated-normal CDF of the post-jump size given pre-jump size x."""
        center, cdf_lo, cdf_hi = self._mass_bounds(x)
        y = np.asarray(y, dtype=float)
        raw = (special.ndtr((y - center) / self.sigma) - cdf_lo) / (cdf_hi - cdf_lo)
        return np.clip(raw, 0.0, 1.0)

    def density_bound(self, x) -> float:
        center, cdf_lo, cdf_hi = self._mass_bounds(x)
        return _INV_SQRT_2PI / (self.sigma * (cdf_hi - cdf_lo))

    def inverse_cdf(self, x, u: float) -> float:
        center, cdf_lo, cdf_hi = self._mass_bounds(x)
        return center + self.sigma * float(special.ndtri(cdf_lo + u * (cdf_hi - cdf_lo)))

    def draw(self, x, rng: np.random.Generator) -> np.ndarray:
        x = as_point(x)
        lo, hi = self.window(x)
        for _ in range(64):
            u = rng.random()
            y = self.inverse_cdf(x, u)
            if lo < y < hi and y != x[0]:
                return np.array([y])
        raise SamplingError(f"truncated normal draw kept hitting the window edge at x={x.tolist()}")


def build_cell_model(params: CellModelParams = None) -> PdmpModel:
    """Cell model with the given parameters (defaults tau_flow=0.9, sigma=0.1)."""
    params = params or CellModelParams()
    space = StateSpace([CELL_LOWER], [CELL_UPPER])
    return PdmpModel(
        space=space,
        flow=CellFlow(params.tau_flow, CELL_UPPER),
        jumps=CellJumpLaw(),
        transitions=CellTransitionLaw(params.sigma, space),
        name="cell",
    )


def build_cell_model_without_jumps(params: CellModelParams = None) -> PdmpModel:
    """Cell model with lambda == 0: every jump is forced at size 3."""
    params = params or CellModelParams()
    model = build_cell_model(params)
    return PdmpModel(model.space, model.flow, NoJumps(), model.transitions, name="cell-no-jumps")
