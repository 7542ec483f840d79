"""Local characteristics of a PDMP: flow, jump law and post-jump transition law.

Component callables broadcast over leading axes: points have shape (..., d)
and times shape (...). Single evaluations use a point of shape (d,) and a
scalar time.
"""

import math
import logging
from abc import ABC, abstractmethod
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate, optimize

from src.core.space import StateSpace, as_point
from src.errors import ModelError, SamplingError

logger = logging.getLogger(__name__)

# ============================================================================
# Exit-time search constants
# ============================================================================

EXIT_BRACKET_START = 1e-6
EXIT_BRACKET_CAP = 1e6
EXIT_BISECT_TOL = 1e-12

MAX_REJECTION_PROPOSALS = 10**6


# ============================================================================
# Flow
# ============================================================================

class FlowSpec(ABC):
    """Deterministic motion Phi_x(t) with exit times and Jacobian."""

    @abstractmethod
    def flow(self, x, t):
        """Phi_x(t)."""

    def exit_time(self, x, space: StateSpace) -> float:
        """First t > 0 with Phi_x(t) on the boundary, or math.inf.

        Generic search: double t from 1e-6 until the flow leaves the closure
        (or 1e6 is passed), then bisect to an absolute tolerance of 1e-12.
        """
        return self._boundary_search(as_point(x), space, direction=1.0)

    def reverse_exit_time(self, x, space: StateSpace) -> float:
        """Exit time of the reverse flow, as a nonpositive time or -math.inf."""
        return -self._boundary_search(as_point(x), space, direction=-1.0)

    def jacobian(self, x, t):
        """|det D_x Phi_x(t)| by central differences."""
        p = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        d = p.shape[-1]
        h = 1e-6 * np.maximum(1.0, np.abs(p))
        cols = []
        for i in range(d):
            step = np.zeros_like(p)
            step[..., i] = h[..., i]
            fwd = self.flow(p + step, t)
            bwd = self.flow(p - step, t)
            cols.append((fwd - bwd) / (2.0 * h[..., i][..., None]))
        mat = np.stack(cols, axis=-1)
        return np.abs(np.linalg.det(mat))

    def _boundary_search(self, x: np.ndarray, space: StateSpace, direction: float) -> float:
        def outside(t: float) -> bool:
            return not space.in_closure(self.flow(x, direction * t), tol=0.0)

        lo, hi = 0.0, EXIT_BRACKET_START
        while not outside(hi):
            lo = hi
            hi *= 2.0
            if hi > EXIT_BRACKET_CAP:
                return math.inf
        while hi - lo > EXIT_BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if outside(mid):
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)


class ConstantFlow(FlowSpec):
    """Phi_x(t) = x: the process never moves between jumps."""

    def flow(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(x, np.broadcast_shapes(x.shape, t.shape + (x.shape[-1],))).copy()

    def exit_time(self, x, space: StateSpace) -> float:
        return math.inf

    def reverse_exit_time(self, x, space: StateSpace) -> float:
        return -math.inf

    def jacobian(self, x, t):
        x = np.asarray(x, dtype=float)
        return np.ones(np.broadcast_shapes(x.shape[:-1], np.shape(t)))


# ============================================================================
# Jump law
# ============================================================================

class JumpLaw(ABC):
    """Conditional law of the time to the next random jump along the flow."""

    @abstractmethod
    def survival(self, z, t):
        """G(z, t) = P(no random jump before t | start at z)."""

    @abstractmethod
    def density(self, z, t):
        """f(z, t) = -dG/dt."""

    @abstractmethod
    def inverse_survival(self, z, u):
        """The time t with G(z, t) = u, for u in (0, 1)."""


class NoJumps(JumpLaw):
    """lambda == 0: only boundary-forced jumps happen."""

    def survival(self, z, t):
        return np.ones(np.broadcast_shapes(np.shape(z)[:-1], np.shape(t)))

    def density(self, z, t):
        return np.zeros(np.broadcast_shapes(np.shape(z)[:-1], np.shape(t)))

    def inverse_survival(self, z, u):
        return math.inf


class RateJumpLaw(JumpLaw):
    """Jump law built from a rate lambda(x) along a flow.

    G(z, t) = exp(-int_0^t lambda(Phi_z(s)) ds) by adaptive quadrature and
    G^{-1} by root finding on the cumulative hazard.
    """

    def __init__(self, flow: FlowSpec, rate: Callable[[np.ndarray], float], horizon: float = 1e3):
        self.flow_spec = flow
        self.rate = rate
        self.horizon = horizon

    def _hazard(self, z: np.ndarray, t: float) -> float:
        if t <= 0.0:
            return 0.0
        if math.isinf(t):
            t = self.horizon
        value, _ = integrate.quad(lambda s: float(self.rate(self.flow_spec.flow(z, s))), 0.0, t, limit=200)
        return value

    def survival(self, z, t):
        z = as_point(z)
        if np.ndim(t) == 0:
            return math.exp(-self._hazard(z, float(t)))
        return np.array([math.exp(-self._hazard(z, float(s))) for s in np.ravel(t)]).reshape(np.shape(t))

    def density(self, z, t):
        z = as_point(z)
        if np.ndim(t) == 0:
            return float(self.rate(self.flow_spec.flow(z, float(t)))) * self.survival(z, t)
        return np.array([self.density(z, float(s)) for s in np.ravel(t)]).reshape(np.shape(t))

    def inverse_survival(self, z, u):
        z = as_point(z)
        target = -math.log(u)
        hi = 1.0
        while self._hazard(z, hi) < target:
            hi *= 2.0
            if hi > self.horizon:
                return math.inf
        return optimize.brentq(lambda t: self._hazard(z, t) - target, 0.0, hi, xtol=1e-12)


# ============================================================================
# Transition law
# ============================================================================

class TransitionLaw(ABC):
    """Post-jump location law Q(x, dy) = q(x, y) dy on E."""

    def __init__(self, space: StateSpace):
        self.space = space

    @abstractmethod
    def density(self, x, y):
        """q(x, y); x has shape (d,), y shape (..., d)."""

    def support(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """Box (lower, upper) containing the support of q(x, .)."""
        return self.space.lower.copy(), self.space.upper.copy()

    def density_bound(self, x) -> float:
        """Upper bound of q(x, .), estimated on a scan grid with a 10% margin."""
        lo, hi = self.support(x)
        d = lo.shape[0]
        per_axis = 4097 if d == 1 else max(3, int(round(65 ** (1.0 / max(d - 1, 1)))))
        axes = [np.linspace(a, b, per_axis)[1:-1] for a, b in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        return 1.1 * float(np.max(self.density(as_point(x), grid)))

    def draw(self, x, rng: np.random.Generator) -> np.ndarray:
        """Rejection sampling from uniform proposals on the support box."""
        x = as_point(x)
        lo, hi = self.support(x)
        bound = self.density_bound(x)
        if not bound > 0.0:
            raise SamplingError(f"q({x.tolist()}, .) vanishes on its support box")
        for _ in range(MAX_REJECTION_PROPOSALS):
            y = lo + (hi - lo) * rng.random(lo.shape[0])
            if not self.space.contains(y) or np.array_equal(y, x):
                continue
            if rng.random() * bound < float(self.density(x, y)):
                return y
        raise SamplingError(f"rejection sampler exceeded {MAX_REJECTION_PROPOSALS} proposals at x={x.tolist()}")


# ============================================================================
# Model
# ============================================================================

class PdmpModel:
    """The triple (flow, jump law, transition law) on a box state space."""

    def __init__(
        self,
        space: StateSpace,
        flow: FlowSpec,
        jumps: JumpLaw,
        transitions: TransitionLaw,
        name: Optional[str] = None,
    ):
        if transitions.space is not space and (
            not np.array_equal(transitions.space.lower, space.lower)
            or not np.array_equal(transitions.space.upper, space.upper)
        ):
            raise ModelError("transition law is defined on a different state space")
        self.space = space
        self.flow = flow
        self.jumps = jumps
        self.transitions = transitions
        self.name = name or type(flow).__name__

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def __repr__(self) -> str:
        return f"PdmpModel(name={self.name!r}, space={self.space})"
