"""Reference densities used as oracles for the estimators.

r(y, z) is the density of the next pre-jump location Z^- given the previous
pre-jump location y, obtained by integrating along the backward orbit of z:

    r(y, z) = int_0^{-t^-(z)} q(y, Phi_z(-s)) f(Phi_z(-s), s) DPhi_z(-s) ds

When the reverse flow never exits (t^- = -inf) the integral is cut at the
horizon H and a tail estimate is reported with the value.
"""

import math
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy import integrate, optimize

from src.core.components import PdmpModel
from src.core.simulation import exit_time, sample_interjump
from src.core.space import as_point
from src.errors import ModelError
from src.models.records import Trajectory
from src.reference.quadrature import QuadratureSpec, integrate_interval

logger = logging.getLogger(__name__)

_CROSSING_XTOL = 1e-14


class RDensityResult(BaseModel):
    """Value of r(y, z) with its quadrature error and truncation tail estimate."""
    value: float = Field(ge=0.0)
    error: float = Field(ge=0.0, description="Summed quadrature error estimate")
    tail_bound: float = Field(ge=0.0, description="Estimate of the integral beyond the horizon")
    horizon: float = Field(description="Upper integration limit actually used")


# ============================================================================
# Transition density oracle
# ============================================================================

def q_true(model: PdmpModel, x, y) -> float:
    """Closed-form transition density q(x, y) of the model."""
    return float(model.transitions.density(as_point(x), as_point(y)))


def q_true_curve(model: PdmpModel, x, grid: Sequence) -> List[float]:
    if len(grid) == 0:
        return []
    ys = np.asarray([as_point(g) for g in grid], dtype=float).reshape(len(grid), -1)
    return np.atleast_1d(model.transitions.density(as_point(x), ys)).astype(float).tolist()


# ============================================================================
# One-step pre-jump density r
# ============================================================================

def _orbit_integrand(model: PdmpModel, y: np.ndarray, z: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    def integrand(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        back = np.asarray(model.flow.flow(z, -s), dtype=float).reshape(s.shape + (z.shape[0],))
        inside = np.all((back > model.space.lower) & (back < model.space.upper), axis=-1)
        q = np.asarray(model.transitions.density(y, back), dtype=float)
        with np.errstate(invalid="ignore"):
            f = np.asarray(model.jumps.density(back, s), dtype=float)
            jac = np.asarray(model.flow.jacobian(z, -s), dtype=float)
            out = np.where(inside & (q > 0.0), q * f * jac, 0.0)
        return np.nan_to_num(out, nan=0.0, posinf=np.inf)
    return integrand


def _face_crossings(model: PdmpModel, z: np.ndarray, faces: Sequence[Tuple[int, float]], upper: float, scan_points: int) -> List[float]:
    """Times s in (0, upper) where the backward orbit Phi_z(-s) crosses a box face.

    Each face is scanned separately, so an entry and an exit that fall in the
    same scan cell are both found. Sign changes are refined with brentq.
    """
    s = np.linspace(0.0, upper, scan_points)
    back = np.asarray(model.flow.flow(z, -s), dtype=float).reshape(s.shape + (z.shape[0],))
    crossings = []
    for axis, level in faces:
        gap = back[:, axis] - level
        crossings.extend(s[1:-1][gap[1:-1] == 0.0].tolist())
        for k in np.flatnonzero(gap[:-1] * gap[1:] < 0.0):
            def offset(t: float, axis: int = axis, level: float = level) -> float:
                point = np.asarray(model.flow.flow(z, -np.array([t])), dtype=float).reshape(-1, z.shape[0])
                return float(point[0, axis]) - level
            crossings.append(optimize.brentq(offset, s[k], s[k + 1], xtol=_CROSSING_XTOL, rtol=4 * np.finfo(float).eps))
    return crossings


def _support_segments(model: PdmpModel, integrand, y: np.ndarray, z: np.ndarray, upper: float, scan_points: int) -> List[Tuple[float, float]]:
    """Pieces of [0, upper] where the integrand is positive.

    Breakpoints are the crossings of the faces of the support box of q(y, .)
    and of E; between two breakpoints the orbit stays on one side of every face.
    """
    lo, hi = model.transitions.support(y)
    faces = set()
    for axis in range(z.shape[0]):
        for level in (lo[axis], hi[axis], model.space.lower[axis], model.space.upper[axis]):
            if math.isfinite(level):
                faces.add((axis, float(level)))

    crossings = _face_crossings(model, z, sorted(faces), upper, scan_points)
    points = sorted({0.0, upper, *(t for t in crossings if 0.0 < t < upper)})
    segments: List[Tuple[float, float]] = []
    for a, b in zip(points[:-1], points[1:]):
        if b > a and integrand(np.array([0.5 * (a + b)]))[0] > 0.0:
            segments.append((a, b))
    return segments


def _tail_estimate(model: PdmpModel, y: np.ndarray, z: np.ndarray, horizon: float) -> float:
    """sup q(y, .) times the largest G(Phi_z(-s), s) DPhi_z(-s) for s in [H, 4H]."""
    s = np.linspace(horizon, 4.0 * horizon, 64)
    back = np.asarray(model.flow.flow(z, -s), dtype=float).reshape(s.shape + (z.shape[0],))
    with np.errstate(invalid="ignore", over="ignore"):
        surv = np.asarray(model.jumps.survival(back, s), dtype=float)
        jac = np.asarray(model.flow.jacobian(z, -s), dtype=float)
    decay = np.nan_to_num(surv * jac, nan=0.0)
    return float(model.transitions.density_bound(y) * decay.max())


def r_density(model: PdmpModel, y, z, quad: Optional[QuadratureSpec] = None) -> RDensityResult:
    """Density r(y, z) of the next pre-jump location by quadrature along the backward orbit.

    Raises:
        ModelError: if y is outside the closure of E.
        StateSpaceError: if z is not inside E.
        QuadratureError: if a segment does not converge.
    """
    quad = quad or QuadratureSpec()
    yp = _closure_point(model, y)
    zp = model.space.require_interior(z, "z")

    reverse = model.flow.reverse_exit_time(zp, model.space)
    full = -reverse
    upper = min(full, quad.horizon)
    truncated = full > quad.horizon

    integrand = _orbit_integrand(model, yp, zp)
    value = 0.0
    error = 0.0
    for a, b in _support_segments(model, integrand, yp, zp, upper, quad.scan_points):
        v, e = integrate_interval(lambda s: float(integrand(np.array([s]))[0]), a, b, quad)
        value += v
        error += e

    tail = _tail_estimate(model, yp, zp, quad.horizon) if truncated else 0.0
    return RDensityResult(value=max(value, 0.0), error=error, tail_bound=tail, horizon=upper)


def _closure_point(model: PdmpModel, y) -> np.ndarray:
    """Pre-jump locations may sit on the boundary after a forced jump."""
    p = as_point(y)
    if not model.space.in_closure(p):
        raise ModelError(f"y={p.tolist()} is outside the closure of E")
    return p


def r_curve(model: PdmpModel, y, grid: Sequence, quad: Optional[QuadratureSpec] = None) -> List[RDensityResult]:
    return [r_density(model, y, z, quad) for z in grid]


# ============================================================================
# Boundary atom of the one-step law
# ============================================================================

def forced_mass(model: PdmpModel, y, quad: Optional[QuadratureSpec] = None) -> float:
    """P(next jump is forced | previous pre-jump location y) = E[G(Z, t+(Z))], Z ~ Q(y, .)."""
    quad = quad or QuadratureSpec()
    yp = _closure_point(model, y)
    lo, hi = model.transitions.support(yp)

    def weight(*coords: float) -> float:
        x = np.asarray(coords, dtype=float)
        if not model.space.contains(x):
            return 0.0
        t_plus = exit_time(model.flow, model.space, x)
        return float(model.transitions.density(yp, x)) * float(model.jumps.survival(x, t_plus))

    if model.dimension == 1:
        value, _ = integrate_interval(weight, float(lo[0]), float(hi[0]), quad)
        return value
    value, _ = integrate.nquad(weight, list(zip(lo.tolist(), hi.tolist())), opts={"epsabs": quad.tolerance, "limit": quad.max_subdivisions})
    return float(value)


def one_step_sample(
    model: PdmpModel,
    y,
    n_draws: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """Monte-Carlo one-step oracle: Z ~ Q(y, .), S ~ S(Z, .), Z^- = Phi_Z(S).

    Returns:
        (pre_jump, forced) with pre_jump of shape (n_draws, d).
    """
    yp = _closure_point(model, y)
    out = np.empty((n_draws, model.dimension))
    forced = np.zeros(n_draws, dtype=bool)
    for k in range(n_draws):
        z = as_point(model.transitions.draw(yp, rng))
        t_plus = exit_time(model.flow, model.space, z)
        s, forced[k] = sample_interjump(model.jumps, z, t_plus, rng)
        out[k] = model.flow.flow(z, s)
    return out, forced


# ============================================================================
# Ergodic-average estimate of p and the CLT variance
# ============================================================================

def _r_values(model: PdmpModel, ys: np.ndarray, x: np.ndarray, quad: QuadratureSpec) -> List[float]:
    return [r_density(model, y, x, quad).value for y in ys]


def p_ergodic(
    model: PdmpModel,
    traj: Trajectory,
    x,
    quad: Optional[QuadratureSpec] = None,
    n_jobs: int = 1,
    chunk_size: int = 2000,
) -> float:
    """(1/n) sum_j r(Z_j^-, x): ergodic-average plug-in for p(x) = int pi(dy) r(y, x).

    The sum is exact (math.fsum), so the result does not depend on record
    order or on how the chunks are split across workers.
    """
    quad = quad or QuadratureSpec()
    if len(traj) == 0:
        raise ValueError("p_ergodic needs a nonempty trajectory")
    xp = model.space.require_interior(x, "x")
    ys = traj.pre_jump_array()
    chunks = [ys[i:i + chunk_size] for i in range(0, len(ys), chunk_size)]
    if n_jobs == 1:
        parts = [_r_values(model, chunk, xp, quad) for chunk in chunks]
    else:
        parts = Parallel(n_jobs=n_jobs)(delayed(_r_values)(model, chunk, xp, quad) for chunk in chunks)
    values = [v for part in parts for v in part]
    estimate = math.fsum(values) / len(values)
    logger.info(f"p_ergodic({xp.tolist()}) = {estimate:.6g} over {len(values)} pre-jump locations")
    return estimate


def clt_variance(q_val: float, p_val: float, tau2: float, alpha: float, d: int, v1: float = 1.0) -> float:
    """Asymptotic variance q^2 tau^2 / (p v1^d (1 + alpha d)) of the scaled q_hat error.

    The fluctuation comes from the denominator sum, whose j-th term has
    variance p tau^2 / v_j^d with v_j = v1 j^-alpha; summing gives the
    v1^-d factor, which drops out for the unit schedule v1 = 1.

    Raises:
        ValueError: if p_val or v1 is not positive.
    """
    if not p_val > 0.0:
        raise ValueError(f"p must be positive, got {p_val}")
    if not v1 > 0.0:
        raise ValueError(f"v1 must be positive, got {v1}")
    return q_val * q_val * tau2 / (p_val * v1 ** d * (1.0 + alpha * d))
