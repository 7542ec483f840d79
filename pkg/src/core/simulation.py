"""Exact simulation of the embedded chain (Z_n, S_n) with boundary-forced jumps."""

import math
import logging
from typing import Iterator, Optional, Tuple

import numpy as np

from src.core.components import FlowSpec, JumpLaw, PdmpModel
from src.core.space import StateSpace, PointLike, as_point
from src.core.streams import make_stream
from src.errors import ModelError, SamplingError, SimulationRequestError
from src.models.records import JumpRecord, Trajectory

logger = logging.getLogger(__name__)


def exit_time(flow: FlowSpec, space: StateSpace, x: PointLike) -> float:
    """t+(x): least t > 0 with Phi_x(t) on the boundary, math.inf if never.

    Raises:
        StateSpaceError: if x is not inside E.
    """
    p = space.require_interior(x)
    return float(flow.exit_time(p, space))


def sample_interjump(
    jumps: JumpLaw,
    z: PointLike,
    t_plus: float,
    rng: np.random.Generator,
) -> Tuple[float, bool]:
    """Draw S from the mixed law: density f on [0, t+) plus an atom G(z, t+) at t+.

    One uniform U is drawn. If U < G(z, t+) the jump is forced at t+;
    otherwise S = G^{-1}(z, U), which is then strictly below t+.

    Returns:
        (s, forced)

    Raises:
        SamplingError: if G(z, t+) is not a finite probability, or the law
            never jumps (forced at an infinite exit time).
    """
    z = as_point(z)
    atom = float(jumps.survival(z, t_plus))
    if not math.isfinite(atom) or atom < 0.0 or atom > 1.0:
        raise SamplingError(f"G(z={z.tolist()}, t+={t_plus}) = {atom} is not a probability")

    u = rng.random()
    while u == 0.0:
        u = rng.random()

    if u < atom:
        if math.isinf(t_plus):
            raise SamplingError(f"no jump ever happens from z={z.tolist()}: G(z, inf) = {atom}")
        return t_plus, True

    s = float(jumps.inverse_survival(z, u))
    if not (s > 0.0) or not math.isfinite(s):
        raise SamplingError(f"G^-1(z={z.tolist()}, u={u}) returned {s}")
    # Rounding can push G^-1 onto t+ when U sits right above the atom.
    if s >= t_plus:
        return t_plus, True
    return s, False


def iter_jumps(
    model: PdmpModel,
    x0: PointLike,
    n_jumps: int,
    rng: np.random.Generator,
) -> Iterator[JumpRecord]:
    """Yield the first n_jumps records of a trajectory started at x0."""
    space = model.space
    z = space.require_interior(x0, "initial point")
    if n_jumps < 1:
        raise SimulationRequestError(f"n_jumps must be >= 1, got {n_jumps}")

    t_total = 0.0
    for n in range(1, n_jumps + 1):
        t_plus = exit_time(model.flow, space, z)
        s, forced = sample_interjump(model.jumps, z, t_plus, rng)
        z_minus = as_point(model.flow.flow(z, s))

        if forced or space.on_boundary(z_minus):
            if not forced:
                logger.debug(f"jump {n}: random jump landed on the boundary, marked forced")
                forced = True
            z_minus = space.snap_to_boundary(z_minus)
            if not space.on_boundary(z_minus):
                raise ModelError(f"jump {n}: forced pre-jump location {z_minus.tolist()} is not on the boundary")

        z_next = as_point(model.transitions.draw(z_minus, rng))
        if not space.contains(z_next) or np.array_equal(z_next, z_minus):
            raise ModelError(
                f"jump {n}: post-jump location {z_next.tolist()} from {z_minus.tolist()} is not a valid point of E"
            )

        t_total += s
        yield JumpRecord(
            index=n,
            time=t_total,
            interjump=s,
            pre_jump=tuple(z_minus.tolist()),
            post_jump=tuple(z_next.tolist()),
            forced=forced,
        )
        z = z_next


def simulate(
    model: PdmpModel,
    x0: PointLike,
    n_jumps: int,
    seed: int,
    stream: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> Trajectory:
    """Simulate n_jumps jumps; deterministic in (model, x0, n_jumps, seed, stream).

    Raises:
        StateSpaceError: if x0 is not inside E.
        ModelError: if a post-jump location falls outside E.
        SimulationRequestError: if n_jumps < 1.
    """
    x = as_point(x0)
    generator = rng if rng is not None else make_stream(seed, stream)
    logger.info(f"Simulating {n_jumps} jumps of {model.name} from x0={x.tolist()} (seed={seed}, stream={stream})")
    records = list(iter_jumps(model, x, n_jumps, generator))
    traj = Trajectory(x0=tuple(x.tolist()), seed=seed, stream=stream, records=records)
    logger.info(f"Simulation done: T={records[-1].time:.6g}, forced fraction={traj.forced_fraction():.4f}")
    return traj


def trajectory_path(
    model: PdmpModel,
    traj: Trajectory,
    points_per_segment: int = 50,
) -> Tuple[np.ndarray, np.ndarray]:
    """Continuous-time path for plotting: flow segments joined by vertical jumps.

    Returns:
        (times, values) with values of shape (len(times), d). Each jump
        contributes the pre-jump point and the post-jump point at the same time.
    """
    if points_per_segment < 2:
        raise ValueError("points_per_segment must be >= 2")
    times = []
    values = []
    start = as_point(traj.x0)
    t0 = 0.0
    for rec in traj.records:
        s = np.linspace(0.0, rec.interjump, points_per_segment)
        seg = np.asarray(model.flow.flow(start, s), dtype=float).reshape(points_per_segment, -1)
        seg[-1] = rec.pre_jump
        times.extend((t0 + s).tolist())
        values.extend(seg.tolist())
        times.append(rec.time)
        values.append(list(rec.post_jump))
        start = as_point(rec.post_jump)
        t0 = rec.time
    return np.asarray(times), np.asarray(values)
