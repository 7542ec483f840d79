import math

import numpy as np
import pytest
from scipy import stats

from src.core.cell_model import CellJumpLaw
from src.core.components import NoJumps, PdmpModel, TransitionLaw
from src.core.simulation import exit_time, sample_interjump, simulate, trajectory_path
from src.core.streams import make_stream
from src.errors import ModelError, PdmpError, SimulationRequestError, StateSpaceError

FORCED_AT_ONE = math.exp(-math.log(3.0) / 0.9)


class StuckTransition(TransitionLaw):
    """Invalid law that jumps back onto the pre-jump point."""

    def density(self, x, y):
        return 0.0

    def draw(self, x, rng):
        return np.asarray(x, dtype=float)


def test_cell_exit_time(cell_model):
    assert exit_time(cell_model.flow, cell_model.space, [1.0]) == pytest.approx(math.log(3.0) / 0.9, rel=1e-12)
    assert exit_time(cell_model.flow, cell_model.space, [3.0 - 1e-12]) == pytest.approx(0.0, abs=1e-9)


def test_exit_time_rejects_points_outside(cell_model):
    with pytest.raises(StateSpaceError):
        exit_time(cell_model.flow, cell_model.space, [3.0])
    with pytest.raises(StateSpaceError):
        exit_time(cell_model.flow, cell_model.space, [0.0])


def test_sample_interjump_without_random_jumps(rng):
    for _ in range(50):
        s, forced = sample_interjump(NoJumps(), [1.0], 1.5, rng)
        assert forced
        assert s == 1.5


def test_sample_interjump_with_infinite_exit_time(rng):
    for _ in range(50):
        s, forced = sample_interjump(CellJumpLaw(), [1.0], math.inf, rng)
        assert not forced
        assert 0.0 < s < math.inf


def test_sampler_matches_mixed_law(cell_model):
    """Forced frequency within 3 SE of G(1, t+) and KS on the unforced part."""
    gen = make_stream(2024, 0)
    law = CellJumpLaw()
    t_plus = exit_time(cell_model.flow, cell_model.space, [1.0])
    draws = [sample_interjump(law, [1.0], t_plus, gen) for _ in range(100_000)]
    forced = np.array([f for _, f in draws])
    times = np.array([s for s, f in draws if not f])

    se = math.sqrt(FORCED_AT_ONE * (1.0 - FORCED_AT_ONE) / forced.size)
    assert abs(forced.mean() - FORCED_AT_ONE) <= 3.0 * se
    assert np.all(times < t_plus)

    mass = 1.0 - law.survival(np.array([1.0]), t_plus)
    result = stats.kstest(times, lambda t: (1.0 - law.survival(np.array([1.0]), t)) / mass)
    assert result.pvalue >= 0.01


def test_simulate_is_deterministic(cell_model):
    first = simulate(cell_model, [1.0], 200, seed=42)
    second = simulate(cell_model, [1.0], 200, seed=42)
    other = simulate(cell_model, [1.0], 200, seed=42, stream=1)
    assert first == second
    assert first != other
    assert len(first) == 200


def test_records_follow_the_flow(cell_model):
    traj = simulate(cell_model, [1.0], 500, seed=9)
    z = np.array(traj.x0)
    t = 0.0
    for rec in traj.records:
        rebuilt = cell_model.flow.flow(z, rec.interjump)
        assert np.all(np.abs(rebuilt - np.array(rec.pre_jump)) <= 1e-10)
        assert rec.forced == cell_model.space.on_boundary(rec.pre_jump)
        assert cell_model.space.contains(rec.post_jump)
        t += rec.interjump
        assert rec.time == pytest.approx(t, rel=1e-12)
        z = np.array(rec.post_jump)
    assert 0.0 < traj.forced_fraction() < 1.0


def test_without_random_jumps_every_jump_is_forced(no_jump_model):
    traj = simulate(no_jump_model, [1.0], 30, seed=1)
    assert all(rec.forced for rec in traj.records)
    assert all(rec.pre_jump == (3.0,) for rec in traj.records)
    assert traj.forced_fraction() == 1.0


def test_invalid_post_jump_location_aborts(cell_model):
    broken = PdmpModel(cell_model.space, cell_model.flow, cell_model.jumps, StuckTransition(cell_model.space))
    with pytest.raises(ModelError):
        simulate(broken, [1.0], 5, seed=0)


def test_simulate_rejects_bad_requests(cell_model):
    with pytest.raises(SimulationRequestError):
        simulate(cell_model, [1.0], 0, seed=0)
    with pytest.raises(PdmpError):
        simulate(cell_model, [1.0], -3, seed=0)
    with pytest.raises(StateSpaceError):
        simulate(cell_model, [3.5], 5, seed=0)


def test_trajectory_path_for_plotting(cell_model):
    traj = simulate(cell_model, [1.0], 10, seed=42)
    times, values = trajectory_path(cell_model, traj, points_per_segment=20)
    assert times.shape == (10 * 21,)
    assert values.shape == (10 * 21, 1)
    assert np.all(np.diff(times) >= 0.0)
    assert values[19, 0] == traj.records[0].pre_jump[0]
    assert values[20, 0] == traj.records[0].post_jump[0]
    assert np.all(values[:, 0] > 0.0) and np.all(values[:, 0] <= 3.0)
