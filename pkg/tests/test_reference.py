import math

import numpy as np
import pytest
from scipy import integrate

from src.core.cell_model import build_cell_model
from src.core.simulation import simulate
from src.core.space import StateSpace
from src.core.streams import make_stream
from src.errors import ModelError, StateSpaceError
from src.estimators.kernels import BandwidthSchedule, make_kernel
from src.estimators.recursive import EvalTarget, RecursiveEstimator
from src.models.config import CellModelParams
from src.models.records import Trajectory
from src.reference.densities import (
    clt_variance,
    forced_mass,
    one_step_sample,
    p_ergodic,
    q_true,
    q_true_curve,
    r_curve,
    r_density,
)
from src.reference.quadrature import QuadratureSpec
from tests.conftest import make_record


def test_q_true_closed_form(cell_model):
    assert q_true(cell_model, 1.0, 0.5) == pytest.approx(5.8437, abs=1e-4)
    curve = q_true_curve(cell_model, 1.0, [0.3, 0.5, 0.7])
    assert curve[0] == 0.0 and curve[2] == 0.0
    assert curve[1] == pytest.approx(5.8437, abs=1e-4)
    assert q_true_curve(cell_model, 1.0, []) == []


def test_r_vanishes_off_the_backward_orbit(cell_model):
    # The backward orbit of 0.3 stays below 0.4, outside the window of q(1, .).
    result = r_density(cell_model, 1.0, 0.3)
    assert result.value == 0.0


def test_r_is_positive_and_converged(cell_model):
    result = r_density(cell_model, 1.0, 0.8)
    assert result.value > 0.0
    assert result.tail_bound < 1e-8
    assert result.horizon == 40.0

    tighter = r_density(cell_model, 1.0, 0.8, QuadratureSpec().halved())
    assert abs(tighter.value - result.value) <= max(result.error, tighter.error) + 1e-12


def test_longer_horizon_stays_within_tail_bound(cell_model):
    short = r_density(cell_model, 1.0, 1.2, QuadratureSpec(horizon=5.0))
    long = r_density(cell_model, 1.0, 1.2, QuadratureSpec(horizon=40.0))
    assert long.value >= short.value - 1e-12
    assert long.value - short.value <= short.tail_bound + long.error + 1e-10


def test_r_finds_narrow_transition_windows():
    narrow = build_cell_model(CellModelParams(sigma=0.01))
    z = 2.0045

    def along_window(u: float) -> float:
        # Substitute u = Phi_z(-s): ds = du / (tau u) and DPhi_z(-s) = u / z.
        s = math.log(z / u) / 0.9
        return narrow.transitions.density(np.array([3.0]), np.array([u])) * narrow.jumps.density([u], s) / (0.9 * z)

    lo, hi = narrow.transitions.support(np.array([3.0]))
    expected, _ = integrate.quad(along_window, float(lo[0]), float(hi[0]), epsabs=1e-13, epsrel=1e-11)

    result = r_density(narrow, 3.0, z)
    assert result.value == pytest.approx(0.33696, rel=1e-4)
    assert result.value == pytest.approx(expected, rel=1e-7)
    assert r_density(narrow, 3.0, 1.4).value == 0.0


def test_r_accepts_boundary_pre_jump_locations(cell_model):
    assert r_density(cell_model, 3.0, 1.8).value > 0.0
    with pytest.raises(ModelError):
        r_density(cell_model, 3.5, 1.0)
    with pytest.raises(StateSpaceError):
        r_density(cell_model, 1.0, 3.0)


def test_continuous_mass_plus_atom_is_one(cell_model):
    grid = np.linspace(0.4, 3.0, 401)[1:-1]
    values = [r.value for r in r_curve(cell_model, 1.0, grid)]
    continuous = integrate.trapezoid(values, grid)
    atom = forced_mass(cell_model, 1.0)
    assert 0.0 < atom < 1.0
    assert continuous + atom == pytest.approx(1.0, abs=2e-2)


def test_one_step_sample_forced_frequency(cell_model):
    gen = make_stream(77, 0)
    pre, forced = one_step_sample(cell_model, 1.0, 20_000, gen)
    atom = forced_mass(cell_model, 1.0)
    se = math.sqrt(atom * (1.0 - atom) / forced.size)
    assert abs(forced.mean() - atom) <= 3.0 * se
    assert np.allclose(pre[forced, 0], 3.0)
    assert np.all(pre[~forced, 0] < 3.0)


def test_p_ergodic_single_record(cell_model):
    traj = simulate(cell_model, [1.0], 1, seed=3)
    expected = r_density(cell_model, traj.records[0].pre_jump, 1.0).value
    assert p_ergodic(cell_model, traj, 1.0) == expected


def test_p_ergodic_is_order_free(cell_model):
    traj = simulate(cell_model, [1.0], 60, seed=4)
    records, t = [], 0.0
    for k, rec in enumerate(reversed(traj.records), start=1):
        t += rec.interjump
        records.append(rec.model_copy(update={"index": k, "time": t}))
    reordered = Trajectory(x0=traj.x0, seed=traj.seed, records=records)
    forward = p_ergodic(cell_model, traj, 1.0)
    assert forward > 0.0
    assert p_ergodic(cell_model, reordered, 1.0) == forward
    assert p_ergodic(cell_model, traj, 1.0, chunk_size=7) == forward


def test_p_ergodic_needs_records(cell_model):
    with pytest.raises(ValueError):
        p_ergodic(cell_model, Trajectory(x0=(1.0,), seed=0, records=[]), 1.0)


def test_clt_variance():
    assert clt_variance(0.0, 2.0, 0.6, 0.5, 1) == 0.0
    assert clt_variance(5.8437, 1.0, 0.6, 0.5, 1) == pytest.approx(0.6 * 5.8437 ** 2 / 1.5)
    assert clt_variance(2.0, 1.0, 0.6, 0.5, 1) == pytest.approx(4.0 * clt_variance(1.0, 1.0, 0.6, 0.5, 1))
    with pytest.raises(ValueError):
        clt_variance(1.0, 0.0, 0.6, 0.5, 1)
    assert clt_variance(1.0, 1.0, 0.6, 0.5, 1, v1=0.1) == pytest.approx(10.0 * clt_variance(1.0, 1.0, 0.6, 0.5, 1))
    assert clt_variance(1.0, 1.0, 0.6, 0.5, 2, v1=0.1) == pytest.approx(100.0 * clt_variance(1.0, 1.0, 0.6, 0.5, 2))
    with pytest.raises(ValueError):
        clt_variance(1.0, 1.0, 0.6, 0.5, 1, v1=0.0)


def test_clt_variance_matches_denominator_spread():
    # Uniform i.i.d. pre-jump locations: p = 1/3 everywhere and p_hat is unbiased inside.
    gen = make_stream(12, 0)
    kernel = make_kernel("epanechnikov")
    v = BandwidthSchedule(initial=0.1, exponent=0.5)
    m = 501
    values = []
    for _ in range(200):
        est = RecursiveEstimator(StateSpace([0.0], [3.0]), kernel, v, v)
        est.register(EvalTarget.point(1.5))
        est.consume(make_record(k, z, 1.0) for k, z in enumerate(gen.uniform(0.0, 3.0, size=m), start=1))
        values.append(est.p_hat(1.5))

    n = m - 1
    scaled = n ** 0.25 * (np.asarray(values) - 1.0 / 3.0)
    predicted = clt_variance(1.0 / 3.0, 1.0 / 3.0, kernel.tau2, 0.5, 1, v1=0.1)
    assert 0.7 <= np.var(scaled, ddof=1) / predicted <= 1.35
