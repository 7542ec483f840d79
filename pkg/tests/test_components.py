import math

import numpy as np
import pytest

from src.core.components import (
    ConstantFlow,
    FlowSpec,
    NoJumps,
    PdmpModel,
    RateJumpLaw,
    TransitionLaw,
)
from src.core.simulation import exit_time
from src.core.space import StateSpace
from src.core.streams import make_stream
from src.errors import ModelError


class DriftFlow(FlowSpec):
    """Phi_x(t) = x + t: exits (0, 3) at t = 3 - x, reverse flow at -x."""

    def flow(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        return x + t[..., None]


class GrowthFlow(FlowSpec):
    """x exp(0.9 t) without closed-form exit time or Jacobian."""

    def flow(self, x, t):
        x = np.asarray(x, dtype=float)
        return x * np.exp(0.9 * np.asarray(t, dtype=float))[..., None]


class FlatTransition(TransitionLaw):
    """Uniform post-jump law on the whole box."""

    def density(self, x, y):
        y = np.asarray(y, dtype=float)
        inside = np.all((y > self.space.lower) & (y < self.space.upper), axis=-1)
        return np.where(inside, 1.0 / float(np.prod(self.space.upper - self.space.lower)), 0.0)


@pytest.fixture
def interval():
    return StateSpace([0.0], [3.0])


def test_constant_flow_never_exits(interval):
    assert exit_time(ConstantFlow(), interval, [1.0]) == math.inf
    assert ConstantFlow().reverse_exit_time([1.0], interval) == -math.inf


def test_generic_exit_time_by_bisection(interval):
    flow = DriftFlow()
    assert exit_time(flow, interval, [1.0]) == pytest.approx(2.0, abs=1e-9)
    assert flow.reverse_exit_time([1.0], interval) == pytest.approx(-1.0, abs=1e-9)


def test_generic_exit_time_matches_closed_form(interval):
    t_plus = exit_time(GrowthFlow(), interval, [1.0])
    assert t_plus == pytest.approx(math.log(3.0) / 0.9, abs=1e-9)


def test_numerical_jacobian():
    flow = GrowthFlow()
    assert float(flow.jacobian(np.array([1.2]), 0.0)) == pytest.approx(1.0, rel=1e-8)
    assert float(flow.jacobian(np.array([1.2]), -2.0)) == pytest.approx(math.exp(-1.8), rel=1e-6)


def test_semigroup_property():
    flow = GrowthFlow()
    gen = make_stream(3, 0)
    for _ in range(1000):
        xi = gen.uniform(0.01, 3.0, size=1)
        s, t = gen.uniform(-2.0, 2.0, size=2)
        direct = flow.flow(xi, s + t)
        chained = flow.flow(flow.flow(xi, t), s)
        assert np.all(np.abs(direct - chained) <= 1e-10 * (1.0 + np.abs(xi)))


def test_no_jumps_law():
    law = NoJumps()
    assert float(law.survival(np.array([1.0]), 5.0)) == 1.0
    assert float(law.density(np.array([1.0]), 5.0)) == 0.0
    assert law.inverse_survival(np.array([1.0]), 0.3) == math.inf


def test_rate_jump_law_with_constant_rate():
    law = RateJumpLaw(ConstantFlow(), rate=lambda p: 2.0)
    z = np.array([1.0])
    assert law.survival(z, 0.0) == 1.0
    assert law.survival(z, 0.7) == pytest.approx(math.exp(-1.4), rel=1e-10)
    assert law.density(z, 0.7) == pytest.approx(2.0 * math.exp(-1.4), rel=1e-10)
    assert law.inverse_survival(z, 0.25) == pytest.approx(-math.log(0.25) / 2.0, rel=1e-9)


def test_rejection_draw_stays_inside(interval):
    law = FlatTransition(interval)
    gen = make_stream(5, 0)
    draws = np.array([law.draw([1.0], gen) for _ in range(200)])
    assert np.all((draws > 0.0) & (draws < 3.0))
    assert law.density_bound([1.0]) == pytest.approx(1.1 / 3.0)


def test_model_rejects_mismatched_spaces(interval):
    other = StateSpace([0.0], [2.0])
    with pytest.raises(ModelError):
        PdmpModel(interval, DriftFlow(), NoJumps(), FlatTransition(other))
