"""Shared fixtures: the cell model, seeded streams and a small experiment config."""

import pytest

from src.core import build_cell_model, build_cell_model_without_jumps, make_stream
from src.models import ExperimentConfig, JumpRecord


@pytest.fixture
def cell_model():
    return build_cell_model()


@pytest.fixture
def no_jump_model():
    return build_cell_model_without_jumps()


@pytest.fixture
def rng():
    return make_stream(12345, 0)


@pytest.fixture
def small_cfg(tmp_path):
    """Fast config: 3 replicates, n in {200, 400}, single worker."""
    return ExperimentConfig().with_experiment(
        seed=7,
        replicates=3,
        jump_counts=[200, 400],
        workers=1,
        output_dir=str(tmp_path / "out"),
        sweep_jumps=300,
        clt_jumps=400,
        clt_replicates=4,
        pilot_jumps=40,
        pi_points=5,
        pi_bins=4,
        curve_points=9,
    )


def make_record(index, pre, post, time=None, interjump=0.5, forced=False):
    """JumpRecord with 1-d coordinates given as floats."""
    return JumpRecord(
        index=index,
        time=index * interjump if time is None else time,
        interjump=interjump,
        pre_jump=(float(pre),),
        post_jump=(float(post),),
        forced=forced,
    )
