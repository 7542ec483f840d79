"""Core module: state space, model components, random streams and simulation."""

from .space import StateSpace, as_point
from .components import ConstantFlow, FlowSpec, JumpLaw, NoJumps, PdmpModel, RateJumpLaw, TransitionLaw
from .streams import PILOT_STREAM, entropy_seed, make_stream
from .simulation import exit_time, iter_jumps, sample_interjump, simulate, trajectory_path
from .cell_model import CellFlow, CellJumpLaw, CellTransitionLaw, build_cell_model, build_cell_model_without_jumps

__all__ = [
    'StateSpace', 'as_point',
    'ConstantFlow', 'FlowSpec', 'JumpLaw', 'NoJumps', 'PdmpModel', 'RateJumpLaw', 'TransitionLaw',
    'PILOT_STREAM', 'entropy_seed', 'make_stream',
    'exit_time', 'iter_jumps', 'sample_interjump', 'simulate', 'trajectory_path',
    'CellFlow', 'CellJumpLaw', 'CellTransitionLaw', 'build_cell_model', 'build_cell_model_without_jumps',
]
