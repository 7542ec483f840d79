"""Pydantic models module."""

from .config import (
    BandwidthSection,
    CellModelParams,
    ExperimentConfig,
    ExperimentSection,
    KernelSection,
    RunConfig,
)
from .records import JumpRecord, Point, Trajectory
from .results import (
    CheckResult,
    CltResult, CltRow,
    CurvePoint, CurveStudyResult,
    PiStudyResult,
    ReplicateRow, ReplicateTable,
    SummaryRow,
)

__all__ = [
    'BandwidthSection', 'CellModelParams', 'ExperimentConfig', 'ExperimentSection', 'KernelSection', 'RunConfig',
    'JumpRecord', 'Point', 'Trajectory',
    'CheckResult',
    'CltResult', 'CltRow',
    'CurvePoint', 'CurveStudyResult',
    'PiStudyResult',
    'ReplicateRow', 'ReplicateTable',
    'SummaryRow',
]
