"""Pydantic models for simulated jump records and trajectories."""

from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

Point = Tuple[float, ...]


class JumpRecord(BaseModel):
    """One jump of the embedded chain: (T_n, S_n, Z_n^-, Z_n, forced)."""
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1, description="1-based jump number n")
    time: float = Field(description="Jump time T_n")
    interjump: float = Field(gt=0.0, description="Inter-jump time S_n = T_n - T_{n-1}")
    pre_jump: Point = Field(description="Pre-jump location Z_n^- = Phi_{Z_{n-1}}(S_n)")
    post_jump: Point = Field(description="Post-jump location Z_n, inside E")
    forced: bool = Field(description="True iff the jump was forced at the boundary")


class Trajectory(BaseModel):
    """A simulated embedded chain started at x0."""
    model_config = ConfigDict(frozen=True)

    x0: Point = Field(description="Initial location Z_0")
    seed: int = Field(ge=0, description="Master seed of the random stream")
    stream: int = Field(default=0, ge=0, description="Stream id within the master seed")
    records: List[JumpRecord] = Field(default_factory=list)

    @model_validator(mode="after")
    def _chained(self) -> "Trajectory":
        prev = 0.0
        for k, rec in enumerate(self.records, start=1):
            if rec.index != k:
                raise ValueError(f"record {k} carries index {rec.index}")
            if abs(rec.time - (prev + rec.interjump)) > 1e-9 * max(1.0, abs(rec.time)):
                raise ValueError(
                    f"record {k}: time {rec.time} != previous time {prev} + interjump {rec.interjump}"
                )
            prev = rec.time
        return self

    def __len__(self) -> int:
        return len(self.records)

    @property
    def dimension(self) -> int:
        return len(self.x0)

    def pre_jump_array(self) -> np.ndarray:
        """Z_n^- as an (n, d) array."""
        return np.array([r.pre_jump for r in self.records], dtype=float).reshape(-1, self.dimension)

    def post_jump_array(self) -> np.ndarray:
        """Z_n as an (n, d) array."""
        return np.array([r.post_jump for r in self.records], dtype=float).reshape(-1, self.dimension)

    def forced_fraction(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.forced for r in self.records) / len(self.records)
