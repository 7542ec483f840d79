"""Pydantic config models: one model per document section.

Sections forbid unknown keys, so a typo in a config file or an override is
reported instead of silently ignored.
"""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors import ConfigError

BUILTIN_KERNELS = ("epanechnikov", "uniform", "triangular", "quartic")

# Kernels with unbounded support that users commonly ask for.
UNBOUNDED_KERNELS = ("gaussian", "normal", "logistic", "cauchy")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# ============================================================================
# Sections
# ============================================================================

class CellModelParams(_Section):
    """Cell growth-fragmentation model parameters."""
    model: Literal["cell"] = Field(default="cell", description="Model family; only the cell model is built in")
    tau_flow: float = Field(default=0.9, gt=0.0, description="Exponential growth rate of the flow")
    sigma: float = Field(default=0.1, gt=0.0, description="Noise scale of the truncated Gaussian transition")
    x0: float = Field(default=1.0, description="Initial cell size")

    @model_validator(mode="after")
    def _check(self) -> "CellModelParams":
        if not 2.0 * self.sigma < 3.0:
            raise ValueError(f"sigma={self.sigma} leaves an empty truncation window (need 2*sigma < 3)")
        if not 0.0 < self.x0 < 3.0:
            raise ValueError(f"x0={self.x0} must lie in E=(0, 3)")
        return self


class KernelSection(_Section):
    """Kernel choice."""
    kernel: str = Field(default="epanechnikov", description=f"One of {', '.join(BUILTIN_KERNELS)}")

    @field_validator("kernel")
    @classmethod
    def _known(cls, value: str) -> str:
        name = value.strip().lower()
        if name in UNBOUNDED_KERNELS:
            raise ValueError(f"kernel '{value}' has unbounded support; a compactly supported kernel is required")
        if name not in BUILTIN_KERNELS:
            raise ValueError(f"unknown kernel '{value}'; expected one of {list(BUILTIN_KERNELS)}")
        return name


class BandwidthSection(_Section):
    """Power-law bandwidths v_j = v1 j^-alpha (denominator), w_j = w1 j^-beta (numerator)."""
    v1: float = Field(default=0.1, gt=0.0)
    alpha: float = Field(default=0.125, gt=0.0)
    w1: float = Field(default=0.1, gt=0.0)
    beta: float = Field(default=0.1, gt=0.0)


class ExperimentSection(_Section):
    """Replication, study and output settings."""
    targets: List[Tuple[float, float]] = Field(
        default_factory=lambda: [(1.0, 0.5), (2.0, 1.0)],
        description="(x, y) pairs at which q is estimated",
    )
    jump_counts: List[int] = Field(
        default_factory=lambda: [5000, 10000, 20000, 50000],
        description="Numbers n of observed jumps at which snapshots are read",
    )
    replicates: int = Field(default=100, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, le=2**64 - 1, description="Master seed; drawn from entropy when absent")
    output_dir: str = Field(default="out")
    workers: Optional[int] = Field(default=None, ge=1, description="Parallel workers (capped by PDMP_THREADS)")

    sweep_jumps: int = Field(default=10000, ge=1)
    sweep_alphas: List[float] = Field(default_factory=lambda: [0.125, 0.25, 0.5])
    sweep_betas: List[float] = Field(default_factory=lambda: [0.1])

    clt_target: Tuple[float, float] = Field(default=(1.0, 0.5))
    clt_alpha: float = Field(default=0.5, gt=0.0)
    clt_beta: float = Field(default=0.1, gt=0.0)
    clt_jumps: int = Field(default=50000, ge=1)
    clt_replicates: int = Field(default=200, ge=1)
    pilot_jumps: int = Field(default=50000, ge=1, description="Length of the pilot trajectory used for p_ergodic")

    pi_lower: float = Field(default=0.1)
    pi_upper: float = Field(default=2.9)
    pi_points: int = Field(default=57, ge=1)
    pi_bins: int = Field(default=28, ge=1)

    curve_x: List[float] = Field(default_factory=lambda: [1.0, 2.0])
    curve_points: int = Field(default=512, ge=1)
    curve_half_width: float = Field(default=0.15, gt=0.0)

    quad_horizon: float = Field(default=40.0, gt=0.0)
    quad_tolerance: float = Field(default=1e-10, gt=0.0)
    quad_limit: int = Field(default=200, ge=1)

    @field_validator("jump_counts")
    @classmethod
    def _ascending(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("jump_counts must not be empty")
        if any(n < 1 for n in value):
            raise ValueError(f"jump_counts must be positive, got {value}")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError(f"jump_counts must be strictly ascending, got {value}")
        return value

    @model_validator(mode="after")
    def _pi_grid(self) -> "ExperimentSection":
        if self.pi_points > 1 and not self.pi_lower < self.pi_upper:
            raise ValueError(f"pi_lower={self.pi_lower} must be below pi_upper={self.pi_upper}")
        return self


# ============================================================================
# Whole documents
# ============================================================================

SECTION_NAMES = ("model", "kernel", "bandwidths", "experiment")


class ExperimentConfig(_Section):
    """A full config document: model, kernel, bandwidths and experiment sections."""
    model: CellModelParams = Field(default_factory=CellModelParams)
    kernel: KernelSection = Field(default_factory=KernelSection)
    bandwidths: BandwidthSection = Field(default_factory=BandwidthSection)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)

    def with_bandwidths(self, **changes) -> "ExperimentConfig":
        bandwidths = BandwidthSection(**{**self.bandwidths.model_dump(), **changes})
        return self.model_copy(update={"bandwidths": bandwidths})

    def with_experiment(self, **changes) -> "ExperimentConfig":
        experiment = ExperimentSection(**{**self.experiment.model_dump(), **changes})
        return self.model_copy(update={"experiment": experiment})

    def require_seed(self) -> int:
        if self.experiment.seed is None:
            raise ConfigError("experiment.seed is not set")
        return self.experiment.seed


class RunConfig(BaseModel):
    """Parsed command line: the config document plus how it was obtained."""
    config: ExperimentConfig
    command: Optional[str] = Field(default=None, description="Selected subcommand")
    source: Optional[str] = Field(default=None, description="Config file path, if any")
    overrides: List[str] = Field(default_factory=list, description="section.key=value pairs applied last")
