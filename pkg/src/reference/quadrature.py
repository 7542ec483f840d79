"""Adaptive Gauss-Kronrod quadrature with an explicit failure contract."""

import logging
from typing import Callable, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate

from src.errors import QuadratureError

logger = logging.getLogger(__name__)


class QuadratureSpec(BaseModel):
    """Tolerance, subdivision budget and horizon for improper time integrals."""
    model_config = ConfigDict(frozen=True)

    tolerance: float = Field(default=1e-10, gt=0.0, description="Absolute tolerance")
    max_subdivisions: int = Field(default=200, ge=1)
    horizon: float = Field(default=40.0, gt=0.0, description="Truncation horizon H in time units")
    scan_points: int = Field(default=2049, ge=16, description="Orbit scan resolution used to bracket support-face crossings")

    def halved(self) -> "QuadratureSpec":
        return self.model_copy(update={"tolerance": self.tolerance / 2.0})


def integrate_interval(
    func: Callable[[float], float],
    lower: float,
    upper: float,
    spec: QuadratureSpec,
    breakpoints: Sequence[float] = (),
) -> Tuple[float, float]:
    """int_lower^upper func with QUADPACK; returns (value, error estimate).

    Raises:
        QuadratureError: if the subdivision budget is exhausted or the
            routine reports any other failure.
    """
    if upper <= lower:
        return 0.0, 0.0
    points = [p for p in breakpoints if lower < p < upper] or None
    result = integrate.quad(
        func,
        lower,
        upper,
        epsabs=spec.tolerance,
        epsrel=0.0,
        limit=spec.max_subdivisions,
        points=points,
        full_output=1,
    )
    value, error = result[0], result[1]
    if len(result) > 3:
        raise QuadratureError(f"quadrature on [{lower:g}, {upper:g}] did not converge: {result[3]}")
    return float(value), float(error)
