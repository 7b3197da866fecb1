"""
Simulation lab settings: the contaminated DGP and convergence sweeps.
"""

import json
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from pathgrid.study_config import format_validation_error
from utils.errors import SpecValidationError


class DgpConfig(BaseModel):
    """b_hat_p = b_bar + alpha_p b_tilde + (1 - alpha_p) e_p with b_tilde ~ N(0, sigma_b^2).

    ``alpha`` and ``n_obs`` are either one value for every path or one
    value per path.
    """

    b_bar: float = 0.0
    sigma_b: float = Field(default=1.0, gt=0)
    alpha: Union[float, List[float]] = 0.5
    n_obs: Union[int, List[int]] = 120
    sigma_e: float = Field(default=1.0, gt=0)
    rho: float = Field(default=0.0, ge=0, le=1)
    seed: int = 0

    @field_validator("alpha")
    @classmethod
    def alpha_in_unit_interval(cls, value):
        values = value if isinstance(value, list) else [value]
        if any(not 0.0 <= a <= 1.0 for a in values):
            raise ValueError("alpha must lie in [0, 1]")
        return value

    @field_validator("n_obs")
    @classmethod
    def lengths_at_least_two(cls, value):
        values = value if isinstance(value, list) else [value]
        if any(n < 2 for n in values):
            raise ValueError("sample lengths must be at least 2")
        return value


class SweepConfig(BaseModel):
    kind: Literal["paths", "growing_J", "growing_r"]
    values: List[int] = Field(min_length=1, description="Path counts, layer counts or option counts")
    fixed: int = Field(default=2, ge=1, description="Options per layer (growing_J) or layer count (growing_r)")
    rho: float = Field(default=0.5, ge=0, le=1)
    worlds: Optional[int] = Field(default=None, ge=2)


class SimlabConfig(BaseModel):
    seed: int = 0
    worlds: int = Field(default=1000, ge=2)
    grid_points: int = Field(default=121, ge=2)
    dgp: DgpConfig = Field(default_factory=DgpConfig)
    sweeps: List[SweepConfig] = Field(default_factory=list)


def load_simlab_config(path: Union[str, Path]) -> SimlabConfig:
    path = Path(path)
    if not path.exists():
        raise SpecValidationError(f"Config file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SpecValidationError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    try:
        return SimlabConfig.model_validate(payload)
    except ValidationError as e:
        raise SpecValidationError(f"{path}: {format_validation_error(e)}") from e
