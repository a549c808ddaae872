from enum import Enum
from pathlib import Path
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.simulate.classes import ObservationModel


class ExperimentKind(Enum):
    PHASE = "phase"
    TOY_REGRESSION = "toy-regression"


class Method(Enum):
    """
    the estimators compared by the experiments. lasso uses singleton groups and glasso a
    disjoint partition, or one group per feature across tasks in toy regression. oglasso fits
    the overlapping layout with lambda1 = 0 and soglasso with lambda1 > 0
    """

    LASSO = "lasso"
    GLASSO = "glasso"
    OGLASSO = "oglasso"
    SOGLASSO = "soglasso"


class Tuning(Enum):
    FIXED = "fixed"
    CV = "cv"


class RunOptions(BaseModel):
    """
    global command-line options shared by every subcommand
    """

    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, ge=0)
    jobs: int = 1
    reproducible: bool = False
    out: Optional[Path] = None
    verbose: bool = False


class ExperimentSpec(BaseModel):
    """
    one simulation experiment. groups are a chain of num_groups groups of group_size
    coordinates, shifted by group_shift (group_shift == group_size gives disjoint groups)
    """

    model_config = ConfigDict(frozen=True)

    kind: ExperimentKind
    n_grid: Tuple[int, ...] = (100,)
    num_groups: int = Field(default=25, ge=1)
    group_size: int = Field(default=4, ge=1)
    group_shift: Optional[int] = Field(default=None, ge=1)
    tasks: int = Field(default=1, ge=1)
    k: int = Field(default=3, ge=1)
    l: Optional[int] = Field(default=None, ge=1)
    alpha_grid: Tuple[float, ...] = ()
    model: ObservationModel = ObservationModel()
    rho_grid: Tuple[float, ...] = (0.0,)
    methods: Tuple[Method, ...] = tuple(Method)
    trials: int = Field(default=20, ge=1)
    tuning: Tuning = Tuning.FIXED
    eta1_scale: float = Field(default=1.0, gt=0.0)
    seed: int = Field(default=0, ge=0)

    @field_validator("n_grid")
    @classmethod
    def _increasing(cls, n_grid):
        if len(n_grid) == 0:
            raise ValueError("the n grid is empty")
        if any(n < 1 for n in n_grid):
            raise ValueError(f"sample sizes must be positive, got {n_grid}")
        if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
            raise ValueError(f"the n grid must be strictly increasing, got {n_grid}")
        return n_grid

    @field_validator("alpha_grid")
    @classmethod
    def _fractions(cls, alpha_grid):
        if any(not 0.0 < alpha <= 1.0 for alpha in alpha_grid):
            raise ValueError(f"alpha values must lie in (0, 1], got {alpha_grid}")
        return alpha_grid

    @field_validator("rho_grid")
    @classmethod
    def _correlations(cls, rho_grid):
        if len(rho_grid) == 0 or any(not -1.0 < rho < 1.0 for rho in rho_grid):
            raise ValueError(f"rho values must lie in (-1, 1), got {rho_grid}")
        return rho_grid

    @model_validator(mode="after")
    def _sparsity(self) -> "ExperimentSpec":
        if self.k > self.num_groups:
            raise ValueError(f"k = {self.k} exceeds the number of groups {self.num_groups}")
        if self.shift > self.group_size:
            raise ValueError(f"group shift {self.shift} exceeds the group size {self.group_size}")
        if self.l is not None and self.l > self.group_size * self.tasks:
            raise ValueError(f"l = {self.l} exceeds the group size {self.group_size * self.tasks}")
        if len(self.methods) == 0:
            raise ValueError("no methods selected")
        return self

    @property
    def shift(self) -> int:
        return self.group_shift if self.group_shift is not None else self.group_size

    @property
    def p(self) -> int:
        """
        coordinates spanned by the chain of groups, per task
        """
        return self.shift * (self.num_groups - 1) + self.group_size
