from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.constants import BACKTRACKING_FACTOR, SOLVER_MAX_ITERS, SOLVER_REL_TOL
from src.penalty.classes import PenaltyParams


class LossKind(Enum):
    """
    the smooth data-fit terms the solver supports
    """

    LINEAR_CLASSIFICATION = "linear-classification"
    SQUARED = "squared"


class StepRule(Enum):
    """
    how the gradient step size is chosen
    """

    FIXED = "fixed"
    BACKTRACKING = "backtracking"


class Loss(BaseModel):
    """
    linear-classification is sum_i -y_i <phi_i, x> with labels in {-1, +1}.
    squared is 1/2 ||y - Phi x||^2 with real labels
    """

    model_config = ConfigDict(frozen=True)

    kind: LossKind = LossKind.SQUARED

    @property
    def is_classification(self) -> bool:
        return self.kind == LossKind.LINEAR_CLASSIFICATION


class SolverConfig(BaseModel):
    """
    settings of one Lagrangian fit

        min loss(x) + eta1 h(x) + eta2 ||x||^2
    """

    model_config = ConfigDict(frozen=True)

    eta1: float = Field(gt=0.0)
    eta2: float = Field(default=0.0, ge=0.0)
    params: PenaltyParams = PenaltyParams()
    max_iters: int = Field(default=SOLVER_MAX_ITERS, ge=1)
    rel_tol: float = Field(default=SOLVER_REL_TOL, gt=0.0)
    step_rule: StepRule = StepRule.BACKTRACKING
    # fixed step, or the initial step for backtracking. None means 1 / (Lipschitz estimate)
    step_size: Optional[float] = Field(default=None, gt=0.0)
    backtracking_factor: float = Field(default=BACKTRACKING_FACTOR, gt=0.0, lt=1.0)
    acceleration: bool = True
    debias: bool = False
    seed: int = 0


class FitResult(BaseModel):
    """
    output of a fit. x_raw is the collapsed penalized solution and x_hat the reported
    estimate (the debiased one when debiasing was requested)
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x_hat: np.ndarray
    x_raw: np.ndarray
    w_hat: np.ndarray
    objective_trace: List[float]
    iterations: int
    converged: bool
    support: Tuple[int, ...]
    active_groups: Tuple[int, ...]
    step_size: float
    debias_rank_deficient: bool = False
