from math import sqrt
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

from src.errors import DimensionError


class PenaltyParams(BaseModel):
    """
    weights of the sparse overlapping group penalty. the uniform form weighs every group's
    l2 norm by 1 and its l1 norm by mu = lambda1 / sqrt(l_target). per-group (alpha_G, beta_G)
    pairs override the uniform form
    """

    model_config = ConfigDict(frozen=True)

    lambda1: float = Field(default=1.0, ge=0.0)
    l_target: int = Field(default=1, ge=1)
    per_group_weights: Optional[Tuple[Tuple[float, float], ...]] = None

    @field_validator("per_group_weights")
    @classmethod
    def _positive_weights(cls, weights):
        if weights is not None:
            for group_id, (alpha, beta) in enumerate(weights):
                if alpha <= 0 or beta <= 0:
                    raise ValueError(f"group {group_id} weights must be positive, got ({alpha}, {beta})")
        return weights

    @computed_field
    @property
    def mu(self) -> float:
        return self.lambda1 / sqrt(self.l_target)

    def group_weights(self, num_groups: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        the (alpha_G, beta_G) weights of every group

        :param num_groups: number of groups in the layout
        :return: alpha and beta arrays, one entry per group
        """
        if self.per_group_weights is None:
            return np.ones(num_groups), np.full(num_groups, self.mu)

        if len(self.per_group_weights) != num_groups:
            raise DimensionError("per-group weights", num_groups, len(self.per_group_weights))

        weights = np.asarray(self.per_group_weights, dtype=float)
        return weights[:, 0], weights[:, 1]


class Decomposition(BaseModel):
    """
    a decomposition x = sum_G w_G, stored as one block per group in the expanded space
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    w: np.ndarray
    objective: float
    residual: float
    iterations: int = 0
    converged: bool = True
