from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class InnerMaxMethod(Enum):
    """
    how the supremum over the sparse set is computed for each Gaussian draw
    """

    EXACT = "exact-enumeration"
    GREEDY_UPPER_BOUND = "greedy-upper-bound"


class WidthEstimate(BaseModel):
    """
    Monte Carlo estimate of a Gaussian mean width E[sup_x <x, g>], together with the
    second moment E[sup^2] that the squared width bounds are compared against
    """

    model_config = ConfigDict(frozen=True)

    mean: float
    std_error: float
    trials: int = Field(ge=1)
    inner_max_method: InnerMaxMethod
    mean_square: float
    mean_square_std_error: float

    def below(self, bound: float, num_std_errors: float = 3.0) -> bool:
        """
        whether E[sup^2] sits below a squared bound beyond num_std_errors standard errors
        """
        return self.mean_square - num_std_errors * self.mean_square_std_error <= bound


class ChiSquareCheck(BaseModel):
    """
    E[max of K chi-square(d) variables] against (sqrt(2 log K) + sqrt(d))^2
    """

    model_config = ConfigDict(frozen=True)

    K: int = Field(ge=1)
    d: int = Field(ge=1)
    empirical_mean: float
    std_error: float
    bound: float
    trials: int

    @property
    def holds(self) -> bool:
        return self.empirical_mean - 3.0 * self.std_error <= self.bound


class RelaxationCheck(BaseModel):
    """
    ratios h(x) / (sqrt(k) (1 + lambda1) ||x||) over sampled (k, l)-group sparse vectors.
    witness_ratio is the ratio of the equal-entries vector on k disjoint groups, when the
    layout admits one
    """

    model_config = ConfigDict(frozen=True)

    worst_ratio: float
    witness_ratio: Optional[float] = None
    trials: int

    def holds(self, tol: float = 1e-4) -> bool:
        return self.worst_ratio <= 1.0 + tol
