from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class ObservationKind(Enum):
    """
    the link functions labels can be generated from
    """

    LOGISTIC = "logistic"
    SIGN = "sign"
    LINEAR = "linear"


class ObservationModel(BaseModel):
    """
    an observation model E[y | phi] = f(<phi, x*>). beta is the logistic slope and
    sigma_noise the standard deviation of the additive noise of the linear model
    """

    model_config = ConfigDict(frozen=True)

    kind: ObservationKind = ObservationKind.SIGN
    beta: float = Field(default=1.0, gt=0.0)
    sigma_noise: float = Field(default=0.0, ge=0.0)

    @property
    def is_classification(self) -> bool:
        return self.kind in (ObservationKind.LOGISTIC, ObservationKind.SIGN)


class GroundTruth(BaseModel):
    """
    a unit-norm (k, l)-group sparse coefficient vector with the groups and coordinates
    that were drawn to build it
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x_star: np.ndarray
    active_groups: Tuple[int, ...]
    per_group_support: Dict[int, Tuple[int, ...]]

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.x_star))


class CovarianceKind(Enum):
    """
    the row covariances a design can be drawn with
    """

    IDENTITY = "identity"
    EXPLICIT = "explicit"
    AR1 = "ar1"


class DesignSpec(BaseModel):
    """
    a Gaussian design with i.i.d. N(0, Sigma) rows
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=0)
    p: int = Field(ge=1)
    covariance: CovarianceKind = CovarianceKind.IDENTITY
    rho: float = Field(default=0.0, gt=-1.0, lt=1.0)
    sigma: Optional[np.ndarray] = None
    seed: int = 0

    @model_validator(mode="after")
    def _check_sigma(self) -> "DesignSpec":
        if self.covariance == CovarianceKind.EXPLICIT:
            if self.sigma is None:
                raise ValueError("an explicit covariance needs a sigma matrix")
            sigma = np.asarray(self.sigma, dtype=float)
            if sigma.shape != (self.p, self.p):
                raise ValueError(f"sigma must be {self.p}x{self.p}, got {sigma.shape}")
            if not np.allclose(sigma, sigma.T):
                raise ValueError("sigma must be symmetric")
        return self
