from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ProxStep(BaseModel):
    """
    thresholds of one sparse-group proximal step. eta1 is the group shrink amount and
    eta1 * mu the l1 shrink amount. per-group weights, when given, replace the uniform
    (1, mu) pair with (alpha_G, beta_G)
    """

    model_config = ConfigDict(frozen=True)

    eta1: float = Field(ge=0.0)
    mu: float = Field(default=0.0, ge=0.0)
    alpha: Optional[Tuple[float, ...]] = None
    beta: Optional[Tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check_weights(self) -> "ProxStep":
        if (self.alpha is None) != (self.beta is None):
            raise ValueError("per-group weights need both alpha and beta")
        if self.alpha is not None and len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have one entry per group")
        return self
