"""
Copule de Clayton, générateur (t^-theta - 1) / theta

Les puissances u^-theta sont écrites avec expm1/log1p pour rester exactes
près de l'indépendance (theta -> 0+).
"""
from typing import Dict

import numpy as np

from copulas.base import BaseCopula, CopulaTag
from core.exceptions import ParamError

THETA_MAX = 50.0


class ClaytonCopula(BaseCopula):
    tag = CopulaTag.CLAYTON
    short = "cl"
    n_params = 1
    rotatable = True

    def __init__(self, theta: float, rotation: int = 0):
        super().__init__(rotation)
        if not np.isfinite(theta) or theta <= 0:
            raise ParamError("theta Clayton doit être > 0", {"theta": theta})
        self.theta = float(theta)

    def param_dict(self) -> Dict[str, float]:
        return {"theta": self.theta}

    def to_free(self) -> np.ndarray:
        return np.array([np.log(self.theta)])

    @classmethod
    def from_free(cls, z: np.ndarray, rotation: int = 0) -> "ClaytonCopula":
        return cls(float(np.exp(np.clip(z[0], -12.0, np.log(THETA_MAX)))), rotation=rotation)

    @classmethod
    def default(cls, rotation: int = 0) -> "ClaytonCopula":
        return cls(0.5, rotation=rotation)

    def _log_s(self, u, v):
        # log(u^-theta + v^-theta - 1)
        th = self.theta
        return np.log1p(np.expm1(-th * np.log(u)) + np.expm1(-th * np.log(v)))

    def _cdf0(self, u, v):
        return np.exp(-self._log_s(u, v) / self.theta)

    def _logpdf0(self, u, v):
        th = self.theta
        return (
            np.log1p(th) - (1.0 + th) * (np.log(u) + np.log(v))
            - (2.0 + 1.0 / th) * self._log_s(u, v)
        )

    def _h0(self, u, v):
        th = self.theta
        return np.exp(-(th + 1.0) * np.log(v) - (1.0 / th + 1.0) * self._log_s(u, v))
