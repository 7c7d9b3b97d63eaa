"""
Copule de Gumbel, générateur (-log t)^theta
"""
from typing import Dict

import numpy as np

from copulas.base import BaseCopula, CopulaTag
from core.exceptions import ParamError

THETA_MAX = 51.0


class GumbelCopula(BaseCopula):
    tag = CopulaTag.GUMBEL
    short = "gu"
    n_params = 1
    rotatable = True

    def __init__(self, theta: float, rotation: int = 0):
        super().__init__(rotation)
        if not np.isfinite(theta) or theta < 1:
            raise ParamError("theta Gumbel doit être >= 1", {"theta": theta})
        self.theta = float(theta)

    def param_dict(self) -> Dict[str, float]:
        return {"theta": self.theta}

    def to_free(self) -> np.ndarray:
        return np.array([np.log(max(self.theta - 1.0, 1e-12))])

    @classmethod
    def from_free(cls, z: np.ndarray, rotation: int = 0) -> "GumbelCopula":
        return cls(1.0 + float(np.exp(np.clip(z[0], -27.0, np.log(THETA_MAX - 1.0)))), rotation=rotation)

    @classmethod
    def default(cls, rotation: int = 0) -> "GumbelCopula":
        return cls(1.5, rotation=rotation)

    def _parts(self, u, v):
        th = self.theta
        x, y = -np.log(u), -np.log(v)
        log_s = np.logaddexp(th * np.log(x), th * np.log(y))
        a = np.exp(log_s / th)
        return x, y, log_s, a

    def _cdf0(self, u, v):
        _, _, _, a = self._parts(u, v)
        return np.exp(-a)

    def _logpdf0(self, u, v):
        th = self.theta
        x, y, log_s, a = self._parts(u, v)
        return (
            -a + x + y + (th - 1.0) * (np.log(x) + np.log(y))
            - (2.0 - 1.0 / th) * log_s + np.log(a + th - 1.0)
        )

    def _h0(self, u, v):
        th = self.theta
        _, y, log_s, a = self._parts(u, v)
        return np.exp(-a + (1.0 / th - 1.0) * log_s + (th - 1.0) * np.log(y) + y)
