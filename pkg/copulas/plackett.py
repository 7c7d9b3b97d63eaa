"""
Copule de Plackett

    C(u, v) = [1 + (theta-1)(u+v) - sqrt(Delta)] / (2 (theta-1))
    Delta   = (1 + (theta-1)(u+v))^2 - 4 theta (theta-1) u v

theta = 1 (indépendance) est exclu du domaine. La forme rationalisée
C = 2 theta u v / (s + sqrt(Delta)) ne divise pas par theta - 1.
"""
from typing import Dict

import numpy as np

from copulas.base import BaseCopula, CopulaTag
from core.exceptions import ParamError

LOG_THETA_MAX = 10.0
UNIT_NUDGE = 1e-9


class PlackettCopula(BaseCopula):
    tag = CopulaTag.PLACKETT
    short = "pl"
    n_params = 1
    rotatable = False

    def __init__(self, theta: float, rotation: int = 0):
        super().__init__(rotation)
        if not np.isfinite(theta) or theta <= 0 or theta == 1.0:
            raise ParamError("theta Plackett doit être > 0 et différent de 1", {"theta": theta})
        self.theta = float(theta)

    def param_dict(self) -> Dict[str, float]:
        return {"theta": self.theta}

    def to_free(self) -> np.ndarray:
        return np.array([np.log(self.theta)])

    @classmethod
    def from_free(cls, z: np.ndarray, rotation: int = 0) -> "PlackettCopula":
        theta = float(np.exp(np.clip(z[0], -LOG_THETA_MAX, LOG_THETA_MAX)))
        if abs(theta - 1.0) < UNIT_NUDGE:
            theta = 1.0 + UNIT_NUDGE
        return cls(theta, rotation=rotation)

    @classmethod
    def default(cls, rotation: int = 0) -> "PlackettCopula":
        return cls(2.0, rotation=rotation)

    def _parts(self, u, v):
        th = self.theta
        s = 1.0 + (th - 1.0) * (u + v)
        delta = s * s - 4.0 * th * (th - 1.0) * u * v
        return s, np.maximum(delta, 0.0)

    def _cdf0(self, u, v):
        s, delta = self._parts(u, v)
        return 2.0 * self.theta * u * v / (s + np.sqrt(delta))

    def _logpdf0(self, u, v):
        th = self.theta
        _, delta = self._parts(u, v)
        return np.log(th) + np.log1p((th - 1.0) * (u + v - 2.0 * u * v)) - 1.5 * np.log(delta)

    def _h0(self, u, v):
        s, delta = self._parts(u, v)
        return 0.5 - (s - 2.0 * self.theta * u) / (2.0 * np.sqrt(delta))
