"""
Copule de Frank

Pour theta > 0 on écrit

    D(u, v) = e^{-theta u} (1 - e^{-theta v}) + e^{-theta v} (1 - e^{-theta (1 - v)})

somme de deux termes positifs, ce qui évite toute soustraction catastrophique
quel que soit |theta|. Les paramètres négatifs passent par la réflexion
C_theta(u, v) = u - C_{-theta}(u, 1 - v).
"""
from typing import Dict

import numpy as np

from copulas.base import BaseCopula, CopulaTag
from core.exceptions import ParamError

THETA_MAX = 60.0
THETA_MIN_ABS = 1e-6


def _log_one_minus_exp(x):
    """log(1 - e^{-x}) pour x > 0"""
    return np.log(-np.expm1(-x))


class FrankCopula(BaseCopula):
    tag = CopulaTag.FRANK
    short = "fr"
    n_params = 1
    rotatable = True

    def __init__(self, theta: float, rotation: int = 0):
        super().__init__(rotation)
        if not np.isfinite(theta) or theta == 0:
            raise ParamError("theta Frank doit être non nul", {"theta": theta})
        self.theta = float(theta)

    def param_dict(self) -> Dict[str, float]:
        return {"theta": self.theta}

    def to_free(self) -> np.ndarray:
        return np.array([self.theta])

    @classmethod
    def from_free(cls, z: np.ndarray, rotation: int = 0) -> "FrankCopula":
        theta = float(np.clip(z[0], -THETA_MAX, THETA_MAX))
        if abs(theta) < THETA_MIN_ABS:
            theta = THETA_MIN_ABS if theta >= 0 else -THETA_MIN_ABS
        return cls(theta, rotation=rotation)

    @classmethod
    def default(cls, rotation: int = 0) -> "FrankCopula":
        return cls(1.0, rotation=rotation)

    # Primitives pour theta > 0 ------------------------------------------

    @staticmethod
    def _log_d(th, u, v):
        first = -th * u + _log_one_minus_exp(th * v)
        second = -th * v + _log_one_minus_exp(th * (1.0 - v))
        return np.logaddexp(first, second)

    def _pos_cdf(self, th, u, v):
        return (_log_one_minus_exp(th) - self._log_d(th, u, v)) / th

    def _pos_logpdf(self, th, u, v):
        return np.log(th) + _log_one_minus_exp(th) - th * (u + v) - 2.0 * self._log_d(th, u, v)

    def _pos_h(self, th, u, v):
        return np.exp(-th * v + _log_one_minus_exp(th * u) - self._log_d(th, u, v))

    # Primitives générales ------------------------------------------------

    def _cdf0(self, u, v):
        if self.theta > 0:
            return self._pos_cdf(self.theta, u, v)
        return u - self._pos_cdf(-self.theta, u, 1.0 - v)

    def _logpdf0(self, u, v):
        if self.theta > 0:
            return self._pos_logpdf(self.theta, u, v)
        return self._pos_logpdf(-self.theta, u, 1.0 - v)

    def _h0(self, u, v):
        if self.theta > 0:
            return self._pos_h(self.theta, u, v)
        return self._pos_h(-self.theta, u, 1.0 - v)
