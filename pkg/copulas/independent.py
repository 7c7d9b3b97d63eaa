"""
Copule d'indépendance C(u, v) = u v
"""
from typing import Dict

import numpy as np

from copulas.base import BaseCopula, CopulaTag


class IndependentCopula(BaseCopula):
    tag = CopulaTag.INDEPENDENT
    short = "in"
    n_params = 0
    rotatable = True

    def param_dict(self) -> Dict[str, float]:
        return {}

    def to_free(self) -> np.ndarray:
        return np.zeros(0)

    @classmethod
    def from_free(cls, z: np.ndarray, rotation: int = 0) -> "IndependentCopula":
        return cls(rotation=rotation)

    @classmethod
    def default(cls, rotation: int = 0) -> "IndependentCopula":
        return cls(rotation=rotation)

    def _cdf0(self, u, v):
        return u * v

    def _logpdf0(self, u, v):
        return np.zeros(np.shape(u))

    def _h0(self, u, v):
        return np.array(u, dtype=float, copy=True)
