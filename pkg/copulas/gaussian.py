"""
Copule gaussienne bivariée
"""
from typing import Dict

import numpy as np
from scipy import integrate, stats

from copulas.base import BaseCopula, CopulaTag, arctanh_bounded, tanh_bounded
from core.exceptions import ParamError


def cdf_by_quadrature(h0, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """C(u, v) = intégrale de h(u, s) pour s dans (0, v), point par point"""
    out = np.empty(u.shape, dtype=float)
    flat_u, flat_v, flat_out = u.ravel(), v.ravel(), out.ravel()
    for i in range(flat_u.size):
        ui = flat_u[i]
        flat_out[i] = integrate.quad(
            lambda s: float(h0(np.array(ui), np.array(s))), 0.0, flat_v[i],
            epsabs=1e-14, epsrel=1e-12, limit=200
        )[0]
    return flat_out.reshape(u.shape)


class GaussianCopula(BaseCopula):
    tag = CopulaTag.GAUSSIAN
    short = "ga"
    n_params = 1
    rotatable = False

    def __init__(self, rho: float, rotation: int = 0):
        super().__init__(rotation)
        if not np.isfinite(rho) or not -1.0 < rho < 1.0:
            raise ParamError("rho doit être dans (-1, 1)", {"rho": rho})
        self.rho = float(rho)

    def param_dict(self) -> Dict[str, float]:
        return {"rho": self.rho}

    def to_free(self) -> np.ndarray:
        return np.array([arctanh_bounded(self.rho)])

    @classmethod
    def from_free(cls, z: np.ndarray, rotation: int = 0) -> "GaussianCopula":
        return cls(tanh_bounded(z[0]), rotation=rotation)

    @classmethod
    def default(cls, rotation: int = 0) -> "GaussianCopula":
        return cls(0.0, rotation=rotation)

    def _logpdf0(self, u, v):
        x, y = stats.norm.ppf(u), stats.norm.ppf(v)
        r = self.rho
        one_m = 1.0 - r * r
        return -0.5 * np.log(one_m) - (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * one_m)

    def _h0(self, u, v):
        x, y = stats.norm.ppf(u), stats.norm.ppf(v)
        return stats.norm.cdf((x - self.rho * y) / np.sqrt(1.0 - self.rho ** 2))

    def _cdf0(self, u, v):
        return cdf_by_quadrature(self._h0, u, v)
