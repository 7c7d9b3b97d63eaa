"""
Copule de Student bivariée (rho, nu)
"""
from typing import Dict

import numpy as np
from scipy import special, stats

from copulas.base import BaseCopula, CopulaTag, arctanh_bounded, tanh_bounded
from copulas.gaussian import cdf_by_quadrature
from core.exceptions import ParamError
from core.models import NU_LOWER_BOUND


class StudentTCopula(BaseCopula):
    tag = CopulaTag.STUDENT_T
    short = "t"
    n_params = 2
    rotatable = False

    def __init__(self, rho: float, nu: float, rotation: int = 0):
        super().__init__(rotation)
        if not np.isfinite(rho) or not -1.0 < rho < 1.0:
            raise ParamError("rho doit être dans (-1, 1)", {"rho": rho})
        if not np.isfinite(nu) or nu <= NU_LOWER_BOUND:
            raise ParamError("nu doit être > 2.001", {"nu": nu})
        self.rho = float(rho)
        self.nu = float(nu)

    def param_dict(self) -> Dict[str, float]:
        return {"rho": self.rho, "nu": self.nu}

    def to_free(self) -> np.ndarray:
        return np.array([arctanh_bounded(self.rho), np.log(self.nu - NU_LOWER_BOUND)])

    @classmethod
    def from_free(cls, z: np.ndarray, rotation: int = 0) -> "StudentTCopula":
        nu = NU_LOWER_BOUND + np.exp(np.clip(z[1], -30.0, 30.0))
        return cls(tanh_bounded(z[0]), float(nu), rotation=rotation)

    @classmethod
    def default(cls, rotation: int = 0) -> "StudentTCopula":
        return cls(0.0, 8.0, rotation=rotation)

    def _logpdf0(self, u, v):
        nu, r = self.nu, self.rho
        x, y = stats.t.ppf(u, nu), stats.t.ppf(v, nu)
        one_m = 1.0 - r * r
        quad = (x * x + y * y - 2.0 * r * x * y) / one_m
        const = special.gammaln(0.5 * (nu + 2.0)) + special.gammaln(0.5 * nu) - 2.0 * special.gammaln(0.5 * (nu + 1.0))
        return (
            const - 0.5 * np.log(one_m)
            - 0.5 * (nu + 2.0) * np.log1p(quad / nu)
            + 0.5 * (nu + 1.0) * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
        )

    def _h0(self, u, v):
        nu, r = self.nu, self.rho
        x, y = stats.t.ppf(u, nu), stats.t.ppf(v, nu)
        scale = np.sqrt((nu + y * y) * (1.0 - r * r) / (nu + 1.0))
        return stats.t.cdf((x - r * y) / scale, nu + 1.0)

    def _cdf0(self, u, v):
        return cdf_by_quadrature(self._h0, u, v)
