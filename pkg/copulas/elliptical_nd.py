"""
Copules elliptiques de dimension N (gaussienne et Student)

Les log-densités passent par la Cholesky de R. Les fonctions de répartition
(diagnostic seulement) utilisent l'intégration quasi Monte-Carlo de scipy
avec une graine fixe.
"""
from typing import Optional

import numpy as np
from scipy import linalg, special, stats
from scipy.stats._multivariate import multivariate_normal_frozen

from core.exceptions import DomainError, ParamError
from core.linalg import safe_cholesky
from core.models import NU_LOWER_BOUND, check_corr_matrix

DIAGNOSTIC_SEED = 12345


def _as_rows(u: np.ndarray, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    rows = np.atleast_2d(u)
    if rows.shape[-1] != n:
        raise DomainError("dimension de u incompatible avec R", {"expected": n, "got": rows.shape[-1]})
    if np.any(~np.isfinite(rows)) or np.any(rows <= 0) or np.any(rows >= 1):
        raise DomainError("évaluation hors de l'intérieur du cube unité")
    return rows


def _mahalanobis(chol: np.ndarray, x: np.ndarray) -> np.ndarray:
    z = linalg.solve_triangular(chol, x.T, lower=True)
    return np.sum(z * z, axis=0)


def _check_nu(nu: float) -> None:
    if not np.isfinite(nu) or nu <= NU_LOWER_BOUND:
        raise ParamError("nu doit être > 2.001", {"nu": nu})


def gaussian_copula_logdensity_nd(r: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Log-densité de la copule gaussienne de corrélation R"""
    r = check_corr_matrix(r)
    n = r.shape[0]
    rows = _as_rows(u, n)
    chol = safe_cholesky(r, "R")
    x = stats.norm.ppf(rows)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    out = -0.5 * log_det - 0.5 * (_mahalanobis(chol, x) - np.sum(x * x, axis=1))
    return out if np.ndim(u) > 1 else out[0]


def t_copula_logdensity_nd(r: np.ndarray, nu: float, u: np.ndarray) -> np.ndarray:
    """Log-densité de la copule de Student de corrélation R et nu degrés"""
    _check_nu(nu)
    r = check_corr_matrix(r)
    n = r.shape[0]
    rows = _as_rows(u, n)
    chol = safe_cholesky(r, "R")
    x = stats.t.ppf(rows, nu)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    const = (
        special.gammaln(0.5 * (nu + n)) + (n - 1) * special.gammaln(0.5 * nu)
        - n * special.gammaln(0.5 * (nu + 1.0))
    )
    out = (
        const - 0.5 * log_det
        - 0.5 * (nu + n) * np.log1p(_mahalanobis(chol, x) / nu)
        + 0.5 * (nu + 1.0) * np.sum(np.log1p(x * x / nu), axis=1)
    )
    return out if np.ndim(u) > 1 else out[0]


def gaussian_copula_cdf_nd(r: np.ndarray, u: np.ndarray, seed: int = DIAGNOSTIC_SEED) -> np.ndarray:
    """C_Phi(u) par intégration quasi Monte-Carlo (tolérance 1e-4)"""
    r = check_corr_matrix(r)
    rows = _as_rows(u, r.shape[0])
    dist = multivariate_normal_frozen(mean=np.zeros(r.shape[0]), cov=r, seed=seed, abseps=1e-5, releps=1e-5)
    out = np.atleast_1d(dist.cdf(stats.norm.ppf(rows)))
    return out if np.ndim(u) > 1 else float(out[0])


def t_copula_cdf_nd(r: np.ndarray, nu: float, u: np.ndarray, seed: int = DIAGNOSTIC_SEED) -> np.ndarray:
    """C_t(u) par intégration quasi Monte-Carlo"""
    _check_nu(nu)
    r = check_corr_matrix(r)
    n = r.shape[0]
    rows = _as_rows(u, n)
    dist = stats.multivariate_t(loc=np.zeros(n), shape=r, df=nu)
    x = stats.t.ppf(rows, nu)
    out = np.atleast_1d(dist.cdf(x, maxpts=50_000 * n, random_state=seed))
    return out if np.ndim(u) > 1 else float(out[0])


class EllipticalCopulaNd:
    """
    Copule de dimension N utilisée par les résidus (IC, GC, TC)

    nu = None donne la copule gaussienne ; R = None donne l'indépendance.
    """

    def __init__(self, n: int, r: Optional[np.ndarray] = None, nu: Optional[float] = None):
        self.n = n
        self.r = None if r is None else check_corr_matrix(r)
        self.nu = nu
        if nu is not None:
            _check_nu(nu)
            if r is None:
                raise ParamError("la copule de Student exige une matrice R")

    @property
    def is_independent(self) -> bool:
        return self.r is None

    def logpdf(self, u: np.ndarray) -> np.ndarray:
        if self.r is None:
            rows = _as_rows(u, self.n)
            out = np.zeros(rows.shape[0])
            return out if np.ndim(u) > 1 else 0.0
        if self.nu is None:
            return gaussian_copula_logdensity_nd(self.r, u)
        return t_copula_logdensity_nd(self.r, self.nu, u)

    def cdf(self, u: np.ndarray, seed: int = DIAGNOSTIC_SEED) -> np.ndarray:
        if self.r is None:
            rows = _as_rows(u, self.n)
            out = np.prod(rows, axis=1)
            return out if np.ndim(u) > 1 else float(out[0])
        if self.nu is None:
            return gaussian_copula_cdf_nd(self.r, u, seed)
        return t_copula_cdf_nd(self.r, self.nu, u, seed)
