"""
Skew-t standardisée (moyenne 0, variance 1)

Asymétrie de Fernandez-Steel appliquée à une Student-t de variance unité, puis
recentrage et normalisation affine pour que la loi ait une moyenne nulle et une
variance unité. La log-densité est la primitive : pdf = exp(logpdf).

Toutes les fonctions sont vectorisées sur des tableaux numpy.
"""
from typing import Tuple, Union

import numpy as np
from loguru import logger
from scipy import integrate, optimize, special, stats

from core.exceptions import ParamError
from core.models import NU_LOWER_BOUND, SkewTParams

ArrayLike = Union[float, np.ndarray]


def make_skewt(nu: float, gamma: float = 1.0) -> SkewTParams:
    """Construire des paramètres validés (ParamError si hors domaine)"""
    return SkewTParams(nu=float(nu), gamma=float(gamma))


def _standardization(p: SkewTParams) -> Tuple[float, float, float]:
    """
    Constantes de standardisation

    Returns:
        (m1, mu, sigma) où m1 = E|Z| pour la t de variance unité
    """
    nu, g = p.nu, p.gamma
    m1 = 2.0 * np.sqrt(nu - 2.0) / (nu - 1.0) * np.exp(-special.betaln(0.5, 0.5 * nu))
    mu = m1 * (g - 1.0 / g)
    sigma = np.sqrt((1.0 - m1 ** 2) * (g ** 2 + 1.0 / g ** 2) + 2.0 * m1 ** 2 - 1.0)
    return m1, mu, sigma


def _unit_t_scale(nu: float) -> float:
    return np.sqrt(nu / (nu - 2.0))


def skewt_logpdf(x: ArrayLike, p: SkewTParams) -> np.ndarray:
    """Log-densité de la skew-t standardisée"""
    x = np.asarray(x, dtype=float)
    _, mu, sigma = _standardization(p)
    g = p.gamma
    s = _unit_t_scale(p.nu)
    z = x * sigma + mu
    arg = np.where(z < 0, z * g, z / g)
    log_unit_t = stats.t.logpdf(arg * s, p.nu) + np.log(s)
    return np.log(2.0 / (g + 1.0 / g)) + log_unit_t + np.log(sigma)


def skewt_pdf(x: ArrayLike, p: SkewTParams) -> np.ndarray:
    """Densité de la skew-t standardisée"""
    return np.exp(skewt_logpdf(x, p))


def _unit_t_cdf(y: np.ndarray, nu: float) -> np.ndarray:
    return stats.t.cdf(y * _unit_t_scale(nu), nu)


def _unit_t_ppf(q: np.ndarray, nu: float) -> np.ndarray:
    return stats.t.ppf(q, nu) / _unit_t_scale(nu)


def skewt_cdf(x: ArrayLike, p: SkewTParams) -> np.ndarray:
    """Fonction de répartition"""
    x = np.asarray(x, dtype=float)
    _, mu, sigma = _standardization(p)
    g2 = p.gamma ** 2
    z = x * sigma + mu
    lower = 2.0 / (g2 + 1.0) * _unit_t_cdf(np.minimum(z, 0.0) * p.gamma, p.nu)
    upper = 1.0 - 2.0 * g2 / (g2 + 1.0) * _unit_t_cdf(-np.maximum(z, 0.0) / p.gamma, p.nu)
    return np.where(z < 0, lower, upper)


def skewt_sf(x: ArrayLike, p: SkewTParams) -> np.ndarray:
    """Fonction de survie 1 - F(x), précise dans la queue droite"""
    x = np.asarray(x, dtype=float)
    _, mu, sigma = _standardization(p)
    g2 = p.gamma ** 2
    z = x * sigma + mu
    lower = 1.0 - 2.0 / (g2 + 1.0) * _unit_t_cdf(np.minimum(z, 0.0) * p.gamma, p.nu)
    upper = 2.0 * g2 / (g2 + 1.0) * _unit_t_cdf(-np.maximum(z, 0.0) / p.gamma, p.nu)
    return np.where(z < 0, lower, upper)


def skewt_quantile_tails(lower: ArrayLike, upper: ArrayLike, p: SkewTParams) -> np.ndarray:
    """
    Quantile à partir des deux probabilités de queue

    lower = u et upper = 1 - u, chacune connue avec sa propre précision
    (évite la perte de chiffres quand u est proche de 1).
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    _, mu, sigma = _standardization(p)
    g = p.gamma
    g2 = g ** 2
    p0 = 1.0 / (1.0 + g2)
    left = lower < p0
    q_left = np.where(left, lower * (g2 + 1.0) / 2.0, 0.25)
    q_right = np.where(left, 0.25, upper * (g2 + 1.0) / (2.0 * g2))
    z = np.where(left, _unit_t_ppf(q_left, p.nu) / g, -g * _unit_t_ppf(q_right, p.nu))
    return (z - mu) / sigma


def skewt_quantile(u: ArrayLike, p: SkewTParams, tol: float = 1e-10) -> np.ndarray:
    """
    Quantile F^{-1}(u)

    Inversion par morceaux, puis raffinement par recherche de racine encadrée
    (Brent) pour les points dont le résidu |F(x) - u| dépasse tol.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u_arr)) or np.any(u_arr <= 0) or np.any(u_arr >= 1):
        raise ParamError("u doit être dans (0, 1)")
    x = np.atleast_1d(skewt_quantile_tails(u_arr, 1.0 - u_arr, p)).astype(float)
    flat_u = np.atleast_1d(u_arr)
    resid = np.abs(skewt_cdf(x, p) - flat_u)
    for idx in np.flatnonzero(resid > tol):
        target = float(flat_u[idx])
        x[idx] = _bracketed_quantile(target, float(x[idx]), p)
    return x.reshape(u_arr.shape) if u_arr.shape else x[0]


def _bracketed_quantile(u: float, guess: float, p: SkewTParams) -> float:
    """Recherche encadrée du quantile autour d'une estimation initiale"""
    f = lambda v: float(skewt_cdf(v, p)) - u  # noqa: E731
    width = max(1.0, abs(guess))
    lo, hi = guess - width, guess + width
    while f(lo) > 0:
        lo -= 2.0 * width
        width *= 2.0
    while f(hi) < 0:
        hi += 2.0 * width
        width *= 2.0
    return optimize.brentq(f, lo, hi, xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=200)


def skewt_rvs(p: SkewTParams, size: Union[int, Tuple[int, ...]], rng: np.random.Generator) -> np.ndarray:
    """Tirages par inversion de la fonction de répartition"""
    u = rng.uniform(size=size)
    return skewt_quantile_tails(u, 1.0 - u, p)


def skewt_moments(p: SkewTParams) -> Tuple[float, float]:
    """Moyenne et variance par quadrature (diagnostic)"""
    mean = integrate.quad(lambda v: v * float(skewt_pdf(v, p)), -np.inf, np.inf, limit=200)[0]
    second = integrate.quad(lambda v: v * v * float(skewt_pdf(v, p)), -np.inf, np.inf, limit=200)[0]
    return mean, second - mean ** 2


# ====================================================================
# PARAMÉTRAGE LIBRE POUR LES OPTIMISEURS
# ====================================================================

def skewt_to_free(p: SkewTParams) -> np.ndarray:
    """(nu, gamma) -> espace non contraint"""
    return np.array([np.log(p.nu - NU_LOWER_BOUND), np.log(p.gamma)])


def skewt_from_free(z: np.ndarray) -> SkewTParams:
    """Espace non contraint -> (nu, gamma)"""
    nu = NU_LOWER_BOUND + np.exp(np.clip(z[0], -30.0, 30.0))
    gamma = np.exp(np.clip(z[1], -10.0, 10.0))
    return SkewTParams(nu=float(nu), gamma=float(gamma))


def fit_skewt(x: np.ndarray, start: SkewTParams = None) -> Tuple[SkewTParams, float]:
    """
    Maximum de vraisemblance d'une marge seule

    Sert d'initialisation étagée à l'étape 3.

    Returns:
        (paramètres, log-vraisemblance)
    """
    x = np.asarray(x, dtype=float)
    start = start or SkewTParams(nu=8.0, gamma=1.0)

    def neg_ll(z: np.ndarray) -> float:
        val = -np.sum(skewt_logpdf(x, skewt_from_free(z)))
        return val if np.isfinite(val) else 1e300

    res = optimize.minimize(
        neg_ll, skewt_to_free(start), method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 2000}
    )
    params = skewt_from_free(res.x)
    logger.debug(f"Marge skew-t : nu={params.nu:.4f}, gamma={params.gamma:.4f}, ll={-res.fun:.4f}")
    return params, float(-res.fun)
