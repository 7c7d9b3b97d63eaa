"""
GARCH(1,1) univarié : filtrage, quasi-vraisemblance, estimation (étape 1)

    sigma_1^2 = sigma0^2
    sigma_t^2 = omega + alpha r_{t-1}^2 + beta sigma_{t-1}^2   (t >= 2)

La récursion est un filtre linéaire du premier ordre en sigma^2, évalué
avec scipy.signal.lfilter.
"""
from multiprocessing import Pool
from typing import Callable, List, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict
from scipy import signal

from core.config import available_jobs
from core.exceptions import FitError, ParamError
from core.models import PERSISTENCE_CAP, GarchFit, GarchParams, OptimReport
from volatility.optim import SimplexDriver, persistence_from_free, persistence_to_free

MIN_OBSERVATIONS = 50
LOG_2PI = float(np.log(2.0 * np.pi))

Sampler = Callable[[np.random.Generator, int], np.ndarray]


class VolPath(BaseModel):
    """Volatilités conditionnelles et résidus standardisés d'un actif"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    sigma: np.ndarray
    xi: np.ndarray


def unconditional_sigma(p: GarchParams) -> float:
    """Volatilité inconditionnelle sqrt(omega / (1 - alpha - beta))"""
    persistence = p.alpha + p.beta
    if persistence >= 1:
        raise ParamError("alpha + beta doit être < 1", {"persistence": persistence})
    return float(np.sqrt(p.omega / (1.0 - persistence)))


def variance_path(p: GarchParams, r: np.ndarray) -> np.ndarray:
    """sigma_t^2 pour t = 1..T"""
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        raise ParamError("série de rendements vide")
    s0 = p.sigma0 ** 2
    sig2 = np.empty(r.size)
    sig2[0] = s0
    if r.size > 1:
        drive = p.omega + p.alpha * r[:-1] ** 2
        sig2[1:], _ = signal.lfilter([1.0], [1.0, -p.beta], drive, zi=[p.beta * s0])
    return sig2


def filter_variance(p: GarchParams, r: np.ndarray) -> VolPath:
    """Chemin de volatilité et résidus xi_t = r_t / sigma_t"""
    r = np.asarray(r, dtype=float)
    sigma = np.sqrt(variance_path(p, r))
    return VolPath(sigma=sigma, xi=r / sigma)


def ll_v(p: GarchParams, r: np.ndarray) -> float:
    """Quasi-log-vraisemblance gaussienne"""
    r = np.asarray(r, dtype=float)
    sig2 = variance_path(p, r)
    return float(-0.5 * np.sum(LOG_2PI + np.log(sig2) + r * r / sig2))


# ====================================================================
# ESTIMATION
# ====================================================================

def _params_from_free(z: np.ndarray, free_sigma0: bool) -> GarchParams:
    omega = float(np.exp(np.clip(z[0], -60.0, 10.0)))
    alpha, beta = persistence_from_free(z[1], z[2], PERSISTENCE_CAP)
    if free_sigma0:
        s0 = float(np.exp(np.clip(z[3], -30.0, 10.0)))
    else:
        # sigma0 contraint à la volatilité inconditionnelle
        s0 = float(np.sqrt(omega / (1.0 - alpha - beta)))
    return GarchParams(omega=omega, alpha=alpha, beta=beta, sigma0=s0)


def fit_garch(
    r: np.ndarray,
    constrain_sigma0_to_unconditional: bool = True,
    seed: int = 0,
    label: str = "GARCH"
) -> Tuple[GarchParams, OptimReport]:
    """
    Maximiser LL_V pour un actif

    Départ : alpha = 0.05, beta = 0.90, omega = variance empirique x 0.05.
    Paramétrage libre : log omega, persistance logistique (alpha + beta <= 1 - 1e-6).

    Raises:
        FitError: série trop courte, variance nulle ou non-convergence
    """
    r = np.asarray(r, dtype=float)
    if r.size < MIN_OBSERVATIONS:
        raise FitError(f"{label} : au moins {MIN_OBSERVATIONS} observations requises", {"n": int(r.size)})
    var = float(np.var(r))
    if not np.isfinite(var) or var <= 0:
        raise FitError(f"{label} : variance nulle, estimation impossible", {"variance": var})

    z1, z2 = persistence_to_free(0.05, 0.90, PERSISTENCE_CAP)
    start = [np.log(var * 0.05), z1, z2]
    free_sigma0 = not constrain_sigma0_to_unconditional
    if free_sigma0:
        start.append(0.5 * np.log(var))

    def objective(z: np.ndarray) -> float:
        return -ll_v(_params_from_free(z, free_sigma0), r)

    driver = SimplexDriver(objective, label=label, seed=seed)
    z_hat, report = driver.run(np.array(start))
    if not report.converged:
        raise FitError(f"{label} : le simplexe n'a pas convergé", report.model_dump())
    params = _params_from_free(z_hat, free_sigma0)
    return params, report


def _fit_asset(job: Tuple[str, np.ndarray, bool, int]) -> GarchFit:
    asset, r, constrain, seed = job
    params, report = fit_garch(r, constrain, seed=seed, label=f"GARCH {asset}")
    return GarchFit(
        asset=asset, omega=params.omega, alpha=params.alpha, beta=params.beta,
        sigma0=params.sigma0, ll=report.loglik, converged=report.converged, report=report
    )


def fit_garch_panel(
    returns: pd.DataFrame,
    jobs: int = 1,
    constrain_sigma0_to_unconditional: bool = True,
    seed: int = 0
) -> List[GarchFit]:
    """Étape 1 : un GARCH par actif, indépendamment (en parallèle si jobs > 1)"""
    tasks = [
        (str(col), returns[col].to_numpy(dtype=float), constrain_sigma0_to_unconditional, seed)
        for col in returns.columns
    ]
    workers = min(available_jobs(jobs), len(tasks))
    logger.info(f"🔄 Étape 1 : GARCH sur {len(tasks)} actifs ({workers} processus)")
    if workers > 1:
        with Pool(workers) as pool:
            fits = list(pool.imap(_fit_asset, tasks))
    else:
        fits = [_fit_asset(t) for t in tasks]
    for fit in fits:
        logger.info(
            f"✅ {fit.asset} : omega={fit.omega:.4e}, alpha={fit.alpha:.4f}, "
            f"beta={fit.beta:.4f}, ll={fit.ll:.2f}"
        )
    return fits


# ====================================================================
# SIMULATION
# ====================================================================

def standard_normal_sampler(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.standard_normal(size)


def simulate_garch(
    p: GarchParams,
    T: int,
    residual_sampler: Sampler = standard_normal_sampler,
    seed: int = 0,
    return_sigma: bool = False
):
    """
    Simuler r_t = sigma_t xi_t avec la même récursion que filter_variance

    Returns:
        r, ou (r, sigma) si return_sigma
    """
    rng = np.random.default_rng(seed)
    xi = np.asarray(residual_sampler(rng, T), dtype=float)
    sig2 = np.empty(T)
    r = np.empty(T)
    sig2[0] = p.sigma0 ** 2
    r[0] = np.sqrt(sig2[0]) * xi[0]
    for t in range(1, T):
        drive = p.omega + p.alpha * r[t - 1] ** 2
        sig2[t] = drive + p.beta * sig2[t - 1]
        r[t] = np.sqrt(sig2[t]) * xi[t]
    if return_sigma:
        return r, np.sqrt(sig2)
    return r
