"""
DCC : dynamique des corrélations conditionnelles (étape 2)

    Q_1 = Q0
    Q_t = (1 - a - b) Q̄ + a xi_{t-1} xi_{t-1}' + b Q_{t-1}     (t >= 2)
    R_t = diag(Q_t)^-1/2 Q_t diag(Q_t)^-1/2

Q̄ est ciblée sur la corrélation empirique des résidus ; seuls (a, b) sont
optimisés, avec Q0 = Q̄.
"""
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict
from scipy import signal

from core.exceptions import FitError, MatrixError
from core.linalg import cov_to_corr
from core.models import PERSISTENCE_CAP, DccFit, DccParams, DecompMethod, OptimReport, check_corr_matrix
from volatility.decomp import EigenSortState, decompose, decompose_path
from volatility.optim import SimplexDriver, persistence_from_free, persistence_to_free

MIN_OBSERVATIONS = 100

EpsSampler = Callable[[np.random.Generator, int, int], np.ndarray]


class CorrPath(BaseModel):
    """Trajectoires Q_t et R_t, tableaux (T, N, N)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    q: np.ndarray
    r: np.ndarray

    @property
    def length(self) -> int:
        return self.q.shape[0]


def normalize_q(q: np.ndarray) -> np.ndarray:
    """R = diag(Q)^-1/2 Q diag(Q)^-1/2, diagonale exactement 1 (fonctionne par lots)"""
    d = np.sqrt(np.diagonal(q, axis1=-2, axis2=-1))
    r = q / (d[..., :, None] * d[..., None, :])
    idx = np.arange(q.shape[-1])
    r[..., idx, idx] = 1.0
    return r


def q_path(p: DccParams, xi: np.ndarray, reset_at: Optional[int] = None) -> np.ndarray:
    """
    Récursion de Q_t

    reset_at : Q repart de Q̄ à cet indice (réinitialisation hors échantillon).
    """
    xi = np.asarray(xi, dtype=float)
    T, n = xi.shape
    if n != p.n_assets:
        raise MatrixError("dimension de xi incompatible avec Q̄", {"N": n, "expected": p.n_assets})
    if reset_at is not None and 0 < reset_at < T:
        head = q_path(p, xi[:reset_at])
        tail = q_path(DccParams(a=p.a, b=p.b, q_bar=p.q_bar), xi[reset_at:])
        return np.concatenate([head, tail])
    q = np.empty((T, n, n))
    q[0] = p.q0
    if T > 1:
        drive = (1.0 - p.a - p.b) * p.q_bar + p.a * (xi[:-1, :, None] * xi[:-1, None, :])
        q[1:], _ = signal.lfilter([1.0], [1.0, -p.b], drive, axis=0, zi=(p.b * p.q0)[None])
    return q


def filter_dcc(p: DccParams, xi: np.ndarray, reset_at: Optional[int] = None) -> CorrPath:
    """Trajectoires Q_t et R_t"""
    q = q_path(p, xi, reset_at)
    return CorrPath(q=q, r=normalize_q(q))


def ll_c_terms(r_path: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Contributions -1/2 (log|R_t| + xi' R_t^-1 xi - xi' xi) par date"""
    sign, logdet = np.linalg.slogdet(r_path)
    if np.any(sign <= 0):
        bad = int(np.flatnonzero(sign <= 0)[0])
        raise MatrixError("R_t singulière ou non définie positive", {"t": bad})
    try:
        sol = np.linalg.solve(r_path, xi[..., None])[..., 0]
    except np.linalg.LinAlgError:
        raise MatrixError("R_t singulière")
    return -0.5 * (logdet + np.sum(xi * sol, axis=1) - np.sum(xi * xi, axis=1))


def ll_c(p: DccParams, xi: np.ndarray) -> float:
    """Quasi-log-vraisemblance de corrélation"""
    xi = np.asarray(xi, dtype=float)
    return float(np.sum(ll_c_terms(filter_dcc(p, xi).r, xi)))


def target_correlation(xi: np.ndarray) -> np.ndarray:
    """Corrélation empirique de xi (symétrique, diagonale 1)"""
    q_bar = cov_to_corr(np.cov(np.asarray(xi, dtype=float), rowvar=False))
    return check_corr_matrix(q_bar, "Q̄")


def _params_from_free(z: np.ndarray, q_bar: np.ndarray) -> DccParams:
    a, b = persistence_from_free(z[0], z[1], PERSISTENCE_CAP)
    return DccParams(a=a, b=b, q_bar=q_bar)


def fit_dcc(xi: np.ndarray, seed: int = 0) -> Tuple[DccParams, OptimReport]:
    """
    Maximiser LL_C en (a, b), Q̄ ciblée, Q0 = Q̄

    Raises:
        FitError: moins de 100 observations ou non-convergence
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 2 or xi.shape[0] < MIN_OBSERVATIONS:
        raise FitError(f"DCC : au moins {MIN_OBSERVATIONS} observations requises", {"shape": xi.shape})
    q_bar = target_correlation(xi)

    def objective(z: np.ndarray) -> float:
        return -ll_c(_params_from_free(z, q_bar), xi)

    logger.info(f"🔄 Étape 2 : DCC sur {xi.shape[1]} actifs, T={xi.shape[0]}")
    driver = SimplexDriver(objective, label="DCC", seed=seed)
    z_hat, report = driver.run(np.array(persistence_to_free(0.05, 0.90, PERSISTENCE_CAP)))
    if not report.converged:
        raise FitError("DCC : le simplexe n'a pas convergé", report.model_dump())
    params = _params_from_free(z_hat, q_bar)
    logger.info(f"✅ DCC : a={params.a:.5f}, b={params.b:.5f}, ll={report.loglik:.4f}")
    return params, report


def dcc_fit_report(params: DccParams, report: OptimReport) -> DccFit:
    """Objet JSON de l'étape 2"""
    return DccFit(
        a=params.a, b=params.b, q_bar=[float(v) for v in params.q_bar.ravel()],
        ll=report.loglik, converged=report.converged, report=report
    )


def dcc_residuals(
    path: CorrPath,
    xi: np.ndarray,
    method: DecompMethod,
    sigma: Optional[np.ndarray] = None,
    reset_at: Optional[int] = None,
    return_factors: bool = False
):
    """
    epsilon_t = Xi_{R_t}^-1 xi_t pour chaque date

    Returns:
        epsilon (T, N), ou (epsilon, Xi) si return_factors
    """
    xi = np.asarray(xi, dtype=float)
    factors = decompose_path(method, path.r, sigma, reset_at=reset_at)
    try:
        eps = np.linalg.solve(factors, xi[..., None])[..., 0]
    except np.linalg.LinAlgError:
        raise MatrixError("Xi_t singulière")
    if return_factors:
        return eps, factors
    return eps


def standard_normal_eps(rng: np.random.Generator, T: int, n: int) -> np.ndarray:
    return rng.standard_normal((T, n))


def simulate_dcc(
    p: DccParams,
    T: int,
    eps_sampler: EpsSampler = standard_normal_eps,
    method: Optional[DecompMethod] = None,
    seed: int = 0,
    sigma: Optional[np.ndarray] = None,
    return_path: bool = False
):
    """
    Simuler xi_t = Xi_{R_t} epsilon_t, la récursion de Q étant pilotée par les xi générés

    Returns:
        xi (T, N), ou (xi, CorrPath) si return_path
    """
    method = method or DecompMethod(tag="sqrt")
    rng = np.random.default_rng(seed)
    n = p.n_assets
    eps = np.asarray(eps_sampler(rng, T, n), dtype=float)
    xi = np.empty((T, n))
    q = np.empty((T, n, n))
    state: Optional[EigenSortState] = None
    q[0] = p.q0
    for t in range(T):
        if t > 0:
            drive = (1.0 - p.a - p.b) * p.q_bar + p.a * (xi[t - 1][:, None] * xi[t - 1][None, :])
            q[t] = drive + p.b * q[t - 1]
        r_t = normalize_q(q[t])
        sig = None if sigma is None else sigma[t]
        factor, state = decompose(method, r_t, state, sig)
        xi[t] = factor @ eps[t]
    if return_path:
        return xi, CorrPath(q=q, r=normalize_q(q))
    return xi


def export_corr_path_csv(
    out_path: Path,
    path: CorrPath,
    dates: Optional[Sequence] = None,
    labels: Optional[Sequence[str]] = None
) -> Path:
    """Trajectoire R_t au format long (t, i, j, value), paires i < j"""
    T, n, _ = path.r.shape
    iu, ju = np.triu_indices(n, k=1)
    t_idx = np.repeat(np.arange(T), iu.size)
    names = list(labels) if labels is not None else [str(k + 1) for k in range(n)]
    frame = pd.DataFrame({
        "t": [str(dates[k]) for k in t_idx] if dates is not None else t_idx + 1,
        "i": [names[k] for k in np.tile(iu, T)],
        "j": [names[k] for k in np.tile(ju, T)],
        "value": path.r[:, iu, ju].ravel(),
    })
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out_path, index=False, float_format="%.10g")
    logger.debug(f"Trajectoire R_t exportée : {out_path}")
    return out_path
