"""
Pipeline : Évaluation des modèles

- cokurtosis d'ordre 2-2 des résidus
- log-vraisemblance moyenne des rendements (LLIS / LLOOS)
- test de corrélation (corrélations du modèle dans les intervalles bootstrap)
- lignes du rapport (AIC / BIC calculés par core.utils.information_criteria)

Hors échantillon, les récursions sigma^2 et Q continuent depuis l'état final de
l'échantillon avec les paramètres figés (ou repartent de Q̄ si reinit).
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy import stats

from core.exceptions import EvalError, ParamError, StatError
from core.models import CorrInterval, DccParams, DecompMethod, EvalReport, GarchParams
from core.utils import pair_labels
from pipelines.residual_fit import FitResult, ResidualModel, model_correlation, residual_logdensity
from volatility.dcc import filter_dcc
from volatility.decomp import decompose_path
from volatility.garch import variance_path

WINDOWS = ("in", "out")


def cokurtosis22(x: np.ndarray, y: np.ndarray) -> float:
    """
    Cokurtosis 2-2 : E[(X-mx)^2 (Y-my)^2] / (E[(X-mx)^2] E[(Y-my)^2])

    Vaut 1 pour des variables indépendantes.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatError("vecteurs de même longueur attendus", {"x": x.shape, "y": y.shape})
    if x.size < 4:
        raise StatError("au moins 4 observations sont nécessaires", {"n": int(x.size)})
    dx2 = (x - x.mean()) ** 2
    dy2 = (y - y.mean()) ** 2
    vx, vy = dx2.mean(), dy2.mean()
    if vx == 0 or vy == 0:
        raise StatError("variance nulle")
    return float(np.mean(dx2 * dy2) / (vx * vy))


def cokurtosis_table(residuals: np.ndarray, group: str = "Group1") -> Dict[str, float]:
    """Cokurtosis par paire, clés Group1-12, Group1-13, ..."""
    residuals = np.asarray(residuals, dtype=float)
    return {
        f"{group}-{i + 1}{j + 1}": cokurtosis22(residuals[:, i], residuals[:, j])
        for i, j in pair_labels(residuals.shape[1])
    }


# ====================================================================
# LOG-VRAISEMBLANCE DES RENDEMENTS
# ====================================================================

def _standard_normal_logdensity(x: np.ndarray) -> np.ndarray:
    return np.sum(stats.norm.logpdf(x), axis=1)


def returns_loglik_terms(
    garch: Sequence[GarchParams],
    dcc: Optional[DccParams],
    method: Optional[DecompMethod],
    residual: Optional[ResidualModel],
    returns: np.ndarray,
    reinit_at: Optional[int] = None
) -> np.ndarray:
    """
    Log-densité de chaque rendement r_t sur toute la série

    DCC : log p_eps(Xi_t^-1 xi_t) - log|det Xi_t| - sum log sigma_{i,t}
    NoDCC : log p_xi(xi_t) - sum log sigma_{i,t}
    residual = None : densité normale standard.

    Raises:
        EvalError: terme non fini (indice t dans les détails)
    """
    returns = np.asarray(returns, dtype=float)
    if returns.ndim == 1:
        returns = returns[:, None]
    if returns.shape[1] != len(garch):
        raise EvalError("un GARCH par actif est attendu", {"assets": returns.shape[1], "garch": len(garch)})
    sigma = np.column_stack([np.sqrt(variance_path(p, returns[:, i])) for i, p in enumerate(garch)])
    xi = returns / sigma
    log_sigma = np.sum(np.log(sigma), axis=1)

    if dcc is None:
        x, log_det = xi, 0.0
    else:
        if method is None:
            raise EvalError("une méthode de décomposition est requise avec DCC")
        path = filter_dcc(dcc, xi, reset_at=reinit_at)
        factors = decompose_path(method, path.r, sigma, reset_at=reinit_at)
        x = np.linalg.solve(factors, xi[..., None])[..., 0]
        log_det = np.linalg.slogdet(factors)[1]

    if residual is None:
        log_p = _standard_normal_logdensity(x)
    else:
        log_p = np.atleast_1d(residual_logdensity(residual, x))
    terms = log_p - log_det - log_sigma
    bad = np.flatnonzero(~np.isfinite(terms))
    if bad.size:
        raise EvalError("log-vraisemblance non finie", {"t": int(bad[0])})
    return terms


def returns_loglik(
    garch: Sequence[GarchParams],
    dcc: Optional[DccParams],
    method: Optional[DecompMethod],
    residual: Optional[ResidualModel],
    returns: np.ndarray,
    window: str,
    split_index: int,
    reinit: bool = False
) -> float:
    """
    Log-vraisemblance moyenne sur la fenêtre "in" (avant split_index) ou "out"

    Les paramètres sont ceux de l'échantillon ; la série complète est filtrée.
    """
    if window not in WINDOWS:
        raise ParamError(f"fenêtre inconnue : {window}", {"allowed": list(WINDOWS)})
    terms = returns_loglik_terms(
        garch, dcc, method, residual, returns, reinit_at=split_index if reinit else None
    )
    part = terms[:split_index] if window == "in" else terms[split_index:]
    if part.size == 0:
        raise EvalError(f"fenêtre {window} vide", {"split_index": split_index})
    return float(np.mean(part))


def _window_means(terms: np.ndarray, split_index: int) -> Tuple[float, Optional[float]]:
    llis = float(np.mean(terms[:split_index]))
    lloos = float(np.mean(terms[split_index:])) if split_index < terms.size else None
    return llis, lloos


# ====================================================================
# TEST DE CORRÉLATION
# ====================================================================

def correlation_test(
    model: ResidualModel,
    intervals: Dict[Tuple[int, int], CorrInterval],
    grid_points: Optional[int] = None
) -> str:
    """'T' si chaque corrélation du modèle tombe dans l'intervalle de la paire"""
    if model.n < 2:
        return "T"
    corr = model_correlation(model, grid_points)
    for (i, j), ci in intervals.items():
        if not ci.contains(float(corr[i, j])):
            logger.debug(f"Paire {i + 1}{j + 1} : {corr[i, j]:.4f} hors de [{ci.lower:.4f}, {ci.upper:.4f}]")
            return "F"
    return "T"


# ====================================================================
# RAPPORT
# ====================================================================

def evaluate_model(
    method_label: str,
    fit: FitResult,
    garch: Sequence[GarchParams],
    dcc: Optional[DccParams],
    method: Optional[DecompMethod],
    returns: np.ndarray,
    split_index: int,
    residuals: np.ndarray,
    intervals: Optional[Dict[Tuple[int, int], CorrInterval]] = None,
    reinit: bool = False,
    group: str = "Group1",
    grid_points: Optional[int] = None
) -> EvalReport:
    """
    Une ligne du rapport pour un modèle ajusté

    Args:
        method_label: "nodcc" ou l'étiquette de la décomposition
        residuals: résidus de l'échantillon (xi ou epsilon) pour la cokurtosis
        intervals: intervalles bootstrap des corrélations des résidus
    """
    terms = returns_loglik_terms(
        garch, dcc, method, fit.model, returns, reinit_at=split_index if reinit else None
    )
    llis, lloos = _window_means(terms, split_index)
    corr_test = correlation_test(fit.model, intervals, grid_points) if intervals else "F"
    return EvalReport(
        method=method_label,
        menu_item=fit.model.menu_item.value,
        spec_string=fit.model.spec_string,
        aic=fit.aic,
        bic=fit.bic,
        llis=llis,
        lloos=lloos,
        corr_test=corr_test,
        addin_used=fit.model.addin is not None,
        cokurtosis=cokurtosis_table(residuals, group) if residuals.shape[1] > 1 else {},
    )


REPORT_COLUMNS = ["method", "type", "spec_string", "aic", "bic", "llis", "lloos", "corr_test", "addin_used"]


def report_rows(reports: Sequence[EvalReport]) -> List[Dict]:
    return [
        {
            "method": r.method, "type": r.menu_item, "spec_string": r.spec_string, "aic": r.aic,
            "bic": r.bic, "llis": r.llis, "lloos": r.lloos, "corr_test": r.corr_test,
            "addin_used": r.addin_used,
        }
        for r in reports
    ]


def pair_summary_rows(reports: Sequence[EvalReport]) -> List[Dict]:
    """
    Meilleures spécifications par copule par paires, par méthode et par item

    Lignes PC-AIC / PC-BIC / PC-LLIS (ou CPC-...) avec le nombre de
    spécifications qui passent le test de corrélation.
    """
    rows: List[Dict] = []
    frame = pd.DataFrame(report_rows([r for r in reports if r.spec_string is not None]))
    if frame.empty:
        return rows
    for (method, item), grp in frame.groupby(["method", "type"], sort=False):
        passed = int((grp["corr_test"] == "T").sum())
        for criterion, pick in (("AIC", grp["aic"].idxmin()), ("BIC", grp["bic"].idxmin()),
                                ("LLIS", grp["llis"].idxmax())):
            best = grp.loc[pick].to_dict()
            best["type"] = f"{item}-{criterion}"
            best["passed"] = passed
            best["total"] = len(grp)
            rows.append(best)
    return rows


def report_frame(reports: Sequence[EvalReport], sweep_reports: Sequence[EvalReport] = ()) -> pd.DataFrame:
    """Tableau final : une ligne par (méthode, item), puis résumés du balayage"""
    frame = pd.DataFrame(report_rows(reports), columns=REPORT_COLUMNS)
    summary = pair_summary_rows(sweep_reports)
    if summary:
        frame = pd.concat([frame, pd.DataFrame(summary)], ignore_index=True)
    return frame

