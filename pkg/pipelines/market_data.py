"""
Pipeline : Données de marché

Rendements logarithmiques, statistiques descriptives, corrélations linéaires
et de rang, intervalles de confiance bootstrap des corrélations.
"""
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from core.config import settings
from core.exceptions import ConfigError, ParamError, StatError
from core.models import CorrInterval, RatePanel, ReturnPanel, SampleStats
from core.utils import pair_labels

MIN_BOOTSTRAP_ROWS = 10


def log_returns(panel: RatePanel, split_date: date) -> ReturnPanel:
    """
    r_t = ln(rate_{t+1} / rate_t) et première ligne hors échantillon

    Raises:
        StatError: moins de deux lignes
        ConfigError: split_date hors de la plage de dates
    """
    if panel.n_rows < 2:
        raise StatError("au moins deux lignes de taux sont nécessaires", {"rows": panel.n_rows})
    if split_date < panel.dates[0] or split_date > panel.dates[-1]:
        raise ConfigError(
            "date de split hors de la plage des données",
            {"split_date": split_date.isoformat(), "first": panel.dates[0].isoformat(),
             "last": panel.dates[-1].isoformat()}
        )
    rates = np.asarray(panel.rates, dtype=float)
    returns = np.log(rates[1:] / rates[:-1])
    dates = list(panel.dates[1:])
    split_index = int(np.searchsorted(np.array(dates, dtype="datetime64[D]"), np.datetime64(split_date, "D")))
    logger.info(
        f"Rendements : {returns.shape[0]} lignes, {split_index} dans l'échantillon, "
        f"{returns.shape[0] - split_index} hors échantillon"
    )
    return ReturnPanel(dates=dates, returns=returns, asset_names=list(panel.asset_names), split_index=split_index)


def returns_frame(panel: ReturnPanel) -> pd.DataFrame:
    """ReturnPanel -> DataFrame indexé par date"""
    frame = pd.DataFrame(panel.returns, columns=panel.asset_names)
    frame.insert(0, "date", [d.isoformat() for d in panel.dates])
    return frame


def sample_stats(x: np.ndarray) -> SampleStats:
    """
    Statistiques descriptives (écart-type n-1, kurtosis de Fisher)

    Raises:
        StatError: moins de 4 observations
    """
    x = np.asarray(x, dtype=float)
    if x.size < 4:
        raise StatError("au moins 4 observations sont nécessaires", {"n": int(x.size)})
    s = pd.Series(x)
    p25, p50, p75 = np.percentile(x, [25, 50, 75])
    return SampleStats(
        mean=float(s.mean()),
        std=float(s.std(ddof=1)),
        skew=float(np.nan_to_num(s.skew())),
        excess_kurtosis=float(np.nan_to_num(s.kurt())),
        min=float(x.min()),
        p25=float(p25),
        p50=float(p50),
        p75=float(p75),
        max=float(x.max()),
    )


def panel_stats(panel: ReturnPanel) -> pd.DataFrame:
    """Une ligne de statistiques par actif"""
    rows = []
    for k, name in enumerate(panel.asset_names):
        stats = sample_stats(panel.returns[:, k]).model_dump()
        rows.append({"asset": name, **stats})
    return pd.DataFrame(rows)


def _check_columns(x: np.ndarray, min_rows: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < min_rows:
        raise StatError(f"au moins {min_rows} lignes sont nécessaires", {"shape": x.shape})
    flat = np.flatnonzero(np.ptp(x, axis=0) == 0)
    if flat.size:
        raise StatError("variance nulle", {"column": int(flat[0])})
    return x


def _pearson(x: np.ndarray) -> np.ndarray:
    corr = np.clip(np.corrcoef(x, rowvar=False), -1.0, 1.0)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return corr


def correlations(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Corrélations linéaire (Pearson) et de rang (Spearman, rangs moyens)

    Raises:
        StatError: moins de 3 lignes ou colonne constante
    """
    x = _check_columns(x, 3)
    ranks = pd.DataFrame(x).rank(method="average").to_numpy()
    return _pearson(x), _pearson(ranks)


def correlation_table(linear: np.ndarray, rank: np.ndarray, labels: Sequence[str]) -> pd.DataFrame:
    """Triangle supérieur linéaire, triangle inférieur de rang"""
    n = linear.shape[0]
    table = np.where(np.triu(np.ones((n, n), dtype=bool), k=1), linear, rank)
    np.fill_diagonal(table, 1.0)
    return pd.DataFrame(table, index=list(labels), columns=list(labels))


# ====================================================================
# BOOTSTRAP
# ====================================================================

def _resample_seeds(seed: int, stream: Tuple[int, ...], resamples: int) -> List[np.random.SeedSequence]:
    """Une graine enfant par tirage, dérivée de (graine, flux) ; l'enfant i ne dépend pas de B"""
    return np.random.SeedSequence([int(seed), *(int(s) for s in stream)]).spawn(resamples)


def _corr2(a: np.ndarray, b: np.ndarray) -> float:
    a = a - a.mean()
    b = b - b.mean()
    return float(np.clip(np.dot(a, b) / np.sqrt(np.dot(a, a) * np.dot(b, b)), -1.0, 1.0))


def bootstrap_corr_ci(
    pairs: np.ndarray,
    resamples: Optional[int] = None,
    level: Optional[float] = None,
    seed: Optional[int] = None,
    stream: Tuple[int, ...] = (),
    max_redraws: Optional[int] = None
) -> CorrInterval:
    """
    Intervalle de confiance percentile d'une corrélation

    Tirage i : générateur de la i-ème graine enfant de (seed, stream). Un tirage
    dont une colonne est constante est refait avec le même générateur.

    Raises:
        StatError: moins de 10 lignes, variance nulle, plafond de nouveaux tirages atteint
    """
    resamples = resamples or settings.bootstrap_resamples
    level = settings.bootstrap_level if level is None else level
    seed = settings.seed if seed is None else seed
    max_redraws = max_redraws or settings.bootstrap_max_redraws
    if not 0 < level < 1:
        raise ParamError("le niveau doit être dans (0, 1)", {"level": level})
    x = _check_columns(pairs, MIN_BOOTSTRAP_ROWS)
    if x.shape[1] != 2:
        raise StatError("deux colonnes attendues", {"shape": x.shape})
    T = x.shape[0]
    point = _corr2(x[:, 0], x[:, 1])

    draws = np.empty(resamples)
    for i, child in enumerate(_resample_seeds(seed, stream, resamples)):
        rng = np.random.default_rng(child)
        for attempt in range(max_redraws + 1):
            if attempt == max_redraws:
                raise StatError("trop de tirages à variance nulle", {"resample": i, "attempts": attempt})
            idx = rng.integers(0, T, size=T)
            a, b = x[idx, 0], x[idx, 1]
            if np.ptp(a) > 0 and np.ptp(b) > 0:
                break
        draws[i] = _corr2(a, b)

    alpha = 0.5 * (1.0 - level)
    lower, upper = np.percentile(draws, [100.0 * alpha, 100.0 * (1.0 - alpha)])
    return CorrInterval(point=point, lower=float(lower), upper=float(upper), resamples=resamples, level=level)


def bootstrap_corr_matrix(
    x: np.ndarray,
    resamples: Optional[int] = None,
    level: Optional[float] = None,
    seed: Optional[int] = None,
    labels: Optional[Sequence[str]] = None
) -> Dict[Tuple[int, int], CorrInterval]:
    """Intervalle bootstrap pour chaque paire (i, j), i < j ; la paire p utilise le flux (seed, p)"""
    x = np.asarray(x, dtype=float)
    names = list(labels) if labels is not None else [str(k + 1) for k in range(x.shape[1])]
    out: Dict[Tuple[int, int], CorrInterval] = {}
    for p, (i, j) in enumerate(pair_labels(x.shape[1])):
        ci = bootstrap_corr_ci(x[:, [i, j]], resamples, level, seed, stream=(p,))
        out[(i, j)] = ci
        logger.debug(f"Bootstrap {names[i]}-{names[j]} : {ci.point:.4f} [{ci.lower:.4f}, {ci.upper:.4f}]")
    return out


def intervals_frame(intervals: Dict[Tuple[int, int], CorrInterval], labels: Sequence[str]) -> pd.DataFrame:
    """Tableau des intervalles (une ligne par paire)"""
    rows: List[Dict] = []
    for (i, j), ci in intervals.items():
        rows.append({
            "pair": f"{labels[i]}-{labels[j]}", "point": ci.point, "lower": ci.lower,
            "upper": ci.upper, "contains_zero": ci.contains(0.0), "resamples": ci.resamples,
        })
    return pd.DataFrame(rows)
