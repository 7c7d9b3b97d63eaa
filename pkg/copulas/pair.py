"""
Copules par paires en dimension 3 (trois factorisations pivot)

    Pivot1 : c12(u1,u2) c13(u1,u3) c23|1(F2|1, F3|1)
    Pivot2 : c12(u1,u2) c23(u2,u3) c13|2(F1|2, F3|2)
    Pivot3 : c13(u1,u3) c23(u2,u3) c12|3(F1|3, F2|3)

Les arguments conditionnels sont des h-fonctions des arêtes non
conditionnelles, ramenés dans [1e-12, 1 - 1e-12] ; chaque ramenée est comptée.
"""
import itertools
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, field_validator
from scipy import optimize

from copulas.base import BaseCopula
from copulas.registry import MENU_12, copula_h_first, h_function, make_family, parse_family_code
from core.config import settings
from core.exceptions import ParamError
from core.models import Pivot, SkewTParams
from core.utils import clamp_unit
from distributions.skewt import skewt_cdf, skewt_logpdf, skewt_sf

# Indices (0-based) des marges couplées par chaque arête, par pivot
PIVOT_EDGES = {
    Pivot.P1: ((0, 1), (0, 2), (1, 2)),
    Pivot.P2: ((0, 1), (1, 2), (0, 2)),
    Pivot.P3: ((0, 2), (1, 2), (0, 1)),
}


class PairTemplate(BaseModel):
    """Pivot + codes des trois arêtes (deux non conditionnelles, une conditionnelle)"""
    model_config = ConfigDict(frozen=True)

    pivot: Pivot
    codes: Tuple[str, str, str]

    @field_validator("codes")
    @classmethod
    def _check_codes(cls, v: Tuple[str, str, str]) -> Tuple[str, str, str]:
        for code in v:
            parse_family_code(code)
        return v

    @property
    def spec_string(self) -> str:
        return f"P{int(self.pivot)}:" + ":".join(self.codes)

    @property
    def n_params(self) -> int:
        return int(sum(parse_family_code(c)[0].n_params for c in self.codes))


class PairCopulaSpec(BaseModel):
    """Modèle trivarié complet : pivot, trois copules, trois marges skew-t"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pivot: Pivot
    edge_copulas: Tuple[BaseCopula, BaseCopula, BaseCopula]
    marginals: Tuple[SkewTParams, SkewTParams, SkewTParams]

    @property
    def template(self) -> PairTemplate:
        return PairTemplate(pivot=self.pivot, codes=tuple(c.code for c in self.edge_copulas))

    @property
    def spec_string(self) -> str:
        return self.template.spec_string


def spec_string(pivot: Pivot, codes: Sequence[str]) -> str:
    return PairTemplate(pivot=pivot, codes=tuple(codes)).spec_string


def parse_spec_string(text: str) -> PairTemplate:
    """'P1:ga:cl90:t' -> PairTemplate"""
    parts = text.strip().split(":")
    if len(parts) != 4 or len(parts[0]) != 2 or parts[0][0].upper() != "P":
        raise ParamError(f"Spécification de paires invalide : {text}")
    try:
        pivot = Pivot(int(parts[0][1]))
    except ValueError:
        raise ParamError(f"Pivot invalide : {parts[0]}")
    return PairTemplate(pivot=pivot, codes=(parts[1], parts[2], parts[3]))


def enumerate_specs(
    families: Sequence[str] = MENU_12,
    pivots: Sequence[int] = (1, 2, 3)
) -> List[PairTemplate]:
    """
    Produit cartésien pivot x arête1 x arête2 x arête3

    Ordre déterministe : pivot d'abord, puis arête 1, 2 et 3.
    """
    families = list(families)
    if len(set(families)) != len(families):
        raise ParamError("familles dupliquées dans le menu", {"families": families})
    unknown = [f for f in families if f not in MENU_12]
    if unknown:
        raise ParamError("familles hors du menu des 12", {"unknown": unknown})
    out = []
    for p in pivots:
        pivot = Pivot(int(p))
        for combo in itertools.product(families, repeat=3):
            out.append(PairTemplate(pivot=pivot, codes=combo))
    return out


# ====================================================================
# DENSITÉ
# ====================================================================

def conditional_arguments(
    pivot: Pivot,
    edges: Sequence[BaseCopula],
    u: np.ndarray,
    eps: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Arguments (a, b) de la copule conditionnelle, bornés, et nombre de ramenées"""
    c_first, c_second = edges[0], edges[1]
    u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2]
    if pivot == Pivot.P1:
        a = copula_h_first(c_first, u1, u2)     # F2|1
        b = copula_h_first(c_second, u1, u3)    # F3|1
    elif pivot == Pivot.P2:
        a = h_function(c_first, u1, u2)         # F1|2
        b = copula_h_first(c_second, u2, u3)    # F3|2
    else:
        a = h_function(c_first, u1, u3)         # F1|3
        b = h_function(c_second, u2, u3)        # F2|3
    a, na = clamp_unit(a, eps)
    b, nb = clamp_unit(b, eps)
    return a, b, na + nb


def pair_copula_logdensity(
    pivot: Pivot,
    edges: Sequence[BaseCopula],
    u: np.ndarray
) -> Tuple[np.ndarray, int]:
    """
    Log-densité de la copule trivariée sur des uniformes (n, 3)

    Returns:
        (log c pour chaque ligne, nombre d'arguments ramenés)
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    (i1, j1), (i2, j2), _ = PIVOT_EDGES[pivot]
    out = edges[0].logpdf(u[:, i1], u[:, j1]) + edges[1].logpdf(u[:, i2], u[:, j2])
    a, b, clamps = conditional_arguments(pivot, edges, u)
    out = out + edges[2].logpdf(a, b)
    if clamps:
        logger.debug(f"⚠️ {clamps} arguments conditionnels ramenés dans (0, 1)")
    return out, clamps


def marginal_uniforms(x: np.ndarray, marginals: Sequence[SkewTParams]) -> Tuple[np.ndarray, int]:
    """u_i = F_i(x_i), bornés dans (0, 1)"""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    cols = []
    for i, p in enumerate(marginals):
        cdf = skewt_cdf(x[:, i], p)
        # Queue droite par la fonction de survie
        cdf = np.where(cdf > 0.5, 1.0 - skewt_sf(x[:, i], p), cdf)
        cols.append(cdf)
    return clamp_unit(np.column_stack(cols))


def pair_logdensity(spec: PairCopulaSpec, x: np.ndarray, return_clamps: bool = False):
    """log f_123(x) : marges skew-t + copule trivariée selon le pivot"""
    x_arr = np.asarray(x, dtype=float)
    rows = np.atleast_2d(x_arr)
    log_marg = sum(skewt_logpdf(rows[:, i], p) for i, p in enumerate(spec.marginals))
    u, clamps_u = marginal_uniforms(rows, spec.marginals)
    log_cop, clamps = pair_copula_logdensity(spec.pivot, spec.edge_copulas, u)
    out = log_marg + log_cop
    if x_arr.ndim == 1:
        out = float(out[0])
    if return_clamps:
        return out, clamps + clamps_u
    return out


# ====================================================================
# ESTIMATION SÉQUENTIELLE DES ARÊTES
# ====================================================================

def fit_bivariate(code: str, u: np.ndarray, v: np.ndarray) -> Tuple[BaseCopula, float]:
    """Maximum de vraisemblance d'une copule bivariée (espace libre)"""
    fam = make_family(code)
    if fam.n_params == 0:
        return fam, 0.0

    def neg_ll(z: np.ndarray) -> float:
        try:
            val = -float(np.sum(make_family(code, z).logpdf(u, v)))
        except ParamError:
            return 1e300
        return val if np.isfinite(val) else 1e300

    res = optimize.minimize(
        neg_ll, fam.to_free(), method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": settings.simplex_max_iter}
    )
    return make_family(code, res.x), -float(res.fun)


def fit_pair_copula_edges(template: PairTemplate, u: np.ndarray) -> Tuple[Tuple[BaseCopula, ...], float]:
    """
    Estimation séquentielle : arêtes non conditionnelles, puis arête
    conditionnelle sur les h-fonctions estimées

    Sert d'initialisation étagée aux ajustements PC / CPC.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    (i1, j1), (i2, j2), _ = PIVOT_EDGES[template.pivot]
    e1, ll1 = fit_bivariate(template.codes[0], u[:, i1], u[:, j1])
    e2, ll2 = fit_bivariate(template.codes[1], u[:, i2], u[:, j2])
    a, b, _ = conditional_arguments(template.pivot, (e1, e2), u)
    e3, ll3 = fit_bivariate(template.codes[2], a, b)
    logger.debug(f"Arêtes {template.spec_string} : ll={ll1 + ll2 + ll3:.4f}")
    return (e1, e2, e3), ll1 + ll2 + ll3
