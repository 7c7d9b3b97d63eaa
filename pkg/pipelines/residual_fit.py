"""
Pipeline : Modélisation des résidus (étape 3)

Menu des distributions :
    IC  / CIC   marges skew-t + copule d'indépendance       (C = avec add-in)
    GC  / CGC   marges skew-t + copule gaussienne (Sigma_G)
    TC  / CTC   marges skew-t + copule de Student (Sigma_G, nu)
    PC  / CPC   marges skew-t + copule par paires (N = 3)

Add-in de correction de corrélation : X = L Y avec L triangulaire inférieure,
L[0, 0] = 1, diagonale positive. Densité : f_Y(L^-1 x) - log|det L|.

Estimation : initialisation étagée (marges seules, puis copule depuis le point
d'indépendance, puis add-in depuis L = I ou la cible J), puis optimisation
jointe. Chaque modèle part de l'optimum du modèle qu'il emboîte, donc
LL(CGC) >= LL(GC) >= LL(IC).
"""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import linalg, optimize, stats

from copulas.base import BaseCopula, arctanh_bounded, split_free
from copulas.elliptical_nd import EllipticalCopulaNd
from copulas.pair import (
    PairTemplate, fit_pair_copula_edges, marginal_uniforms, pair_copula_logdensity
)
from copulas.registry import make_family
from core.config import settings
from core.exceptions import DomainError, FitError, MatrixError, ParamError
from core.linalg import corr_from_partials, cov_to_corr, n_pairs, partials_from_corr, safe_cholesky, sqrtm_spd
from core.models import NU_LOWER_BOUND, MenuItem, OptimReport, Pivot, ResidualKind, SkewTParams, check_corr_matrix
from core.utils import information_criteria
from distributions.skewt import fit_skewt, skewt_from_free, skewt_logpdf, skewt_quantile_tails, skewt_to_free
from volatility.optim import SimplexDriver, safe_objective

PARTIAL_CAP = 1.0 - 1e-7
BOUNDARY_FREE = 15.0
MIN_OBSERVATIONS = 10


# ====================================================================
# TYPES
# ====================================================================

class AddInTransform(BaseModel):
    """Matrice L de l'add-in (triangulaire inférieure, L[0, 0] = 1)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    l: np.ndarray

    @model_validator(mode="after")
    def _check(self) -> "AddInTransform":
        m = np.asarray(self.l, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise MatrixError("L doit être carrée", {"shape": m.shape})
        if np.any(np.triu(m, k=1) != 0):
            raise MatrixError("L doit être triangulaire inférieure")
        if m[0, 0] != 1.0:
            raise ParamError("L[0, 0] doit valoir 1", {"l11": float(m[0, 0])})
        if np.any(np.diag(m) <= 0):
            raise MatrixError("la diagonale de L doit être strictement positive")
        return self

    @property
    def n(self) -> int:
        return self.l.shape[0]

    @property
    def n_free(self) -> int:
        return self.n * (self.n + 1) // 2 - 1

    @property
    def log_abs_det(self) -> float:
        return float(np.sum(np.log(np.diag(self.l))))

    @classmethod
    def identity(cls, n: int) -> "AddInTransform":
        return cls(l=np.eye(n))

    def to_free(self) -> np.ndarray:
        """Ligne par ligne : a_{i,0..i-1} puis log a_{i,i}, pour i >= 1"""
        out = []
        for i in range(1, self.n):
            out.extend(self.l[i, :i])
            out.append(np.log(self.l[i, i]))
        return np.array(out, dtype=float)

    @classmethod
    def from_free(cls, z: np.ndarray, n: int) -> "AddInTransform":
        m = np.eye(n)
        pos = 0
        for i in range(1, n):
            m[i, :i] = z[pos:pos + i]
            m[i, i] = np.exp(np.clip(z[pos + i], -20.0, 20.0))
            pos += i + 1
        return cls(l=m)

    def free_names(self) -> List[str]:
        names = []
        for i in range(1, self.n):
            names.extend(f"addin.a{i + 1}{j + 1}" for j in range(i))
            names.append(f"addin.log_a{i + 1}{i + 1}")
        return names

    def inverse_apply(self, x: np.ndarray) -> np.ndarray:
        """L^-1 x pour chaque ligne de x"""
        return linalg.solve_triangular(self.l, np.atleast_2d(x).T, lower=True).T


class ResidualModel(BaseModel):
    """Marges skew-t + copule + add-in éventuel"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    menu_item: MenuItem
    marginals: List[SkewTParams]
    sigma_g: Optional[np.ndarray] = None
    nu: Optional[float] = None
    pivot: Optional[Pivot] = None
    edges: Optional[Tuple[BaseCopula, BaseCopula, BaseCopula]] = None
    addin: Optional[AddInTransform] = None

    @model_validator(mode="after")
    def _check(self) -> "ResidualModel":
        base = self.menu_item.base
        n = len(self.marginals)
        if base in (MenuItem.GC, MenuItem.TC):
            if self.sigma_g is None:
                raise ParamError(f"{base.value} exige Sigma_G")
            check_corr_matrix(self.sigma_g, "Sigma_G")
        if base == MenuItem.TC and (self.nu is None or self.nu <= NU_LOWER_BOUND):
            raise ParamError("TC exige nu > 2.001", {"nu": self.nu})
        if base == MenuItem.PC:
            if n != 3 or self.edges is None or self.pivot is None:
                raise ParamError("PC exige trois marges, un pivot et trois arêtes")
        if self.menu_item.uses_addin and self.addin is None:
            raise ParamError(f"{self.menu_item.value} exige un add-in")
        if self.addin is not None and self.addin.n != n:
            raise MatrixError("dimension de L incompatible", {"L": self.addin.n, "N": n})
        return self

    @property
    def n(self) -> int:
        return len(self.marginals)

    @property
    def spec_string(self) -> Optional[str]:
        if self.edges is None:
            return None
        return PairTemplate(pivot=self.pivot, codes=tuple(e.code for e in self.edges)).spec_string

    def without_addin(self) -> "ResidualModel":
        return self.model_copy(update={"menu_item": self.menu_item.base, "addin": None})

    def copula(self) -> Optional[EllipticalCopulaNd]:
        """Copule de dimension N (None pour les copules par paires)"""
        base = self.menu_item.base
        if base == MenuItem.IC:
            return EllipticalCopulaNd(self.n)
        if base == MenuItem.GC:
            return EllipticalCopulaNd(self.n, self.sigma_g)
        if base == MenuItem.TC:
            return EllipticalCopulaNd(self.n, self.sigma_g, self.nu)
        return None

    def params_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"marginals": [p.model_dump() for p in self.marginals]}
        if self.sigma_g is not None:
            out["sigma_g"] = self.sigma_g.tolist()
        if self.nu is not None:
            out["nu"] = self.nu
        if self.edges is not None:
            out["pivot"] = int(self.pivot)
            out["edges"] = [{"code": e.code, **e.param_dict()} for e in self.edges]
        if self.addin is not None:
            out["addin"] = self.addin.l.tolist()
        return out


class FitResult(BaseModel):
    """Résultat d'un ajustement de l'étape 3"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: ResidualModel
    loglik: float
    k: int
    n_obs: int
    aic: float
    bic: float
    converged: bool
    clamp_count: int = 0
    boundary_params: List[str] = []
    report: Optional[OptimReport] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "menu_item": self.model.menu_item.value,
            "spec_string": self.model.spec_string,
            "params": self.model.params_dict(),
            "ll": self.loglik,
            "k": self.k,
            "aic": self.aic,
            "bic": self.bic,
            "converged": self.converged,
            "clamp_count": self.clamp_count,
            "boundary_params": self.boundary_params,
        }


# ====================================================================
# DENSITÉS
# ====================================================================

def _copula_logdensity(m: ResidualModel, u: np.ndarray) -> Tuple[np.ndarray, int]:
    cop = m.copula()
    if cop is not None:
        if cop.is_independent:
            return np.zeros(u.shape[0]), 0
        return np.atleast_1d(cop.logpdf(u)), 0
    return pair_copula_logdensity(m.pivot, m.edges, u)


def _base_logdensity(m: ResidualModel, x: np.ndarray) -> Tuple[np.ndarray, int]:
    rows = np.atleast_2d(np.asarray(x, dtype=float))
    if rows.shape[1] != m.n:
        raise DomainError("dimension des données incompatible", {"expected": m.n, "got": rows.shape[1]})
    log_marg = sum(skewt_logpdf(rows[:, i], p) for i, p in enumerate(m.marginals))
    u, clamps_u = marginal_uniforms(rows, m.marginals)
    log_cop, clamps = _copula_logdensity(m, u)
    return log_marg + log_cop, clamps_u + clamps


def _shape_like(x: np.ndarray, out: np.ndarray):
    return float(out[0]) if np.ndim(x) == 1 else out


def base_logdensity(m: ResidualModel, x: np.ndarray):
    """Log-densité sans add-in : copule en (F_i(x_i)) + somme des log f_i(x_i)"""
    out, _ = _base_logdensity(m.without_addin() if m.addin is not None else m, x)
    return _shape_like(x, out)


def addin_logdensity(m: ResidualModel, x: np.ndarray):
    """Changement de variables : base(L^-1 x) - log|det L|"""
    if m.addin is None:
        raise ParamError("modèle sans add-in")
    out, _ = _residual_logdensity(m, x)
    return _shape_like(x, out)


def _residual_logdensity(m: ResidualModel, x: np.ndarray) -> Tuple[np.ndarray, int]:
    if m.addin is None:
        return _base_logdensity(m, x)
    y = m.addin.inverse_apply(x)
    out, clamps = _base_logdensity(m.without_addin(), y)
    return out - m.addin.log_abs_det, clamps


def residual_logdensity(m: ResidualModel, x: np.ndarray, return_clamps: bool = False):
    """Log-densité d'un modèle de résidus (avec ou sans add-in)"""
    out, clamps = _residual_logdensity(m, x)
    out = _shape_like(x, out)
    return (out, clamps) if return_clamps else out


def leelong_transform(s: np.ndarray) -> np.ndarray:
    """(sqrt S)^-1 : décorrèle un vecteur de covariance S"""
    root = sqrtm_spd(np.asarray(s, dtype=float), "S")
    inv = np.linalg.inv(root)
    return 0.5 * (inv + inv.T)


def addin_from_target(j: np.ndarray, s_y: np.ndarray) -> AddInTransform:
    """
    L_{J,S_Y} = L_J L_{S_Y}^-1 (covariance de L Y égale à J)

    Raises:
        ParamError: J[0, 0] différent de 1
        MatrixError: J ou S_Y non définie positive
    """
    j = np.asarray(j, dtype=float)
    if abs(j[0, 0] - 1.0) > 1e-12:
        raise ParamError("J[0, 0] doit valoir 1", {"j11": float(j[0, 0])})
    l_j = safe_cholesky(j, "J")
    l_s = safe_cholesky(np.asarray(s_y, dtype=float), "S_Y")
    l_s_inv = linalg.solve_triangular(l_s, np.eye(l_s.shape[0]), lower=True)
    m = np.tril(l_j @ l_s_inv)
    m[0, 0] = 1.0
    return AddInTransform(l=m)


# ====================================================================
# CORRÉLATION DU MODÈLE (INTÉGRATION SUR GRILLE)
# ====================================================================

def _grid_axis(points: int, half_width: float) -> Tuple[np.ndarray, float]:
    step = 2.0 * half_width / points
    return -half_width + step * (np.arange(points) + 0.5), step


def _grid_weights(
    m: ResidualModel,
    grid_points: int,
    half_width: float
) -> Tuple[np.ndarray, np.ndarray, List[np.ndarray], float]:
    """Indices de la grille, log-poids c(u) prod phi(y_i), quantiles par axe et pas"""
    n = m.n
    if n > 3:
        raise ParamError("intégration sur grille limitée à N <= 3", {"N": n})
    y, step = _grid_axis(grid_points, half_width)
    lower, upper = stats.norm.cdf(y), stats.norm.sf(y)
    x_axes = [skewt_quantile_tails(lower, upper, p) for p in m.marginals]
    u_axis = np.clip(lower, settings.clamp_eps, 1.0 - settings.clamp_eps)
    log_phi = stats.norm.logpdf(y)

    mesh = np.meshgrid(*([np.arange(grid_points)] * n), indexing="ij")
    idx = np.column_stack([g.ravel() for g in mesh])
    base = m.without_addin() if m.addin is not None else m
    log_c, _ = _copula_logdensity(base, u_axis[idx])
    return idx, log_c + np.sum(log_phi[idx], axis=1), x_axes, step


def grid_mass(m: ResidualModel, grid_points: Optional[int] = None, half_width: Optional[float] = None) -> float:
    """Masse de la densité du modèle de base sur la grille (contrôle de normalisation)"""
    grid_points = grid_points or settings.grid_points
    half_width = half_width or settings.grid_half_width
    _, log_w, _, step = _grid_weights(m, grid_points, half_width)
    return float(np.sum(np.exp(log_w)) * step ** m.n)


def model_correlation(
    m: ResidualModel,
    grid_points: Optional[int] = None,
    half_width: Optional[float] = None
) -> np.ndarray:
    """
    Corrélation du modèle par sommation au point milieu sur [-w, w]^N

    Substitution gaussienne : x_i = F_i^-1(Phi(y_i)), poids c(u) prod phi(y_i) dy.
    La covariance du modèle de base est centrée puis transportée par l'add-in
    (L Cov L').
    """
    grid_points = grid_points or settings.grid_points
    half_width = half_width or settings.grid_half_width
    idx, log_w, x_axes, _ = _grid_weights(m, grid_points, half_width)
    w = np.exp(log_w - np.max(log_w))
    w = w / np.sum(w)
    x = np.column_stack([x_axes[i][idx[:, i]] for i in range(m.n)])
    centered = x - w @ x
    cov = (centered * w[:, None]).T @ centered
    if m.addin is not None:
        cov = m.addin.l @ cov @ m.addin.l.T
    return cov_to_corr(cov)



# ====================================================================
# ESTIMATION
# ====================================================================

class ParamLayout:
    """Vecteur libre : [marges (2N)] [copule] [add-in]"""

    def __init__(self, item: MenuItem, n: int, template: Optional[PairTemplate] = None):
        self.item = item
        self.n = n
        self.template = template
        base = item.base
        if base == MenuItem.PC:
            if template is None:
                raise ParamError("PC / CPC exigent un gabarit de copule par paires")
            if n != 3:
                raise ParamError("les copules par paires sont définies pour N = 3", {"N": n})
            self.edge_counts = [make_family(c).n_params for c in template.codes]
        self.names = [f"marg{i + 1}.{k}" for i in range(n) for k in ("log_nu", "log_gamma")]
        pairs = [f"{i + 1}{j + 1}" for i in range(n) for j in range(i + 1, n)]
        if base in (MenuItem.GC, MenuItem.TC):
            self.names += [f"copula.partial{p}" for p in pairs]
        if base == MenuItem.TC:
            self.names.append("copula.log_nu")
        if base == MenuItem.PC:
            for e, c in enumerate(self.edge_counts):
                self.names += [f"edge{e + 1}.{template.codes[e]}.z{k + 1}" for k in range(c)]
        self.n_base = len(self.names)
        if item.uses_addin:
            self.names += AddInTransform.identity(n).free_names()

    @property
    def k(self) -> int:
        return len(self.names)

    def unpack(self, z: np.ndarray) -> ResidualModel:
        n = self.n
        base = self.item.base
        marginals = [skewt_from_free(z[2 * i:2 * i + 2]) for i in range(n)]
        pos = 2 * n
        fields: Dict[str, Any] = {}
        if base in (MenuItem.GC, MenuItem.TC):
            npr = n_pairs(n)
            partials = np.clip(np.tanh(z[pos:pos + npr]), -PARTIAL_CAP, PARTIAL_CAP)
            fields["sigma_g"] = corr_from_partials(partials, n)
            pos += npr
            if base == MenuItem.TC:
                fields["nu"] = float(NU_LOWER_BOUND + np.exp(np.clip(z[pos], -30.0, 30.0)))
                pos += 1
        if base == MenuItem.PC:
            chunks = split_free(z[pos:], self.edge_counts)
            fields["pivot"] = self.template.pivot
            fields["edges"] = tuple(make_family(c, ch) for c, ch in zip(self.template.codes, chunks))
            pos += sum(self.edge_counts)
        if self.item.uses_addin:
            fields["addin"] = AddInTransform.from_free(z[pos:], n)
        return ResidualModel(menu_item=self.item, marginals=marginals, **fields)

    def pack(self, m: ResidualModel) -> np.ndarray:
        parts = [skewt_to_free(p) for p in m.marginals]
        base = self.item.base
        if base in (MenuItem.GC, MenuItem.TC):
            partials = partials_from_corr(m.sigma_g)
            parts.append(np.array([arctanh_bounded(p, PARTIAL_CAP) for p in partials]))
            if base == MenuItem.TC:
                parts.append(np.array([np.log(m.nu - NU_LOWER_BOUND)]))
        if base == MenuItem.PC:
            parts.extend(e.to_free() for e in m.edges)
        if self.item.uses_addin:
            addin = m.addin if m.addin is not None else AddInTransform.identity(self.n)
            parts.append(addin.to_free())
        return np.concatenate([np.atleast_1d(p) for p in parts])


def _total_loglik(m: ResidualModel, data: np.ndarray) -> float:
    out, _ = _residual_logdensity(m, data)
    return float(np.sum(out))


def _normal_scores_corr(u: np.ndarray) -> np.ndarray:
    return cov_to_corr(np.cov(stats.norm.ppf(u), rowvar=False))


def _optimize_copula_only(layout: ParamLayout, z: np.ndarray, u: np.ndarray, label: str) -> np.ndarray:
    """Paramètres de copule à marges fixées (uniformes figées)"""
    n_marg = 2 * layout.n
    head = z[:n_marg]
    if layout.n_base == n_marg:
        return z

    def objective(c: np.ndarray) -> float:
        m = layout.unpack(np.concatenate([head, c, z[layout.n_base:]]))
        log_c, _ = _copula_logdensity(m, u)
        return -float(np.sum(log_c))

    driver = SimplexDriver(objective, label=f"{label} copule", max_iter=settings.simplex_max_iter, restarts=0)
    c_hat, _ = driver.run(z[n_marg:layout.n_base])
    return np.concatenate([head, c_hat, z[layout.n_base:]])


def _joint_optimize(
    layout: ParamLayout,
    z0: np.ndarray,
    data: np.ndarray,
    label: str,
    seed: int
) -> Tuple[np.ndarray, OptimReport]:
    """L-BFGS-B sur tout le vecteur libre, puis simplexe si l'arrêt est anormal"""
    objective = safe_objective(lambda z: -_total_loglik(layout.unpack(z), data))
    f0 = objective(z0)
    res = optimize.minimize(objective, z0, method="L-BFGS-B", options={"maxiter": settings.residual_max_iter})
    z_best, f_best = (res.x, float(res.fun)) if res.fun <= f0 else (z0, f0)
    grad_ok = res.jac is not None and np.max(np.abs(res.jac)) <= 1e-2 * max(1.0, abs(f_best) / max(len(data), 1))
    converged = bool(res.success) or grad_ok
    iterations, evaluations, restarts = int(res.nit), int(res.nfev), 0
    message = str(res.message)
    if not converged:
        logger.debug(f"⚠️ {label} : L-BFGS-B interrompu ({res.message}), relais par le simplexe")
        driver = SimplexDriver(objective, label=label, seed=seed)
        z_nm, report = driver.run(z_best)
        iterations += report.iterations
        evaluations += report.evaluations
        restarts = report.restarts
        message = report.message
        if -report.loglik <= f_best:
            z_best, f_best = z_nm, -report.loglik
        converged = report.converged
    return z_best, OptimReport(
        converged=converged, iterations=iterations, evaluations=evaluations,
        loglik=-f_best, restarts=restarts, message=message
    )


def _staged_start(
    item: MenuItem,
    data: np.ndarray,
    template: Optional[PairTemplate],
    kind: ResidualKind,
    seed: int
) -> Tuple[ParamLayout, np.ndarray, Optional[np.ndarray]]:
    """Point de départ étagé ; retourne aussi la solution du modèle de base pour l'add-in"""
    n = data.shape[1]
    label = f"{item.value}" + (f" {template.spec_string}" if template is not None else "")

    if item.uses_addin:
        base_layout, base_z, _ = _staged_start(item.base, data, template, kind, seed)
        base_z, _ = _joint_optimize(base_layout, base_z, data, label, seed)
        layout = ParamLayout(item, n, template)
        base_model = base_layout.unpack(base_z)
        j0 = np.eye(n) if kind == ResidualKind.DCC else cov_to_corr(np.cov(data, rowvar=False))
        if item.base == MenuItem.IC:
            s_y0 = np.eye(n)
        elif item.base in (MenuItem.GC, MenuItem.TC):
            s_y0 = base_model.sigma_g
        else:
            s_y0 = cov_to_corr(np.cov(data, rowvar=False))
        candidates = [AddInTransform.identity(n)]
        try:
            candidates.append(addin_from_target(j0, s_y0))
        except (MatrixError, ParamError) as e:
            logger.debug(f"⚠️ {label} : cible d'add-in inutilisable ({e})")
        best_z, best_ll = None, -np.inf
        for addin in candidates:
            z = np.concatenate([base_z, addin.to_free()])
            ll = -safe_objective(lambda v: -_total_loglik(layout.unpack(v), data))(z)
            if ll > best_ll:
                best_z, best_ll = z, ll
        return layout, best_z, base_z

    layout = ParamLayout(item, n, template)
    marginals = [fit_skewt(data[:, i])[0] for i in range(n)]
    z_marg = np.concatenate([skewt_to_free(p) for p in marginals])
    u, _ = marginal_uniforms(data, marginals)

    if item == MenuItem.IC:
        return layout, z_marg, None
    if item == MenuItem.PC:
        edges, _ = fit_pair_copula_edges(template, u)
        z = np.concatenate([z_marg] + [e.to_free() for e in edges])
        return layout, z, None

    # GC / TC : départ au point d'indépendance ou aux scores normaux, le meilleur des deux
    scores = _normal_scores_corr(u)
    starts = [np.zeros(n_pairs(n)), np.array([arctanh_bounded(p, PARTIAL_CAP) for p in partials_from_corr(scores)])]
    if item == MenuItem.TC:
        starts = [np.append(s, np.log(8.0 - NU_LOWER_BOUND)) for s in starts]
    best = None
    for c0 in starts:
        z = _optimize_copula_only(layout, np.concatenate([z_marg, c0]), u, label)
        m = layout.unpack(z)
        val = float(np.sum(_copula_logdensity(m, u)[0]))
        if best is None or val > best[0]:
            best = (val, z)
    return layout, best[1], None


def _boundary_names(layout: ParamLayout, z: np.ndarray) -> List[str]:
    return [name for name, v in zip(layout.names, z) if abs(v) > BOUNDARY_FREE]


def fit_residual_model(
    data: np.ndarray,
    menu_item: MenuItem,
    template: Optional[PairTemplate] = None,
    kind: ResidualKind = ResidualKind.DCC,
    seed: int = 0
) -> FitResult:
    """
    Maximum de vraisemblance d'un item du menu

    Args:
        data: résidus (T, N) : xi GARCH (kind="garch") ou epsilon DCC (kind="dcc")
        menu_item: IC, CIC, GC, CGC, TC, CTC, PC ou CPC
        template: gabarit de copule par paires pour PC / CPC
        kind: choisit la cible J de l'add-in (libre pour GARCH, identité pour DCC)

    Raises:
        FitError: données insuffisantes ou non-convergence
    """
    data = np.asarray(data, dtype=float)
    menu_item = MenuItem(menu_item)
    if data.ndim != 2 or data.shape[0] < MIN_OBSERVATIONS:
        raise FitError("données de résidus insuffisantes", {"shape": data.shape})
    label = menu_item.value + (f" {template.spec_string}" if template is not None else "")
    logger.debug(f"🔄 Ajustement {label} sur T={data.shape[0]}, N={data.shape[1]}")

    layout, z0, _ = _staged_start(menu_item, data, template, kind, seed)
    z_hat, report = _joint_optimize(layout, z0, data, label, seed)
    if not report.converged:
        raise FitError(f"{label} : l'optimisation n'a pas convergé", report.model_dump())

    model = layout.unpack(z_hat)
    log_d, clamps = _residual_logdensity(model, data)
    ll = float(np.sum(log_d))
    aic, bic = information_criteria(ll, layout.k, data.shape[0])
    boundary = _boundary_names(layout, z_hat)
    if boundary:
        logger.warning(f"⚠️ {label} : paramètres au bord {boundary}")
    return FitResult(
        model=model, loglik=ll, k=layout.k, n_obs=data.shape[0], aic=aic, bic=bic,
        converged=report.converged, clamp_count=clamps, boundary_params=boundary, report=report
    )

