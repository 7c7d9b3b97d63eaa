"""
Modèles Pydantic pour validation et typage
"""
from typing import Optional, Dict, List, Any
from datetime import date
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator, field_serializer

from core.exceptions import ParamError, MatrixError

NU_LOWER_BOUND = 2.001
PERSISTENCE_CAP = 1.0 - 1e-6


class DecompTag(str, Enum):
    """Méthodes de décomposition de R_t"""
    SQRT = "sqrt"
    SQRT2 = "sqrt2"
    CHOLESKY = "cholesky"
    EIGEN = "eigen"
    EIGEN2 = "eigen2"

    @property
    def uses_covariance(self) -> bool:
        return self in (DecompTag.SQRT2, DecompTag.EIGEN2)

    @property
    def uses_eigen_sort(self) -> bool:
        return self in (DecompTag.EIGEN, DecompTag.EIGEN2)


NODCC = "nodcc"


class MenuItem(str, Enum):
    """Menu des distributions de résidus"""
    IC = "IC"
    CIC = "CIC"
    GC = "GC"
    CGC = "CGC"
    TC = "TC"
    CTC = "CTC"
    PC = "PC"
    CPC = "CPC"

    @property
    def uses_addin(self) -> bool:
        return self in (MenuItem.CIC, MenuItem.CGC, MenuItem.CTC, MenuItem.CPC)

    @property
    def base(self) -> "MenuItem":
        """Item sans add-in (CGC -> GC)"""
        if self in (MenuItem.CIC, MenuItem.CGC, MenuItem.CTC, MenuItem.CPC):
            return MenuItem(self.value[1:])
        return self

    @property
    def with_addin(self) -> "MenuItem":
        return MenuItem("C" + self.base.value)

    @property
    def is_pair(self) -> bool:
        return self.base == MenuItem.PC


class ResidualKind(str, Enum):
    """Nature des résidus modélisés à l'étape 3"""
    GARCH = "garch"  # NoDCC, copula-GARCH
    DCC = "dcc"


class Pivot(int, Enum):
    """Factorisations trivariées"""
    P1 = 1
    P2 = 2
    P3 = 3


class SkewTParams(BaseModel):
    """Paramètres de la skew-t standardisée (moyenne 0, variance 1)"""
    model_config = ConfigDict(frozen=True)

    nu: float
    gamma: float = 1.0

    @model_validator(mode="after")
    def _check_domain(self) -> "SkewTParams":
        if not np.isfinite(self.nu) or self.nu <= NU_LOWER_BOUND:
            raise ParamError("nu doit être > 2.001", {"nu": self.nu})
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise ParamError("gamma doit être > 0", {"gamma": self.gamma})
        return self


class GarchParams(BaseModel):
    """Paramètres GARCH(1,1) d'un actif"""
    model_config = ConfigDict(frozen=True)

    omega: float
    alpha: float
    beta: float
    sigma0: float

    @model_validator(mode="after")
    def _check_domain(self) -> "GarchParams":
        if self.omega <= 0:
            raise ParamError("omega doit être > 0", {"omega": self.omega})
        if self.alpha < 0 or self.beta < 0:
            raise ParamError("alpha et beta doivent être >= 0", {"alpha": self.alpha, "beta": self.beta})
        if self.alpha + self.beta >= 1:
            raise ParamError("alpha + beta doit être < 1", {"persistence": self.alpha + self.beta})
        if self.sigma0 <= 0:
            raise ParamError("sigma0 doit être > 0", {"sigma0": self.sigma0})
        return self


def check_corr_matrix(m: np.ndarray, name: str = "R") -> np.ndarray:
    """Valider une matrice de corrélation (symétrique, diagonale unité, définie positive)"""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise MatrixError(f"{name} doit être carrée", {"shape": m.shape})
    if np.max(np.abs(m - m.T)) > 1e-12:
        raise MatrixError(f"{name} n'est pas symétrique")
    if np.max(np.abs(np.diag(m) - 1.0)) > 1e-12:
        raise MatrixError(f"{name} doit avoir une diagonale unité")
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise MatrixError(f"{name} n'est pas définie positive")
    return m


class DccParams(BaseModel):
    """Paramètres DCC (a, b, Q̄, Q0)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    a: float
    b: float
    q_bar: np.ndarray
    q0: Optional[np.ndarray] = None

    @model_validator(mode="before")
    @classmethod
    def _default_q0(cls, data: Any) -> Any:
        # Q0 = Q̄ sauf indication contraire
        if isinstance(data, dict):
            data = dict(data)
            data["q_bar"] = np.asarray(data.get("q_bar"), dtype=float)
            if data.get("q0") is None:
                data["q0"] = np.array(data["q_bar"], dtype=float)
            else:
                data["q0"] = np.asarray(data["q0"], dtype=float)
        return data

    @model_validator(mode="after")
    def _check_domain(self) -> "DccParams":
        if self.a < 0 or self.b < 0:
            raise ParamError("a et b doivent être >= 0", {"a": self.a, "b": self.b})
        if self.a + self.b >= 1:
            raise ParamError("a + b doit être < 1", {"persistence": self.a + self.b})
        check_corr_matrix(self.q_bar, "Q̄")
        check_corr_matrix(self.q0, "Q0")
        return self

    @property
    def n_assets(self) -> int:
        return self.q_bar.shape[0]

    @field_serializer("q_bar", "q0")
    def _ser_matrix(self, m: np.ndarray) -> List[float]:
        return [float(v) for v in np.asarray(m).ravel()]


class DecompMethod(BaseModel):
    """Méthode de décomposition et fenêtre du tri des vecteurs propres"""
    model_config = ConfigDict(frozen=True)

    tag: DecompTag
    tau: int = 50

    @field_validator("tau")
    @classmethod
    def _check_tau(cls, v: int) -> int:
        if v < 1:
            raise ParamError("tau doit être >= 1", {"tau": v})
        return v


class RatePanel(BaseModel):
    """Niveaux de taux alignés (T x N), dates strictement croissantes"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dates: List[date]
    rates: np.ndarray
    asset_names: List[str]

    @property
    def n_rows(self) -> int:
        return len(self.dates)


class ReturnPanel(BaseModel):
    """Rendements logarithmiques ((T-1) x N) et première ligne hors échantillon"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dates: List[date]
    returns: np.ndarray
    asset_names: List[str]
    split_index: int

    @property
    def in_sample(self) -> np.ndarray:
        return self.returns[:self.split_index]

    @property
    def out_of_sample(self) -> np.ndarray:
        return self.returns[self.split_index:]


class SampleStats(BaseModel):
    """Statistiques descriptives d'une série"""
    mean: float
    std: float
    skew: float
    excess_kurtosis: float
    min: float
    p25: float
    p50: float
    p75: float
    max: float


class CorrInterval(BaseModel):
    """Intervalle de confiance bootstrap d'une corrélation"""
    point: float
    lower: float
    upper: float
    resamples: int
    level: float = 0.95

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


class OptimReport(BaseModel):
    """Rapport d'optimisation"""
    converged: bool
    iterations: int
    evaluations: int
    loglik: float
    restarts: int = 0
    message: str = ""


class GarchFit(BaseModel):
    """Résultat de l'étape 1 pour un actif"""
    asset: str
    omega: float
    alpha: float
    beta: float
    sigma0: float
    ll: float
    converged: bool
    report: Optional[OptimReport] = None

    @property
    def params(self) -> GarchParams:
        return GarchParams(omega=self.omega, alpha=self.alpha, beta=self.beta, sigma0=self.sigma0)


class DccFit(BaseModel):
    """Résultat de l'étape 2"""
    a: float
    b: float
    q_bar: List[float]
    ll: float
    converged: bool
    report: Optional[OptimReport] = None

    @property
    def params(self) -> DccParams:
        n = int(round(np.sqrt(len(self.q_bar))))
        q_bar = np.array(self.q_bar, dtype=float).reshape(n, n)
        return DccParams(a=self.a, b=self.b, q_bar=q_bar)


class EvalReport(BaseModel):
    """Évaluation d'un modèle ajusté (une ligne des tableaux de résultats)"""
    method: str
    menu_item: str
    spec_string: Optional[str] = None
    aic: float
    bic: float
    llis: float
    lloos: Optional[float] = None
    corr_test: str = "F"
    addin_used: bool = False
    cokurtosis: Dict[str, float] = Field(default_factory=dict)


class QualityLog(BaseModel):
    """Bilan qualité d'une étape"""
    source_type: str
    pipeline_step: str
    records_total: int = 0
    records_accepted: int = 0
    records_rejected: int = 0
    rejection_reasons: Dict[str, int] = Field(default_factory=dict)
    clamped_arguments: int = 0
    status: str = "success"
    error_message: Optional[str] = None


class PipelineConfig(BaseModel):
    """Configuration d'un run du pipeline"""
    data_path: str
    assets: List[str]
    group: str = "Group1"
    inverse_assets: List[str] = Field(default_factory=list)
    delimiter: str = ","
    split_date: date
    decomp: List[DecompTag] = Field(default_factory=lambda: list(DecompTag))
    tau: int = 50
    menu: List[MenuItem] = Field(
        default_factory=lambda: [MenuItem.IC, MenuItem.CIC, MenuItem.GC, MenuItem.CGC, MenuItem.TC, MenuItem.CTC]
    )
    pair_spec: str = "P1:ga:ga:ga"
    sweep: bool = False
    sweep_families: Optional[List[str]] = None
    sweep_pivots: List[int] = Field(default_factory=lambda: [1, 2, 3])
    seed: int = 20240101
    jobs: int = 0
    out_dir: str = "runs"
    bootstrap_resamples: int = 10_000
    bootstrap_level: float = 0.95
    grid_points: int = 100
    reinit_out_of_sample: bool = False

    @field_validator("assets")
    @classmethod
    def _check_assets(cls, v: List[str]) -> List[str]:
        if len(v) < 1:
            raise ValueError("au moins un actif est requis")
        if len(set(v)) != len(v):
            raise ValueError("actifs dupliqués")
        return v

    @field_validator("tau")
    @classmethod
    def _check_tau(cls, v: int) -> int:
        if v < 1:
            raise ValueError("tau doit être >= 1")
        return v

    @field_validator("bootstrap_level")
    @classmethod
    def _check_level(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("le niveau doit être dans (0, 1)")
        return v

    def hash_payload(self) -> Dict[str, Any]:
        """
        Contenu canonique servant au hash de config

        Sans le répertoire de sortie, le nombre de processus ni le menu du
        balayage : sweep relit les artefacts du fit de même hash.
        """
        payload = self.model_dump(mode="json")
        for key in ("out_dir", "jobs", "sweep", "sweep_families", "sweep_pivots"):
            payload.pop(key, None)
        return payload
